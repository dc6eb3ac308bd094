#ifndef STCCPM_EXPERIMENTS_HPP
#define STCCPM_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "channel.hpp"
#include "receiver.hpp"
#include "stc_code.hpp"

namespace stccpm {

inline constexpr const char* kVersion = "stccpm 0.1.0";

enum class ExperimentKind { BerSweep, PhaseSweep1D, PhaseSweep2D, PsdReport, OrthoCheck };

const char* experiment_name(ExperimentKind k);
ExperimentKind experiment_from_name(const std::string& s);

// Full experiment description. The key/value config file mirrors these
// field names; see parse_config.
struct ExperimentConfig {
    CpmParams params;
    StcCodeSpec spec{2, Correction::LinPC, {0.0, 0.0}};
    ExperimentKind experiment = ExperimentKind::BerSweep;
    std::vector<double> snr_grid_dB;
    double phase_grid = 0.05;           // cycles; must divide 1 evenly
    long long n_bits = 50000;           // Monte Carlo budget per point
    int n_blocks = 1000;                // ortho: number of checked blocks
    std::uint64_t seed = 1;
    std::string output_path;
    FadingMode fading = FadingMode::Common;
    int coherence = 1;                  // fading coherence, in code blocks
    int Lr = 1;
    int oversample = 4;                 // integration oversampling (ortho)

    // Fixed campaign constants.
    static constexpr int kBurstSymbols = 120; // per-trial burst length
    static constexpr long long kMaxErrors = 400;
    static constexpr int kBatchTrials = 64;   // early-stop granularity

    void validate() const;
    std::vector<std::pair<std::string, std::string>> to_kv() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key, const std::string& value);

std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

// 95% Wilson score interval for errors/n.
std::pair<double, double> wilson_interval(long long errors, long long n);

struct BerRecord {
    double snr_dB = 0.0;
    long long bits_sent = 0;
    long long bit_errors = 0;
    double ber = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    double wallclock_s = 0.0; // kept out of the output files
};

struct SweepRecord {
    double theta1 = 0.0, theta2 = 0.0;
    long long bits_sent = 0;
    long long bit_errors = 0;
    double ber = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
};

struct PsdSummary {
    std::vector<double> centroid_shift;  // measured, per antenna, vs antenna 1
    std::vector<double> expected_shift;  // (m-1)/(Lt*T)
    double bin_width = 0.0;
    double bw30_single = 0.0;            // -30 dB width, antenna 1
    double bw30_composite = 0.0;         // -30 dB width, summed spectrum
    double expansion_ratio = 0.0;        // (composite - single) / single
};

struct OrthoRow {
    int block = 0;
    double offdiag_max = 0.0;
    double diag_dev_max = 0.0;
};

struct OrthoSummary {
    std::vector<OrthoRow> rows;
    double max_offdiag = 0.0;
    double max_diag_dev = 0.0;
    double bound = 0.0; // 1e-6 * Es
    bool pass = false;
};

struct ExperimentResult {
    ExperimentKind kind = ExperimentKind::BerSweep;
    std::vector<BerRecord> ber;
    std::vector<SweepRecord> sweep;
    std::vector<SweepRecord> minima; // 2-D sweeps: local minima sorted by BER
    std::vector<PsdEstimate> psd_per_antenna;
    PsdEstimate psd_composite;
    PsdSummary psd;
    OrthoSummary ortho;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1);

// Simulate one Monte Carlo point. Trial RNG streams depend only on
// (seed, trial index), so different grid points of a sweep share their
// data/fading/noise draws (common random numbers), and results do not
// depend on the thread count.
struct PointResult {
    long long bits = 0;
    long long errors = 0;
};
PointResult simulate_point(const CpmParams& params, const StcCodeSpec& spec, double N0,
                           FadingMode mode, int coherence, int Lr, std::uint64_t seed,
                           long long n_bits, long long max_errors, int threads);

// CSV plus JSON sidecar (same path with ".json" appended to the stem).
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res,
                   const std::string& out_path);
std::string summary_json(const ExperimentConfig& cfg, const ExperimentResult& res);
std::string render_csv(const ExperimentConfig& cfg, const ExperimentResult& res);

} // namespace stccpm

#endif
