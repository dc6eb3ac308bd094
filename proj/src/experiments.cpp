#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

namespace stccpm {

using json = nlohmann::json;

const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::BerSweep: return "ber_sweep";
        case ExperimentKind::PhaseSweep1D: return "phase_sweep_1d";
        case ExperimentKind::PhaseSweep2D: return "phase_sweep_2d";
        case ExperimentKind::PsdReport: return "psd_report";
        case ExperimentKind::OrthoCheck: return "ortho_check";
    }
    return "?";
}

ExperimentKind experiment_from_name(const std::string& s) {
    if (s == "ber_sweep" || s == "ber") return ExperimentKind::BerSweep;
    if (s == "phase_sweep_1d" || s == "sweep1d") return ExperimentKind::PhaseSweep1D;
    if (s == "phase_sweep_2d" || s == "sweep2d") return ExperimentKind::PhaseSweep2D;
    if (s == "psd_report" || s == "psd") return ExperimentKind::PsdReport;
    if (s == "ortho_check" || s == "ortho") return ExperimentKind::OrthoCheck;
    throw ConfigError("unknown experiment: " + s);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

// Accepts "a,b,c" or "start:step:stop".
std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3) throw ConfigError("range syntax is start:step:stop");
        const double start = std::stod(parts[0]);
        const double step = std::stod(parts[1]);
        const double stop = std::stod(parts[2]);
        if (step <= 0.0) throw ConfigError("range step must be > 0");
        for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
        return out;
    }
    for (const auto& p : split(s, ','))
        if (!p.empty()) out.push_back(std::stod(p));
    return out;
}

Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) {
        // Accept a plain integer; anything else must be written as a fraction.
        const long long v = std::stoll(trim(s));
        return Rational(v);
    }
    const long long num = std::stoll(trim(s.substr(0, slash)));
    const long long den = std::stoll(trim(s.substr(slash + 1)));
    return Rational(num, den);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt(v[i]);
    }
    return out;
}

} // namespace

void ExperimentConfig::validate() const {
    params.validate();
    const bool strict = experiment == ExperimentKind::BerSweep ||
                        experiment == ExperimentKind::PhaseSweep1D ||
                        experiment == ExperimentKind::PhaseSweep2D;
    spec.validate(strict);
    if (n_bits <= 0) throw ConfigError("n_bits must be > 0");
    if (n_blocks <= 0) throw ConfigError("n_blocks must be > 0");
    if (coherence < 1) throw ConfigError("coherence must be >= 1");
    if (Lr < 1) throw ConfigError("Lr must be >= 1");
    if (oversample < 1) throw ConfigError("oversample must be >= 1");
    if (phase_grid <= 0.0 || phase_grid > 0.5)
        throw ConfigError("phase_grid must be in (0, 0.5]");
    const double inv = 1.0 / phase_grid;
    if (std::abs(inv - std::lround(inv)) > 1e-9)
        throw ConfigError("phase_grid must divide 1 evenly");
    if (experiment == ExperimentKind::PhaseSweep1D && spec.Lt != 2)
        throw ConfigError("phase_sweep_1d requires Lt = 2");
    if (experiment == ExperimentKind::PhaseSweep2D && spec.Lt != 3)
        throw ConfigError("phase_sweep_2d requires Lt = 3");
    if (kBurstSymbols % spec.Lt != 0)
        throw ConfigError("burst length is not a multiple of Lt");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::to_kv() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("experiment", experiment_name(experiment));
    kv.emplace_back("M", std::to_string(params.M));
    kv.emplace_back("h", params.h.str());
    kv.emplace_back("gamma", std::to_string(params.gamma));
    kv.emplace_back("pulse", pulse_name(params.pulse));
    kv.emplace_back("sps", std::to_string(params.sps));
    kv.emplace_back("T", fmt(params.T));
    kv.emplace_back("Es", fmt(params.Es));
    kv.emplace_back("Lt", std::to_string(spec.Lt));
    kv.emplace_back("correction", correction_name(spec.correction));
    kv.emplace_back("theta_init", join_doubles(spec.theta_init));
    kv.emplace_back("snr_grid_dB", join_doubles(snr_grid_dB));
    kv.emplace_back("phase_grid", fmt(phase_grid));
    kv.emplace_back("n_bits", std::to_string(n_bits));
    kv.emplace_back("n_blocks", std::to_string(n_blocks));
    kv.emplace_back("seed", std::to_string(seed));
    kv.emplace_back("output_path", output_path);
    kv.emplace_back("fading", fading_mode_name(fading));
    kv.emplace_back("coherence", std::to_string(coherence));
    kv.emplace_back("Lr", std::to_string(Lr));
    kv.emplace_back("oversample", std::to_string(oversample));
    return kv;
}

void apply_config_line(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "experiment") cfg.experiment = experiment_from_name(value);
        else if (key == "M") cfg.params.M = std::stoi(value);
        else if (key == "h") cfg.params.h = parse_rational(value);
        else if (key == "gamma") cfg.params.gamma = std::stoi(value);
        else if (key == "pulse") cfg.params.pulse = pulse_from_name(value);
        else if (key == "sps") cfg.params.sps = std::stoi(value);
        else if (key == "T") cfg.params.T = std::stod(value);
        else if (key == "Es") cfg.params.Es = std::stod(value);
        else if (key == "Lt") {
            cfg.spec.Lt = std::stoi(value);
            cfg.spec.theta_init.resize(static_cast<std::size_t>(std::max(cfg.spec.Lt, 0)), 0.0);
        } else if (key == "correction") cfg.spec.correction = correction_from_name(value);
        else if (key == "theta_init") {
            cfg.spec.theta_init = parse_grid(value);
        } else if (key == "snr_grid_dB") cfg.snr_grid_dB = parse_grid(value);
        else if (key == "phase_grid") cfg.phase_grid = std::stod(value);
        else if (key == "n_bits") cfg.n_bits = std::stoll(value);
        else if (key == "n_blocks") cfg.n_blocks = std::stoi(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "output_path") cfg.output_path = value;
        else if (key == "fading") cfg.fading = fading_mode_from_name(value);
        else if (key == "coherence") cfg.coherence = std::stoi(value);
        else if (key == "Lr") cfg.Lr = std::stoi(value);
        else if (key == "oversample") cfg.oversample = std::stoi(value);
        else throw ConfigError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad value for " + key + ": " + value);
    } catch (const std::out_of_range&) {
        throw ConfigError("value out of range for " + key + ": " + value);
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value: " + line);
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// Presets: one per benchmark figure/table. All use the M=4, h=1/2,
// gamma=2, 12 samples/symbol configuration.
//
// Channel conventions (see README): the BER-vs-SNR presets use per-block
// i.i.d. Rayleigh fading (fading=iid), which fixes the diversity slopes.
// The initial-phase sweep presets use common-mode fading with a coherence
// of two code blocks, the regime where the phase structure is visible;
// under i.i.d. per-antenna fading with coherent MLSD the BER is exactly
// independent of the initial phases.
// ---------------------------------------------------------------------------

namespace {

ExperimentConfig base_config() {
    ExperimentConfig c;
    c.params = CpmParams{};
    c.spec = StcCodeSpec{2, Correction::LinPC, {0.0, 0.0}};
    c.seed = 20080707;
    return c;
}

ExperimentConfig sweep2tx(Correction corr, PulseShape pulse, double grid, long long bits) {
    ExperimentConfig c = base_config();
    c.experiment = ExperimentKind::PhaseSweep1D;
    c.spec.correction = corr;
    c.params.pulse = pulse;
    c.snr_grid_dB = {12.5};
    c.phase_grid = grid;
    c.n_bits = bits;
    c.fading = FadingMode::Common;
    c.coherence = 2;
    return c;
}

ExperimentConfig sweep3tx(Correction corr, PulseShape pulse) {
    ExperimentConfig c = base_config();
    c.experiment = ExperimentKind::PhaseSweep2D;
    c.spec.Lt = 3;
    c.spec.correction = corr;
    c.spec.theta_init = {0.0, 0.0, 0.0};
    c.params.pulse = pulse;
    c.snr_grid_dB = {13.0};
    c.phase_grid = 0.05;
    c.n_bits = 50000;
    c.fading = FadingMode::Common;
    c.coherence = 2;
    return c;
}

ExperimentConfig ber(int Lt, Correction corr, std::vector<double> theta, double snr_lo,
                     double snr_hi) {
    ExperimentConfig c = base_config();
    c.experiment = ExperimentKind::BerSweep;
    c.spec.Lt = Lt;
    c.spec.correction = corr;
    c.spec.theta_init = std::move(theta);
    for (double v = snr_lo; v <= snr_hi + 1e-9; v += 2.0) c.snr_grid_dB.push_back(v);
    c.n_bits = 1200000;
    c.fading = FadingMode::PerAntenna;
    c.coherence = 1;
    return c;
}

} // namespace

std::vector<std::string> preset_names() {
    return {
        "fig2_psd",
        "fig3_sweep2tx",
        "fig3_sweep2tx_offpc",
        "fig3_sweep2tx_linpc_rc",
        "fig3_sweep2tx_offpc_rc",
        "fig3_sweep2tx_fine",
        "fig3_sweep2tx_offpc_fine",
        "fig4_sweep3tx_a",
        "fig4_sweep3tx_b",
        "fig4_sweep3tx_c",
        "table1_minima",
        "table1_minima_linpc",
        "fig5_ber_2tx_linpc_opt",
        "fig5_ber_2tx_offpc_opt",
        "fig5_ber_2tx_nonopt",
        "fig5_ber_3tx_offpc_opt",
        "fig5_ber_3tx_linpc_opt",
        "fig5_ber_3tx_nonopt",
        "ortho_check",
    };
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    if (name == "fig2_psd") {
        c = base_config();
        c.experiment = ExperimentKind::PsdReport;
        c.spec.Lt = 3;
        c.spec.theta_init = {0.0, 0.0, 0.0};
        c.n_bits = 24000; // 12000 symbols
    } else if (name == "fig3_sweep2tx") {
        c = sweep2tx(Correction::LinPC, PulseShape::REC, 0.05, 50000);
    } else if (name == "fig3_sweep2tx_offpc") {
        c = sweep2tx(Correction::OffPC, PulseShape::REC, 0.05, 50000);
    } else if (name == "fig3_sweep2tx_linpc_rc") {
        c = sweep2tx(Correction::LinPC, PulseShape::RC, 0.05, 50000);
    } else if (name == "fig3_sweep2tx_offpc_rc") {
        c = sweep2tx(Correction::OffPC, PulseShape::RC, 0.05, 50000);
    } else if (name == "fig3_sweep2tx_fine") {
        c = sweep2tx(Correction::LinPC, PulseShape::REC, 0.01, 200000);
    } else if (name == "fig3_sweep2tx_offpc_fine") {
        c = sweep2tx(Correction::OffPC, PulseShape::REC, 0.01, 200000);
    } else if (name == "fig4_sweep3tx_a" || name == "table1_minima") {
        c = sweep3tx(Correction::OffPC, PulseShape::REC);
    } else if (name == "fig4_sweep3tx_b") {
        c = sweep3tx(Correction::OffPC, PulseShape::RC);
    } else if (name == "fig4_sweep3tx_c" || name == "table1_minima_linpc") {
        c = sweep3tx(Correction::LinPC, PulseShape::REC);
    } else if (name == "fig5_ber_2tx_linpc_opt") {
        c = ber(2, Correction::LinPC, {0.0, 0.19}, 4.0, 20.0);
    } else if (name == "fig5_ber_2tx_offpc_opt") {
        c = ber(2, Correction::OffPC, {0.0, 0.40}, 4.0, 20.0);
    } else if (name == "fig5_ber_2tx_nonopt") {
        c = ber(2, Correction::LinPC, {0.0, 0.0}, 8.0, 26.0);
    } else if (name == "fig5_ber_3tx_offpc_opt") {
        c = ber(3, Correction::OffPC, {0.1, 0.45, 0.0}, 4.0, 18.0);
    } else if (name == "fig5_ber_3tx_linpc_opt") {
        c = ber(3, Correction::LinPC, {0.4, 0.15, 0.0}, 4.0, 18.0);
    } else if (name == "fig5_ber_3tx_nonopt") {
        c = ber(3, Correction::OffPC, {0.0, 0.0, 0.0}, 8.0, 24.0);
    } else if (name == "ortho_check") {
        c = base_config();
        c.experiment = ExperimentKind::OrthoCheck;
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    c.output_path = "out/" + name + ".csv";
    return c;
}

std::pair<double, double> wilson_interval(long long errors, long long n) {
    if (n <= 0) return {0.0, 1.0};
    const double z = 1.959963985;
    const double p = static_cast<double>(errors) / static_cast<double>(n);
    const double nn = static_cast<double>(n);
    const double den = 1.0 + z * z / nn;
    const double center = (p + z * z / (2.0 * nn)) / den;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / den;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// ---------------------------------------------------------------------------
// Monte Carlo core
// ---------------------------------------------------------------------------

namespace {

enum StreamTag : std::uint64_t { kTagData = 1, kTagFading = 2, kTagNoise = 3 };

struct TrialWorkspace {
    Trellis trellis;
};

long long run_one_trial(const CpmParams& params, const StcCodeSpec& spec, const Trellis& trellis,
                        double N0, FadingMode mode, int coherence, int Lr, std::uint64_t seed,
                        std::uint64_t trial) {
    const int bps = params.bits_per_symbol();
    const int n_sym = ExperimentConfig::kBurstSymbols;
    Rng rng_data(derive_seed(seed, kTagData, trial));
    Rng rng_fading(derive_seed(seed, kTagFading, trial));
    Rng rng_noise(derive_seed(seed, kTagNoise, trial));

    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_sym) * bps);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng_data.next_u64() & 1u);
    const auto symbols = gray_bits_to_symbols(bits, params);

    const auto tx = encode_continuous(spec, params, symbols);
    const int n_blocks = n_sym / spec.Lt;
    const int n_draws = (n_blocks + coherence - 1) / coherence;
    ChannelRealization ch = make_block_fading(spec.Lt, Lr, n_draws, N0, mode, rng_fading);
    ch.block_len = coherence;
    const auto rx = transmit(tx, ch, spec.Lt, params.T, rng_noise);
    const auto det = mlsd_detect(rx, ch, trellis);

    long long errs = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i] != det.bits[i]) ++errs;
    return errs;
}

void parallel_for(long long begin, long long end, int threads,
                  const std::function<void(long long)>& fn) {
    const long long n = end - begin;
    if (threads <= 1 || n <= 1) {
        for (long long i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const int used = static_cast<int>(std::min<long long>(threads, n));
    for (int t = 0; t < used; ++t) {
        pool.emplace_back([=, &fn]() {
            for (long long i = begin + t; i < end; i += used) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace

PointResult simulate_point(const CpmParams& params, const StcCodeSpec& spec, double N0,
                           FadingMode mode, int coherence, int Lr, std::uint64_t seed,
                           long long n_bits, long long max_errors, int threads) {
    const int bps = params.bits_per_symbol();
    const long long bits_per_trial = static_cast<long long>(ExperimentConfig::kBurstSymbols) * bps;
    const long long n_trials = (n_bits + bits_per_trial - 1) / bits_per_trial;

    const Trellis trellis = build_trellis(params, spec);

    PointResult out;
    std::vector<long long> batch_err(ExperimentConfig::kBatchTrials);
    long long trial = 0;
    while (trial < n_trials) {
        const long long batch =
            std::min<long long>(ExperimentConfig::kBatchTrials, n_trials - trial);
        parallel_for(0, batch, threads, [&](long long i) {
            batch_err[static_cast<std::size_t>(i)] = run_one_trial(
                params, spec, trellis, N0, mode, coherence, Lr, seed,
                static_cast<std::uint64_t>(trial + i));
        });
        for (long long i = 0; i < batch; ++i) out.errors += batch_err[static_cast<std::size_t>(i)];
        trial += batch;
        out.bits = trial * bits_per_trial;
        if (max_errors > 0 && out.errors >= max_errors) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment runners
// ---------------------------------------------------------------------------

namespace {

ExperimentResult run_ber_sweep(const ExperimentConfig& cfg, int threads) {
    ExperimentResult res;
    res.kind = ExperimentKind::BerSweep;
    if (cfg.snr_grid_dB.empty()) throw ConfigError("ber_sweep needs snr_grid_dB");
    for (double snr : cfg.snr_grid_dB) {
        const auto t0 = std::chrono::steady_clock::now();
        const double N0 = snr_to_n0(snr, cfg.params);
        const auto pr = simulate_point(cfg.params, cfg.spec, N0, cfg.fading, cfg.coherence,
                                       cfg.Lr, cfg.seed, cfg.n_bits,
                                       ExperimentConfig::kMaxErrors, threads);
        BerRecord rec;
        rec.snr_dB = snr;
        rec.bits_sent = pr.bits;
        rec.bit_errors = pr.errors;
        rec.ber = pr.bits > 0 ? static_cast<double>(pr.errors) / pr.bits : 0.0;
        std::tie(rec.ci_lo, rec.ci_hi) = wilson_interval(pr.errors, pr.bits);
        rec.wallclock_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.ber.push_back(rec);
    }
    return res;
}

SweepRecord sweep_point(const ExperimentConfig& cfg, double theta1, double theta2, double theta3,
                        double snr, int threads) {
    StcCodeSpec spec = cfg.spec;
    spec.theta_init[0] = theta1;
    spec.theta_init[1] = theta2;
    if (spec.Lt >= 3) spec.theta_init[2] = theta3;
    const double N0 = snr_to_n0(snr, cfg.params);
    const auto pr = simulate_point(cfg.params, spec, N0, cfg.fading, cfg.coherence, cfg.Lr,
                                   cfg.seed, cfg.n_bits,
                                   0 /* no early stop: keep the grid comparable */, threads);
    SweepRecord rec;
    rec.theta1 = theta1;
    rec.theta2 = theta2;
    rec.bits_sent = pr.bits;
    rec.bit_errors = pr.errors;
    rec.ber = pr.bits > 0 ? static_cast<double>(pr.errors) / pr.bits : 0.0;
    std::tie(rec.ci_lo, rec.ci_hi) = wilson_interval(pr.errors, pr.bits);
    return rec;
}

ExperimentResult run_phase_sweep_1d(const ExperimentConfig& cfg, int threads) {
    ExperimentResult res;
    res.kind = ExperimentKind::PhaseSweep1D;
    const double snr = cfg.snr_grid_dB.empty() ? 12.5 : cfg.snr_grid_dB[0];
    const int n = static_cast<int>(std::lround(1.0 / cfg.phase_grid));
    for (int i = 0; i < n; ++i) {
        const double dtheta = i * cfg.phase_grid;
        res.sweep.push_back(sweep_point(cfg, 0.0, dtheta, 0.0, snr, threads));
    }
    return res;
}

ExperimentResult run_phase_sweep_2d(const ExperimentConfig& cfg, int threads) {
    ExperimentResult res;
    res.kind = ExperimentKind::PhaseSweep2D;
    const double snr = cfg.snr_grid_dB.empty() ? 13.0 : cfg.snr_grid_dB[0];
    const int n = static_cast<int>(std::lround(1.0 / cfg.phase_grid));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            res.sweep.push_back(
                sweep_point(cfg, i * cfg.phase_grid, j * cfg.phase_grid, 0.0, snr, threads));

    // Local minima over the 8-neighborhood with wraparound.
    auto ber_at = [&](int i, int j) {
        const int ii = (i % n + n) % n, jj = (j % n + n) % n;
        return res.sweep[static_cast<std::size_t>(ii) * n + jj].ber;
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double c = ber_at(i, j);
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    if (ber_at(i + di, j + dj) < c) { is_min = false; break; }
                }
            if (is_min) res.minima.push_back(res.sweep[static_cast<std::size_t>(i) * n + j]);
        }
    }
    std::sort(res.minima.begin(), res.minima.end(),
              [](const SweepRecord& a, const SweepRecord& b) { return a.ber < b.ber; });
    return res;
}

ExperimentResult run_psd_report(const ExperimentConfig& cfg, int /*threads*/) {
    ExperimentResult res;
    res.kind = ExperimentKind::PsdReport;
    const int bps = cfg.params.bits_per_symbol();
    long long n_sym = std::max<long long>(10000, cfg.n_bits / bps);
    n_sym -= n_sym % cfg.spec.Lt;

    Rng rng(derive_seed(cfg.seed, kTagData, 0));
    const auto alpha = cfg.params.alphabet();
    std::vector<double> symbols(static_cast<std::size_t>(n_sym));
    for (auto& v : symbols) v = alpha[rng.uniform_int(cfg.params.M)];

    const auto tx = encode_continuous(cfg.spec, cfg.params, symbols);
    const int seg = 256 * cfg.params.sps;
    for (const auto& w : tx) res.psd_per_antenna.push_back(welch_psd(w, seg, 0.5));
    res.psd_composite = combine_psd(res.psd_per_antenna);

    res.psd.bin_width = res.psd_per_antenna[0].bin_width();
    const double c0 = spectral_centroid(res.psd_per_antenna[0]);
    for (int m = 0; m < cfg.spec.Lt; ++m) {
        res.psd.centroid_shift.push_back(spectral_centroid(res.psd_per_antenna[m]) - c0);
        res.psd.expected_shift.push_back(static_cast<double>(m) /
                                         (cfg.spec.Lt * cfg.params.T));
    }
    res.psd.bw30_single = bandwidth_at(res.psd_per_antenna[0], -30.0);
    res.psd.bw30_composite = bandwidth_at(res.psd_composite, -30.0);
    // Extra -30 dB bandwidth the multi-antenna system needs, relative to
    // its total demand (the shift over the composite width).
    res.psd.expansion_ratio =
        res.psd.bw30_composite > 0.0
            ? (res.psd.bw30_composite - res.psd.bw30_single) / res.psd.bw30_composite
            : 0.0;
    return res;
}

ExperimentResult run_ortho_check(const ExperimentConfig& cfg, int /*threads*/) {
    ExperimentResult res;
    res.kind = ExperimentKind::OrthoCheck;

    CpmParams p = cfg.params;
    p.sps = cfg.params.sps * cfg.oversample;
    const int n_sym = ExperimentConfig::kBurstSymbols;
    const int blocks_per_burst = n_sym / cfg.spec.Lt;
    const int samples_per_block = cfg.spec.Lt * p.sps;
    // The first blocks of a burst see the zero-history pulse ramp-up and
    // are not yet L2-orthogonal; the guarantee is for steady state.
    const int head_skip =
        (cfg.params.gamma - 1 + cfg.spec.Lt - 1) / cfg.spec.Lt;
    const int usable = blocks_per_burst - head_skip - 1; // last block: no right endpoint
    if (usable <= 0) throw ConfigError("burst too short for ortho check");

    const auto alpha = cfg.params.alphabet();
    res.ortho.bound = 1e-6 * cfg.params.Es;
    int done = 0;
    std::uint64_t burst = 0;
    while (done < cfg.n_blocks) {
        Rng rng(derive_seed(cfg.seed, kTagData, burst));
        std::vector<double> symbols(static_cast<std::size_t>(n_sym));
        for (auto& v : symbols) v = alpha[rng.uniform_int(cfg.params.M)];
        const auto tx = encode_continuous(cfg.spec, p, symbols);
        for (int l = head_skip; l < blocks_per_burst - 1 && done < cfg.n_blocks; ++l, ++done) {
            const GramMatrix G = block_gram(tx, l, samples_per_block);
            OrthoRow row;
            row.block = done;
            row.offdiag_max = G.max_offdiag_abs();
            row.diag_dev_max = G.max_diag_dev(cfg.params.Es);
            res.ortho.max_offdiag = std::max(res.ortho.max_offdiag, row.offdiag_max);
            res.ortho.max_diag_dev = std::max(res.ortho.max_diag_dev, row.diag_dev_max);
            res.ortho.rows.push_back(row);
        }
        ++burst;
    }
    res.ortho.pass = res.ortho.max_offdiag < res.ortho.bound &&
                     res.ortho.max_diag_dev < res.ortho.bound;
    return res;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
    cfg.validate();
    switch (cfg.experiment) {
        case ExperimentKind::BerSweep: return run_ber_sweep(cfg, threads);
        case ExperimentKind::PhaseSweep1D: return run_phase_sweep_1d(cfg, threads);
        case ExperimentKind::PhaseSweep2D: return run_phase_sweep_2d(cfg, threads);
        case ExperimentKind::PsdReport: return run_psd_report(cfg, threads);
        case ExperimentKind::OrthoCheck: return run_ortho_check(cfg, threads);
    }
    throw ConfigError("unhandled experiment kind");
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

std::string render_csv(const ExperimentConfig& cfg, const ExperimentResult& res) {
    std::string out;
    out += std::string("# ") + kVersion + "\n";
    for (const auto& [k, v] : cfg.to_kv()) out += "# " + k + " = " + v + "\n";
    char buf[256];
    switch (res.kind) {
        case ExperimentKind::BerSweep:
            out += "snr_db,bits,errors,ber,ci_lo,ci_hi\n";
            for (const auto& r : res.ber) {
                std::snprintf(buf, sizeof buf, "%.10g,%lld,%lld,%.10e,%.10e,%.10e\n", r.snr_dB,
                              r.bits_sent, r.bit_errors, r.ber, r.ci_lo, r.ci_hi);
                out += buf;
            }
            break;
        case ExperimentKind::PhaseSweep1D:
        case ExperimentKind::PhaseSweep2D:
            out += "theta1,theta2,ber,ci_lo,ci_hi\n";
            for (const auto& r : res.sweep) {
                std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10e,%.10e,%.10e\n", r.theta1,
                              r.theta2, r.ber, r.ci_lo, r.ci_hi);
                out += buf;
            }
            break;
        case ExperimentKind::PsdReport: {
            out += "antenna,freq,power_db\n";
            for (std::size_t m = 0; m < res.psd_per_antenna.size(); ++m) {
                const auto& p = res.psd_per_antenna[m];
                for (std::size_t k = 0; k < p.freqs.size(); ++k) {
                    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.6f\n", m + 1, p.freqs[k],
                                  p.power_db[k]);
                    out += buf;
                }
            }
            break;
        }
        case ExperimentKind::OrthoCheck:
            out += "block,offdiag_max,diag_dev_max\n";
            for (const auto& r : res.ortho.rows) {
                std::snprintf(buf, sizeof buf, "%d,%.10e,%.10e\n", r.block, r.offdiag_max,
                              r.diag_dev_max);
                out += buf;
            }
            break;
    }
    return out;
}

std::string summary_json(const ExperimentConfig& cfg, const ExperimentResult& res) {
    json j;
    j["version"] = kVersion;
    json jc;
    for (const auto& [k, v] : cfg.to_kv()) jc[k] = v;
    j["config"] = jc;
    switch (res.kind) {
        case ExperimentKind::BerSweep: {
            json arr = json::array();
            for (const auto& r : res.ber)
                arr.push_back({{"snr_db", r.snr_dB},
                               {"bits", r.bits_sent},
                               {"errors", r.bit_errors},
                               {"ber", r.ber},
                               {"ci_lo", r.ci_lo},
                               {"ci_hi", r.ci_hi}});
            j["ber"] = arr;
            break;
        }
        case ExperimentKind::PhaseSweep1D:
        case ExperimentKind::PhaseSweep2D: {
            json arr = json::array();
            for (const auto& r : res.sweep)
                arr.push_back({{"theta1", r.theta1},
                               {"theta2", r.theta2},
                               {"ber", r.ber},
                               {"ci_lo", r.ci_lo},
                               {"ci_hi", r.ci_hi}});
            j["sweep"] = arr;
            json mins = json::array();
            for (const auto& r : res.minima)
                mins.push_back({{"theta1", r.theta1}, {"theta2", r.theta2}, {"ber", r.ber}});
            j["minima"] = mins;
            break;
        }
        case ExperimentKind::PsdReport: {
            j["psd"] = {{"centroid_shift", res.psd.centroid_shift},
                        {"expected_shift", res.psd.expected_shift},
                        {"bin_width", res.psd.bin_width},
                        {"bw30_single", res.psd.bw30_single},
                        {"bw30_composite", res.psd.bw30_composite},
                        {"expansion_ratio", res.psd.expansion_ratio}};
            break;
        }
        case ExperimentKind::OrthoCheck: {
            j["ortho"] = {{"max_offdiag", res.ortho.max_offdiag},
                          {"max_diag_dev", res.ortho.max_diag_dev},
                          {"bound", res.ortho.bound},
                          {"pass", res.ortho.pass},
                          {"blocks", res.ortho.rows.size()}};
            break;
        }
    }
    return j.dump(2);
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res,
                   const std::string& out_path) {
    const std::string path = out_path.empty() ? cfg.output_path : out_path;
    if (path.empty()) throw ConfigError("no output path configured");
    const auto dir = std::filesystem::path(path).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw ConfigError("cannot write output: " + path);
    csv << render_csv(cfg, res);
    csv.close();

    std::string jpath = path;
    const auto dot = jpath.rfind('.');
    if (dot != std::string::npos && jpath.substr(dot) == ".csv")
        jpath = jpath.substr(0, dot);
    jpath += ".json";
    std::ofstream js(jpath, std::ios::binary);
    if (!js) throw ConfigError("cannot write output: " + jpath);
    js << summary_json(cfg, res) << "\n";
}

} // namespace stccpm
