#ifndef STCCPM_STC_CODE_HPP
#define STCCPM_STC_CODE_HPP

#include <span>
#include <string>
#include <vector>

#include "cpm_core.hpp"

namespace stccpm {

enum class Correction { None, LinPC, OffPC };

inline const char* correction_name(Correction c) {
    switch (c) {
        case Correction::None: return "none";
        case Correction::LinPC: return "linPC";
        case Correction::OffPC: return "offPC";
    }
    return "?";
}

Correction correction_from_name(const std::string& s);

// Space-time code configuration: antenna count, correction-factor family
// and the per-antenna initial phases theta_m(1) in cycles.
struct StcCodeSpec {
    int Lt = 2;
    Correction correction = Correction::LinPC;
    std::vector<double> theta_init; // length Lt, cycles in [0,1)

    // strict: reject correction=none with Lt > 1 (breaks orthogonality).
    // The ortho checker deliberately runs that invalid combination.
    void validate(bool strict = true) const;

    double amplitude(const CpmParams& params) const; // sqrt(Es/(Lt*T))
};

// Parallel mapping: entry (antenna m, slot r, pulse index i) of block l
// carries data symbol d_{Lt*l + r - i + 1} (1-based indices throughout,
// matching the block notation). Independent of m.
// Indices before the sequence start resolve to the zero-history symbol
// and are reported via the `from_history` flag.
int map_symbol_index(int Lt, int l, int r, int i);
double map_symbol(std::span<const double> data, int Lt, int l, int r, int i);

// Per-antenna correction phase in cycles at time t (continuous form):
//   m = 1        -> 0
//   linPC        -> (m-1) * t / (Lt*T)
//   offPC        -> (m-1)/Lt * sum_i 2 q(t - i*T) over started data pulses
// Antenna index m is 1-based.
double correction_phase(const StcCodeSpec& spec, const CpmParams& params, int m, double t,
                        int n_symbols);

// Offset alphabet for antenna m (1-based): data alphabet shifted by
// 2*(m-1)/(Lt*h).
std::vector<double> offset_alphabet(const StcCodeSpec& spec, const CpmParams& params, int m);

// One slot of the block structure, for inspection and tests.
struct CodeSlot {
    int antenna = 1;             // m, 1-based
    int slot = 1;                // r, 1-based
    int block = 0;               // l, 0-based
    double theta_start = 0.0;    // phase memory theta_m(Lt*l + r), cycles
    std::vector<double> symbols; // d_{m,r}^{(l,i)} for i = 1..gamma (0 = history)
};

struct CodeBlock {
    int l = 0;
    std::vector<CodeSlot> slots; // Lt*Lt entries, antenna-major
};

// Continuous-time synthesis (the normative signal definition): every
// antenna modulates the same data with its correction phase and initial
// phase. Data symbols come from the base alphabet; N_c must be a
// multiple of Lt.
std::vector<Waveform> encode_continuous(const StcCodeSpec& spec, const CpmParams& params,
                                        std::span<const double> data);

// Block-wise synthesis: slot-local phase functions plus a per-antenna
// phase memory updated at every slot boundary so the emitted phase is
// continuous. Must agree with encode_continuous to ~1e-10 per sample.
struct BlockwiseResult {
    std::vector<CodeBlock> blocks;
    std::vector<Waveform> waveforms;
};
BlockwiseResult encode_blockwise(const StcCodeSpec& spec, const CpmParams& params,
                                 std::span<const double> data);

} // namespace stccpm

#endif
