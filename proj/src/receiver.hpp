#ifndef STCCPM_RECEIVER_HPP
#define STCCPM_RECEIVER_HPP

#include <cstdint>
#include <vector>

#include "channel.hpp"
#include "cpm_core.hpp"
#include "stc_code.hpp"
#include "waveform.hpp"

namespace stccpm {

// Joint phase/data trellis for coherent MLSD of the parallel-coded CPM
// signal. Because all antennas modulate the same data, one data trellis
// carries the branch waveforms of every antenna simultaneously. The
// correction factors are periodically time-varying, so branch segments
// depend on the slot position r = k mod Lt.
struct Trellis {
    CpmParams params;
    StcCodeSpec spec;

    std::vector<Rational> phases; // accumulated-phase states, exact rationals
    int n_phase = 0;
    int n_hist = 0;   // M^(gamma-1)
    int n_states = 0; // n_phase * n_hist
    int n_shapes = 0; // M^gamma branch shapes per slot class

    std::vector<cplx> phase_rot; // exp(j*2*pi*phases[p])
    std::vector<int> phase_step; // [p*M + leaving_symbol_idx] -> next p

    // Branch shape samples, amplitude included:
    // shapes[(((r*n_shapes)+b)*Lt + m)*sps + s], b = hist_idx*M + input_idx
    std::vector<cplx> shapes;
    // Cross-gram of the shapes of one branch (trapezoid-free plain sum * dt):
    // gram[(((r*n_shapes)+b)*Lt + m)*Lt + mp] = sum_s shape_m[s] conj(shape_mp[s]) dt
    std::vector<cplx> gram;

    const cplx* shape(int r, int b, int m) const {
        return &shapes[((static_cast<std::size_t>(r) * n_shapes + b) * spec.Lt + m) *
                       params.sps];
    }
    const cplx* branch_gram(int r, int b) const {
        return &gram[(static_cast<std::size_t>(r) * n_shapes + b) * spec.Lt * spec.Lt];
    }
};

Trellis build_trellis(const CpmParams& params, const StcCodeSpec& spec);

// One trellis state unpacked: accumulated phase (exact rational, mod 1)
// plus the gamma-1 most recent data symbols, newest first.
struct PhaseState {
    Rational theta;
    std::vector<int> history;
};
PhaseState trellis_state(const Trellis& tr, int state_index);

struct DetectionResult {
    std::vector<double> symbols;      // detected sequence (alphabet values)
    std::vector<std::uint8_t> bits;   // Gray-decoded bits
    double path_metric = 0.0;         // integral |r - s_hat|^2 dt over the burst
};

// Coherent MLSD with perfect knowledge of the per-block fading. Ties are
// broken toward the sequence with the smaller symbol at the first
// differing slot.
DetectionResult mlsd_detect(const std::vector<Waveform>& received, const ChannelRealization& ch,
                            const Trellis& trellis);

// Reflected-binary Gray code over the ordered alphabet (-M+1 ... M-1).
int gray_index_from_bits(const std::uint8_t* bits, int bits_per_symbol);
void gray_bits_from_index(int index, int bits_per_symbol, std::uint8_t* bits);

std::vector<double> gray_bits_to_symbols(const std::vector<std::uint8_t>& bits, const CpmParams& params);
std::vector<std::uint8_t> gray_symbols_to_bits(const std::vector<double>& symbols, const CpmParams& params);

} // namespace stccpm

#endif
