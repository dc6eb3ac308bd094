#ifndef STCCPM_CHANNEL_HPP
#define STCCPM_CHANNEL_HPP

#include <vector>

#include "cpm_params.hpp"
#include "rng.hpp"
#include "stc_code.hpp"
#include "waveform.hpp"

namespace stccpm {

// Row-major Lr x Lt complex fading matrix.
struct FadingMatrix {
    int Lr = 1;
    int Lt = 1;
    std::vector<cplx> a; // a[n*Lt + m]

    cplx& at(int n, int m) { return a[static_cast<std::size_t>(n) * Lt + m]; }
    const cplx& at(int n, int m) const { return a[static_cast<std::size_t>(n) * Lt + m]; }
};

// How the per-block coefficients are drawn:
//   PerAntenna -> i.i.d. CN(0,1) per (receive, transmit) pair
//   Common     -> one CN(0,1) scalar per receive antenna, shared by all
//                 transmit antennas (co-located transmit array seen
//                 through a single path). The phase-sweep benchmark
//                 presets use this mode; see README.
enum class FadingMode { PerAntenna, Common };

FadingMode fading_mode_from_name(const std::string& s);
const char* fading_mode_name(FadingMode m);

// One channel realization: per-block fading plus the noise level.
// block_len is the coherence length in code blocks (1 = re-drawn every
// block of Lt*T seconds).
struct ChannelRealization {
    std::vector<FadingMatrix> per_block;
    int block_len = 1;
    double N0 = 0.0;

    const FadingMatrix& block(int l) const {
        const std::size_t idx = static_cast<std::size_t>(l / block_len);
        return per_block[idx < per_block.size() ? idx : per_block.size() - 1];
    }
};

// i.i.d. CN(0,1) entries, deterministic given the stream state.
FadingMatrix sample_fading(int Lt, int Lr, Rng& rng);

// Common-mode: rank-one rows, one scalar per receive antenna.
FadingMatrix sample_fading_common(int Lt, int Lr, Rng& rng);

// Draw per-block fading for a burst of n_blocks code blocks.
ChannelRealization make_block_fading(int Lt, int Lr, int n_blocks, double N0, FadingMode mode,
                                     Rng& rng);

// Apply a fixed fading matrix and AWGN:
//   r_n(t) = sum_m a_{n,m} s_m(t) + w_n(t)
// Complex noise per sample has variance N0 * sps / T = N0 / dt, the
// discretization of white noise with E[w(t)w*(t')] = N0 delta(t-t').
std::vector<Waveform> transmit_static(const std::vector<Waveform>& tx, const FadingMatrix& A,
                                      double N0, Rng& rng);

// Same, with the fading switching per code block of Lt*T seconds.
std::vector<Waveform> transmit(const std::vector<Waveform>& tx, const ChannelRealization& ch,
                               int Lt, double T, Rng& rng);

// Eb/N0 in dB -> N0, with Eb = Es / log2(M). Es is the total transmitted
// energy per symbol period summed over antennas.
double snr_to_n0(double EbN0_dB, const CpmParams& params);

} // namespace stccpm

#endif
