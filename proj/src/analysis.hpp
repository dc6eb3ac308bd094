#ifndef STCCPM_ANALYSIS_HPP
#define STCCPM_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "channel.hpp"
#include "stc_code.hpp"
#include "waveform.hpp"

namespace stccpm {

// Hermitian Lt x Lt matrix of block correlations
// entry(m,m') = integral over the block of s_m(t) conj(s_m'(t)) dt.
struct GramMatrix {
    int Lt = 0;
    std::vector<cplx> v; // row-major

    cplx at(int m, int mp) const { return v[static_cast<std::size_t>(m) * Lt + mp]; }
    double max_offdiag_abs() const;
    double max_diag_dev(double target) const;
};

// Trapezoidal integration over block l (samples [l*S, (l+1)*S]); when the
// right endpoint sample does not exist the last interval degenerates to a
// left sum.
GramMatrix block_gram(const std::vector<Waveform>& waveforms, int l, int samples_per_block);

struct PsdEstimate {
    std::vector<double> freqs;    // Hz, symmetric around 0
    std::vector<double> power_db; // relative to peak (peak = 0 dB)
    int segment_len = 0;
    double overlap = 0.5;
    std::string window = "hann";

    double bin_width() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
};

// Averaged windowed periodograms (Hann, fractional overlap), normalized
// to 0 dB peak.
PsdEstimate welch_psd(const Waveform& w, int segment_len, double overlap);

// First moment of the linear power spectrum.
double spectral_centroid(const PsdEstimate& psd);

// Width between the outermost bins with power >= threshold_db.
double bandwidth_at(const PsdEstimate& psd, double threshold_db);

// Sum of per-antenna spectra (linear), renormalized to 0 dB peak.
PsdEstimate combine_psd(const std::vector<PsdEstimate>& psds);

// Signal matrix C_s of the normalized difference between the transmit
// signal sets of two data sequences, with its eigen-decomposition.
struct SignalMatrix {
    int Lt = 0;
    std::vector<cplx> Cs;            // row-major, Hermitian PSD
    std::vector<double> eigenvalues; // sorted descending, >= 0
    double clamp_removed = 0.0;      // total negative mass clipped to 0

    cplx at(int m, int mp) const { return Cs[static_cast<std::size_t>(m) * Lt + mp]; }
    double trace() const;
    double min_eigenvalue() const { return eigenvalues.empty() ? 0.0 : eigenvalues.back(); }
};

SignalMatrix signal_matrix(const StcCodeSpec& spec, const CpmParams& params,
                           std::span<const double> d, std::span<const double> d_hat,
                           int oversample = 4);

// Elementwise integral of c(t) c^H(t) (optionally weighted) over
// [0, Nc*T], where c_m(t) = exp(j*2*pi*correction_phase_m(t)).
std::vector<cplx> correction_correlation(const StcCodeSpec& spec, const CpmParams& params, int Nc,
                                         const PhaseFn& weight = nullptr, int oversample = 4);

// Pairwise error probability Q(sqrt(sum_n a_n C_s a_n^H / (2 N0))).
double pwep(const SignalMatrix& Cs, const FadingMatrix& A, double N0);

// One pairwise error event.
struct ErrorEvent {
    std::vector<double> d;
    std::vector<double> d_hat;
};

// All single-symbol substitutions over Nc = 2*Lt*gamma symbols plus
// seeded random two-symbol events.
std::vector<ErrorEvent> make_error_event_set(const StcCodeSpec& spec, const CpmParams& params,
                                             std::uint64_t seed, int n_random = 200);

// min over events of the product of the nonzero eigenvalues of C_s.
double coding_gain_metric(const StcCodeSpec& spec, const CpmParams& params,
                          const std::vector<ErrorEvent>& events);

} // namespace stccpm

#endif
