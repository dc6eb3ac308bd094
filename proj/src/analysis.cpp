#include "analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <Eigen/Dense>
#include <fftw3.h>

namespace stccpm {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
std::mutex fftw_plan_mutex; // FFTW planning is not thread-safe
} // namespace

double GramMatrix::max_offdiag_abs() const {
    double mx = 0.0;
    for (int m = 0; m < Lt; ++m)
        for (int mp = 0; mp < Lt; ++mp)
            if (m != mp) mx = std::max(mx, std::abs(at(m, mp)));
    return mx;
}

double GramMatrix::max_diag_dev(double target) const {
    double mx = 0.0;
    for (int m = 0; m < Lt; ++m) mx = std::max(mx, std::abs(at(m, m).real() - target));
    return mx;
}

GramMatrix block_gram(const std::vector<Waveform>& waveforms, int l, int samples_per_block) {
    const int Lt = static_cast<int>(waveforms.size());
    if (Lt == 0) throw InputError("no waveforms");
    const std::size_t S = static_cast<std::size_t>(samples_per_block);
    const std::size_t begin = static_cast<std::size_t>(l) * S;
    const std::size_t len = waveforms[0].size();
    if (begin + S > len) throw InputError("incomplete block");
    const bool have_right = begin + S < len;
    const double dt = 1.0 / waveforms[0].sample_rate;

    GramMatrix G;
    G.Lt = Lt;
    G.v.assign(static_cast<std::size_t>(Lt) * Lt, cplx{0.0, 0.0});
    for (int m = 0; m < Lt; ++m) {
        for (int mp = 0; mp < Lt; ++mp) {
            const auto& a = waveforms[m].samples;
            const auto& b = waveforms[mp].samples;
            cplx acc = 0.5 * a[begin] * std::conj(b[begin]);
            for (std::size_t k = 1; k < S; ++k) acc += a[begin + k] * std::conj(b[begin + k]);
            if (have_right)
                acc += 0.5 * a[begin + S] * std::conj(b[begin + S]);
            else
                acc += 0.5 * a[begin + S - 1] * std::conj(b[begin + S - 1]);
            G.v[static_cast<std::size_t>(m) * Lt + mp] = acc * dt;
        }
    }
    return G;
}

PsdEstimate welch_psd(const Waveform& w, int segment_len, double overlap) {
    if (segment_len < 8) throw InputError("degenerate Welch segment length");
    if (overlap < 0.0 || overlap >= 1.0) throw InputError("overlap must be in [0,1)");
    const std::size_t N = w.size();
    if (N < 2 * static_cast<std::size_t>(segment_len))
        throw InputError("waveform too short for Welch estimate (need >= 2 segments)");

    const int hop = std::max(1, static_cast<int>(std::lround(segment_len * (1.0 - overlap))));
    std::vector<double> win(segment_len);
    for (int k = 0; k < segment_len; ++k)
        win[k] = 0.5 * (1.0 - std::cos(kTwoPi * k / segment_len)); // periodic Hann

    std::vector<double> pow_acc(static_cast<std::size_t>(segment_len), 0.0);
    fftw_complex* buf;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        buf = fftw_alloc_complex(static_cast<std::size_t>(segment_len));
        plan = fftw_plan_dft_1d(segment_len, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t start = 0; start + segment_len <= N; start += hop) {
        for (int k = 0; k < segment_len; ++k) {
            const cplx v = w.samples[start + k] * win[k];
            buf[k][0] = v.real();
            buf[k][1] = v.imag();
        }
        fftw_execute(plan);
        for (int k = 0; k < segment_len; ++k)
            pow_acc[k] += buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1];
    }
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        fftw_destroy_plan(plan);
        fftw_free(buf);
    }

    // fftshift and normalize to 0 dB peak.
    PsdEstimate psd;
    psd.segment_len = segment_len;
    psd.overlap = overlap;
    psd.freqs.resize(segment_len);
    psd.power_db.resize(segment_len);
    const double fs = w.sample_rate;
    const int half = segment_len / 2;
    double peak = 0.0;
    for (double p : pow_acc) peak = std::max(peak, p);
    if (peak <= 0.0) peak = 1.0;
    for (int k = 0; k < segment_len; ++k) {
        const int src = (k + half) % segment_len; // shifted index
        psd.freqs[k] = (static_cast<double>(k) - half) * fs / segment_len;
        const double p = pow_acc[src] / peak;
        psd.power_db[k] = 10.0 * std::log10(std::max(p, 1e-300));
    }
    return psd;
}

double spectral_centroid(const PsdEstimate& psd) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
        const double p = std::pow(10.0, psd.power_db[k] / 10.0);
        num += psd.freqs[k] * p;
        den += p;
    }
    return den > 0.0 ? num / den : 0.0;
}

double bandwidth_at(const PsdEstimate& psd, double threshold_db) {
    std::size_t lo = psd.freqs.size(), hi = 0;
    for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
        if (psd.power_db[k] >= threshold_db) {
            lo = std::min(lo, k);
            hi = std::max(hi, k);
        }
    }
    if (lo > hi) return 0.0;
    return psd.freqs[hi] - psd.freqs[lo];
}

PsdEstimate combine_psd(const std::vector<PsdEstimate>& psds) {
    if (psds.empty()) throw InputError("no spectra to combine");
    PsdEstimate out = psds[0];
    std::vector<double> lin(out.power_db.size(), 0.0);
    for (const auto& p : psds) {
        if (p.power_db.size() != lin.size()) throw InputError("mismatched PSD grids");
        for (std::size_t k = 0; k < lin.size(); ++k)
            lin[k] += std::pow(10.0, p.power_db[k] / 10.0);
    }
    const double peak = *std::max_element(lin.begin(), lin.end());
    for (std::size_t k = 0; k < lin.size(); ++k)
        out.power_db[k] = 10.0 * std::log10(std::max(lin[k] / peak, 1e-300));
    return out;
}

double SignalMatrix::trace() const {
    double t = 0.0;
    for (int m = 0; m < Lt; ++m) t += at(m, m).real();
    return t;
}

SignalMatrix signal_matrix(const StcCodeSpec& spec, const CpmParams& params,
                           std::span<const double> d, std::span<const double> d_hat,
                           int oversample) {
    if (d.size() != d_hat.size()) throw InputError("sequence length mismatch");
    CpmParams p = params;
    p.sps = params.sps * std::max(1, oversample);
    const auto s = encode_continuous(spec, p, d);
    const auto s_hat = encode_continuous(spec, p, d_hat);
    const int Lt = spec.Lt;
    const double dt = 1.0 / s[0].sample_rate;
    const double norm = std::sqrt(static_cast<double>(Lt) * params.T / params.Es);

    SignalMatrix out;
    out.Lt = Lt;
    out.Cs.assign(static_cast<std::size_t>(Lt) * Lt, cplx{0.0, 0.0});
    const std::size_t len = s[0].size();
    std::vector<std::vector<cplx>> delta(Lt);
    for (int m = 0; m < Lt; ++m) {
        delta[m].resize(len);
        for (std::size_t k = 0; k < len; ++k)
            delta[m][k] = norm * (s[m].samples[k] - s_hat[m].samples[k]);
    }
    for (int m = 0; m < Lt; ++m)
        for (int mp = m; mp < Lt; ++mp) {
            cplx acc{0.0, 0.0};
            for (std::size_t k = 0; k < len; ++k) acc += delta[m][k] * std::conj(delta[mp][k]);
            acc *= dt;
            out.Cs[static_cast<std::size_t>(m) * Lt + mp] = acc;
            out.Cs[static_cast<std::size_t>(mp) * Lt + m] = std::conj(acc);
        }

    // Symmetrize (already Hermitian by construction) and eigen-decompose.
    Eigen::MatrixXcd C(Lt, Lt);
    for (int m = 0; m < Lt; ++m)
        for (int mp = 0; mp < Lt; ++mp) C(m, mp) = out.Cs[static_cast<std::size_t>(m) * Lt + mp];
    Eigen::MatrixXcd H = 0.5 * (C + C.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    out.eigenvalues.resize(Lt);
    for (int i = 0; i < Lt; ++i) out.eigenvalues[i] = es.eigenvalues()(Lt - 1 - i);
    const double scale = std::max(out.trace(), 1.0);
    for (auto& ev : out.eigenvalues) {
        if (ev < 0.0) {
            if (ev < -1e-9 * scale) throw std::logic_error("signal matrix far from PSD");
            out.clamp_removed += -ev;
            ev = 0.0;
        }
    }
    return out;
}

std::vector<cplx> correction_correlation(const StcCodeSpec& spec, const CpmParams& params, int Nc,
                                         const PhaseFn& weight, int oversample) {
    spec.validate(false);
    params.validate();
    const int Lt = spec.Lt;
    const int steps = Nc * params.sps * std::max(1, oversample);
    const double dt = Nc * params.T / static_cast<double>(steps);

    std::vector<cplx> out(static_cast<std::size_t>(Lt) * Lt, cplx{0.0, 0.0});
    std::vector<cplx> c(Lt);
    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        for (int m = 1; m <= Lt; ++m)
            c[m - 1] = std::polar(1.0, kTwoPi * correction_phase(spec, params, m, t, Nc));
        const double wgt = weight ? weight(t) : 1.0;
        for (int m = 0; m < Lt; ++m)
            for (int mp = 0; mp < Lt; ++mp)
                out[static_cast<std::size_t>(m) * Lt + mp] += wgt * c[m] * std::conj(c[mp]);
    }
    for (auto& v : out) v *= dt;
    return out;
}

double pwep(const SignalMatrix& Cs, const FadingMatrix& A, double N0) {
    if (N0 <= 0.0) throw InputError("pwep requires N0 > 0");
    if (A.Lt != Cs.Lt) throw InputError("fading/signal matrix size mismatch");
    double q = 0.0;
    for (int n = 0; n < A.Lr; ++n) {
        for (int m = 0; m < Cs.Lt; ++m)
            for (int mp = 0; mp < Cs.Lt; ++mp)
                q += (A.at(n, m) * Cs.at(m, mp) * std::conj(A.at(n, mp))).real();
    }
    q = std::max(q, 0.0);
    // Q(x) with x = sqrt(q / (2 N0)).
    return 0.5 * std::erfc(std::sqrt(q) / (2.0 * std::sqrt(N0)));
}

std::vector<ErrorEvent> make_error_event_set(const StcCodeSpec& spec, const CpmParams& params,
                                             std::uint64_t seed, int n_random) {
    const int Nc = 2 * spec.Lt * params.gamma;
    const auto alpha = params.alphabet();
    Rng rng(derive_seed(seed, 0xE7E7));

    std::vector<double> base(static_cast<std::size_t>(Nc));
    for (auto& v : base) v = alpha[rng.uniform_int(params.M)];

    std::vector<ErrorEvent> events;
    for (int pos = 0; pos < Nc; ++pos) {
        for (int a = 0; a < params.M; ++a) {
            if (std::abs(alpha[a] - base[pos]) < 1e-9) continue;
            ErrorEvent e;
            e.d = base;
            e.d_hat = base;
            e.d_hat[pos] = alpha[a];
            events.push_back(std::move(e));
        }
    }
    for (int k = 0; k < n_random; ++k) {
        ErrorEvent e;
        e.d.resize(Nc);
        for (auto& v : e.d) v = alpha[rng.uniform_int(params.M)];
        e.d_hat = e.d;
        const int i = static_cast<int>(rng.uniform_int(Nc));
        int j = static_cast<int>(rng.uniform_int(Nc - 1));
        if (j >= i) ++j;
        auto flip = [&](int pos) {
            int a;
            do {
                a = static_cast<int>(rng.uniform_int(params.M));
            } while (std::abs(alpha[a] - e.d[pos]) < 1e-9);
            e.d_hat[pos] = alpha[a];
        };
        flip(i);
        flip(j);
        events.push_back(std::move(e));
    }
    return events;
}

double coding_gain_metric(const StcCodeSpec& spec, const CpmParams& params,
                          const std::vector<ErrorEvent>& events) {
    if (events.empty()) throw InputError("empty error event set");
    double metric = std::numeric_limits<double>::infinity();
    for (const auto& e : events) {
        const SignalMatrix S = signal_matrix(spec, params, e.d, e.d_hat);
        const double lmax = S.eigenvalues.empty() ? 0.0 : S.eigenvalues.front();
        double prod = 1.0;
        bool any = false;
        for (double ev : S.eigenvalues) {
            if (ev > 1e-9 * std::max(lmax, 1e-30)) {
                prod *= ev;
                any = true;
            }
        }
        if (!any) prod = 0.0;
        metric = std::min(metric, prod);
    }
    return metric;
}

} // namespace stccpm
