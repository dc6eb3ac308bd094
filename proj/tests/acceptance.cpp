// Acceptance suite: one pass/fail line per criterion.
//
// Criteria 6 and 7 run the desk-scale variants (grid 0.05, 5e4 bits per
// point) by default; set STCCPM_ACCEPT_FULL=1 for the full-scale variant
// of criterion 6 (grid 0.01, 2e5 bits per point, +-0.03 tolerance).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "experiments.hpp"

using namespace stccpm;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int criterion, bool pass, const std::string& what, double seconds) {
    std::printf("[%s] criterion %2d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

CpmParams bench_params(PulseShape pulse = PulseShape::REC) {
    CpmParams p;
    p.M = 4;
    p.h = {1, 2};
    p.gamma = 2;
    p.pulse = pulse;
    p.sps = 12;
    return p;
}

StcCodeSpec make_spec(int Lt, Correction c, std::vector<double> theta = {}) {
    StcCodeSpec s;
    s.Lt = Lt;
    s.correction = c;
    if (theta.empty()) theta.assign(Lt, 0.0);
    s.theta_init = std::move(theta);
    return s;
}

std::vector<double> rand_symbols(const CpmParams& p, int n, Rng& rng) {
    const auto alpha = p.alphabet();
    std::vector<double> d(n);
    for (auto& v : d) v = alpha[rng.uniform_int(p.M)];
    return d;
}

// ---- criterion 1: block orthogonality --------------------------------------
void criterion_1() {
    Timer t;
    bool pass = true;
    char detail[256] = "";
    double worst_off = 0.0, worst_diag = 0.0;
    for (auto pulse : {PulseShape::REC, PulseShape::RC}) {
        for (int Lt : {2, 3}) {
            for (auto corr : {Correction::LinPC, Correction::OffPC}) {
                ExperimentConfig cfg;
                cfg.experiment = ExperimentKind::OrthoCheck;
                cfg.params = bench_params(pulse);
                cfg.spec = make_spec(Lt, corr);
                cfg.n_blocks = 1000;
                cfg.oversample = 4;
                cfg.seed = 101;
                const auto res = run_experiment(cfg, 1);
                worst_off = std::max(worst_off, res.ortho.max_offdiag);
                worst_diag = std::max(worst_diag, res.ortho.max_diag_dev);
                if (!res.ortho.pass) pass = false;
            }
        }
    }
    std::snprintf(detail, sizeof detail,
                  "orthogonality over 1000 blocks x 8 variants: max offdiag %.2e, max diag dev "
                  "%.2e (bound 1e-6)",
                  worst_off, worst_diag);
    report(1, pass, detail, t.elapsed());
}

// ---- criterion 2: blockwise/continuous equivalence -------------------------
void criterion_2() {
    Timer t;
    double worst = 0.0;
    Rng rng(202);
    for (auto pulse : {PulseShape::REC, PulseShape::RC}) {
        for (int Lt : {2, 3}) {
            for (auto corr : {Correction::LinPC, Correction::OffPC}) {
                const auto p = bench_params(pulse);
                const auto s = make_spec(Lt, corr);
                for (int burst = 0; burst < 128; ++burst) {
                    const auto data = rand_symbols(p, 120, rng);
                    const auto cont = encode_continuous(s, p, data);
                    const auto blk = encode_blockwise(s, p, data);
                    for (int m = 0; m < Lt; ++m)
                        for (std::size_t k = 0; k < cont[m].size(); ++k)
                            worst = std::max(worst, std::abs(cont[m].samples[k] -
                                                             blk.waveforms[m].samples[k]));
                }
            }
        }
    }
    char detail[192];
    std::snprintf(detail, sizeof detail,
                  "blockwise vs continuous synthesis over 1024 bursts x 120 symbols: max "
                  "deviation %.2e (bound 1e-10)",
                  worst);
    report(2, worst < 1e-10, detail, t.elapsed());
}

// ---- criterion 3: MLSD equals exhaustive search -----------------------------
void criterion_3() {
    Timer t;
    CpmParams p = bench_params();
    p.M = 2;
    const auto alpha = p.alphabet();
    int total = 0, agree = 0;
    struct Cfg {
        int Lt;
        Correction corr;
        PulseShape pulse;
    };
    const std::vector<Cfg> cfgs{{1, Correction::None, PulseShape::REC},
                                {2, Correction::LinPC, PulseShape::REC},
                                {2, Correction::OffPC, PulseShape::REC},
                                {2, Correction::LinPC, PulseShape::RC},
                                {2, Correction::OffPC, PulseShape::RC}};
    for (const auto& c : cfgs) {
        p.pulse = c.pulse;
        const auto spec = make_spec(c.Lt, c.corr, c.Lt == 2 ? std::vector<double>{0.0, 0.13}
                                                            : std::vector<double>{0.0});
        const auto tr = build_trellis(p, spec);
        for (int trial = 0; trial < 100; ++trial) {
            Rng rd(derive_seed(303, 1, trial)), rf(derive_seed(303, 2, trial)),
                rn(derive_seed(303, 3, trial));
            const auto data = rand_symbols(p, 4, rd);
            const auto tx = encode_continuous(spec, p, data);
            auto ch = make_block_fading(c.Lt, 1, 4 / c.Lt, 0.35, FadingMode::Common, rf);
            const auto rx = transmit(tx, ch, c.Lt, p.T, rn);

            // Exhaustive argmin over all 2^4 sequences, metric computed by
            // direct re-encoding (independent of the Viterbi).
            double best = 1e300;
            std::vector<double> best_seq;
            for (int mask = 0; mask < 16; ++mask) {
                std::vector<double> cand(4);
                for (int i = 0; i < 4; ++i) cand[i] = alpha[(mask >> i) & 1];
                const auto y = encode_continuous(spec, p, cand);
                double metric = 0.0;
                const std::size_t spb = static_cast<std::size_t>(c.Lt) * p.sps;
                for (std::size_t k = 0; k < rx[0].size(); ++k) {
                    const auto& A = ch.block(static_cast<int>(k / spb));
                    cplx v{0.0, 0.0};
                    for (int m = 0; m < c.Lt; ++m) v += A.at(0, m) * y[m].samples[k];
                    metric += std::norm(rx[0].samples[k] - v);
                }
                if (metric < best) {
                    best = metric;
                    best_seq = cand;
                }
            }
            const auto det = mlsd_detect(rx, ch, tr);
            ++total;
            if (std::equal(best_seq.begin(), best_seq.end(), det.symbols.begin())) ++agree;
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "Viterbi equals exhaustive argmin in %d/%d noisy trials (M=2, N_c=4)", agree,
                  total);
    report(3, agree == total, detail, t.elapsed());
}

// ---- criterion 4: frequency shift and bandwidth expansion -------------------
void criterion_4() {
    Timer t;
    bool pass = true;
    std::string detail = "PSD:";
    for (int Lt : {2, 3}) {
        ExperimentConfig cfg = preset_config("fig2_psd");
        cfg.spec = make_spec(Lt, Correction::LinPC);
        cfg.n_bits = 24000;
        const auto res = run_experiment(cfg, 1);
        for (int m = 1; m < Lt; ++m) {
            const double err =
                std::abs(res.psd.centroid_shift[m] - res.psd.expected_shift[m]);
            if (err > 2.0 * res.psd.bin_width) pass = false;
        }
        char b[96];
        std::snprintf(b, sizeof b, " %dTx shift ok to %.2f bins;", Lt,
                      std::abs(res.psd.centroid_shift[Lt - 1] -
                               res.psd.expected_shift[Lt - 1]) /
                          res.psd.bin_width);
        detail += b;
        if (Lt == 3) {
            char c[72];
            std::snprintf(c, sizeof c, " expansion ratio %.3f (0.133 +- 0.05)",
                          res.psd.expansion_ratio);
            detail += c;
            if (std::abs(res.psd.expansion_ratio - 0.133) > 0.05) pass = false;
        }
    }
    report(4, pass, detail, t.elapsed());
}

// ---- criterion 5: full diversity of single-symbol events --------------------
void criterion_5() {
    Timer t;
    bool pass = true;
    double worst_ratio = 1e300;
    const auto p = bench_params();
    const auto alpha = p.alphabet();
    Rng rng(505);
    for (int Lt : {2, 3}) {
        for (auto corr : {Correction::LinPC, Correction::OffPC}) {
            const auto s = make_spec(Lt, corr);
            const int Nc = 2 * Lt * p.gamma;
            const auto d = rand_symbols(p, Nc, rng);
            for (int pos = 0; pos < Nc; ++pos) {
                for (int a = 0; a < p.M; ++a) {
                    if (std::abs(alpha[a] - d[pos]) < 1e-9) continue;
                    auto dh = d;
                    dh[pos] = alpha[a];
                    const auto S = signal_matrix(s, p, d, dh);
                    const double ratio = S.min_eigenvalue() / std::max(S.trace(), 1e-30);
                    worst_ratio = std::min(worst_ratio, ratio);
                    if (S.min_eigenvalue() <= 0.0) pass = false;
                }
            }
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "min eigenvalue of C_s > 0 for all single-symbol events; worst "
                  "lambda_min/trace = %.2e",
                  worst_ratio);
    report(5, pass, detail, t.elapsed());
}

// ---- criterion 6: 2 Tx phase sweep ------------------------------------------
struct Minima {
    double primary = -1.0, secondary = -1.0, spacing = -1.0;
};

Minima sweep_minima(const std::vector<SweepRecord>& rows) {
    const int n = static_cast<int>(rows.size());
    auto circ = [&](int i) { return rows[(i % n + n) % n].ber; };
    // global minimum
    int imin = 0;
    for (int i = 1; i < n; ++i)
        if (rows[i].ber < rows[imin].ber) imin = i;
    // best local minimum at circular distance > n/4 grid steps
    int isec = -1;
    for (int i = 0; i < n; ++i) {
        if (circ(i) <= circ(i - 1) && circ(i) <= circ(i + 1)) {
            int dist = std::abs(i - imin);
            dist = std::min(dist, n - dist);
            if (dist > n / 4 && (isec < 0 || rows[i].ber < rows[isec].ber)) isec = i;
        }
    }
    Minima m;
    m.primary = rows[imin].theta2;
    if (isec >= 0) {
        m.secondary = rows[isec].theta2;
        double d = std::abs(m.secondary - m.primary);
        m.spacing = std::min(d, 1.0 - d);
    }
    return m;
}

void criterion_6() {
    Timer t;
    const bool full = std::getenv("STCCPM_ACCEPT_FULL") != nullptr;
    const double tol = full ? 0.03 : 0.05;

    ExperimentConfig lin = preset_config(full ? "fig3_sweep2tx_fine" : "fig3_sweep2tx");
    ExperimentConfig off = preset_config(full ? "fig3_sweep2tx_offpc_fine" : "fig3_sweep2tx_offpc");
    const auto rlin = run_experiment(lin, 1);
    const auto roff = run_experiment(off, 1);
    const Minima ml = sweep_minima(rlin.sweep);
    const Minima mo = sweep_minima(roff.sweep);

    auto circ_dist = [](double a, double b) {
        double d = std::abs(a - b);
        return std::min(d, 1.0 - d);
    };
    const bool lin_ok = circ_dist(ml.primary, 0.19) <= tol + 1e-9;
    const bool off_ok = circ_dist(mo.primary, 0.40) <= tol + 1e-9;
    const bool spacing_ok = ml.spacing > 0 && std::abs(ml.spacing - 0.5) <= 0.05 + 1e-9;

    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "%s sweep at 12.5 dB: linPC argmin %.2f (target 0.19 +- %.2f: %s), offPC "
                  "argmin %.2f (target 0.40 +- %.2f: %s), minima spacing %.2f (0.5 +- 0.05: %s)",
                  full ? "full-scale" : "desk-scale", ml.primary, tol, lin_ok ? "ok" : "MISS",
                  mo.primary, tol, off_ok ? "ok" : "MISS", ml.spacing,
                  spacing_ok ? "ok" : "MISS");
    report(6, lin_ok && off_ok && spacing_ok, detail, t.elapsed());
}

// ---- criterion 7: 3 Tx minima vs the reference table ------------------------
bool has_local_min_near(const std::vector<SweepRecord>& minima, double t1, double t2,
                        double step) {
    for (const auto& r : minima) {
        auto circ = [](double a, double b) {
            double d = std::abs(a - b);
            return std::min(d, 1.0 - d);
        };
        if (circ(r.theta1, t1) <= step + 1e-9 && circ(r.theta2, t2) <= step + 1e-9) return true;
    }
    return false;
}

void criterion_7() {
    Timer t;
    ExperimentConfig off = preset_config("fig4_sweep3tx_a");  // offPC 2REC
    ExperimentConfig lin = preset_config("fig4_sweep3tx_c");  // linPC 2REC
    const auto roff = run_experiment(off, 1);
    const auto rlin = run_experiment(lin, 1);
    const bool off_ok = has_local_min_near(roff.minima, 0.10, 0.45, off.phase_grid);
    const bool lin_ok = has_local_min_near(rlin.minima, 0.40, 0.15, lin.phase_grid);
    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "3 Tx coarse sweep at 13 dB: offPC local min near (0.10,0.45): %s "
                  "[best (%.2f,%.2f)]; linPC local min near (0.40,0.15): %s [best (%.2f,%.2f)]",
                  off_ok ? "found" : "MISS", roff.minima.empty() ? -1 : roff.minima[0].theta1,
                  roff.minima.empty() ? -1 : roff.minima[0].theta2, lin_ok ? "found" : "MISS",
                  rlin.minima.empty() ? -1 : rlin.minima[0].theta1,
                  rlin.minima.empty() ? -1 : rlin.minima[0].theta2);
    report(7, off_ok && lin_ok, detail, t.elapsed());
}

// ---- criteria 8 and 9: coding gain and diversity slopes ----------------------
double snr_at_ber(const std::vector<BerRecord>& curve, double target) {
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].ber <= target && curve[i - 1].ber > target && curve[i].ber > 0.0) {
            const double l0 = std::log10(curve[i - 1].ber);
            const double l1 = std::log10(curve[i].ber);
            const double lt = std::log10(target);
            return curve[i - 1].snr_dB + (curve[i].snr_dB - curve[i - 1].snr_dB) *
                                             (l0 - lt) / (l0 - l1);
        }
    }
    return std::nan("");
}

// dB of SNR per decade of BER, least squares over the top two measured
// decades (points with at least 100 errors).
double fit_slope(const std::vector<BerRecord>& curve) {
    std::vector<std::pair<double, double>> pts; // (-log10 ber, snr)
    double blo = 1.0;
    for (const auto& r : curve)
        if (r.bit_errors >= 100 && r.ber > 0.0) blo = std::min(blo, r.ber);
    const double bhi = std::min(blo * 100.0, 5e-2);
    for (const auto& r : curve)
        if (r.bit_errors >= 100 && r.ber >= blo && r.ber <= bhi)
            pts.emplace_back(-std::log10(r.ber), r.snr_dB);
    if (pts.size() < 3) return std::nan("");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void criteria_8_and_9() {
    Timer t;
    const auto run = [](const char* preset) {
        ExperimentConfig cfg = preset_config(preset);
        return run_experiment(cfg, 1).ber;
    };
    const auto opt2 = run("fig5_ber_2tx_linpc_opt");
    const auto non2 = run("fig5_ber_2tx_nonopt");
    const auto opt3 = run("fig5_ber_3tx_offpc_opt");
    const auto non3 = run("fig5_ber_3tx_nonopt");

    const double gap2 = snr_at_ber(non2, 1e-3) - snr_at_ber(opt2, 1e-3);
    const double gap3 = snr_at_ber(non3, 1e-3) - snr_at_ber(opt3, 1e-3);

    // Wilson separation at the shared SNR nearest each nonopt 1e-3 crossing.
    auto separated = [](const std::vector<BerRecord>& opt, const std::vector<BerRecord>& non) {
        const double s = snr_at_ber(non, 1e-3);
        if (std::isnan(s)) return false;
        const BerRecord* bo = nullptr;
        const BerRecord* bn = nullptr;
        for (const auto& r : non)
            if (!bn || std::abs(r.snr_dB - s) < std::abs(bn->snr_dB - s)) bn = &r;
        for (const auto& r : opt)
            if (std::abs(r.snr_dB - bn->snr_dB) < 1e-9) bo = &r;
        if (!bo || !bn) return false;
        return bo->ci_hi < bn->ci_lo;
    };
    const bool sep2 = separated(opt2, non2);
    const bool sep3 = separated(opt3, non3);

    const bool pass8 = !std::isnan(gap2) && std::abs(gap2 - 5.0) <= 1.5 && sep2 &&
                       !std::isnan(gap3) && std::abs(gap3 - 7.0) <= 2.0 && sep3;
    char d8[256];
    std::snprintf(d8, sizeof d8,
                  "coding gain at BER 1e-3: 2Tx gap %.2f dB (5 +- 1.5), Wilson separated: %s; "
                  "3Tx gap %.2f dB (7 +- 2), separated: %s",
                  gap2, sep2 ? "yes" : "NO", gap3, sep3 ? "yes" : "NO");
    report(8, pass8, d8, t.elapsed());

    Timer t9;
    const double slope2 = fit_slope(opt2);
    const double slope3 = fit_slope(opt3);
    const bool pass9 = !std::isnan(slope2) && std::abs(slope2 - 5.0) <= 1.0 &&
                       !std::isnan(slope3) && std::abs(slope3 - 3.5) <= 1.0;
    char d9[192];
    std::snprintf(d9, sizeof d9,
                  "high-SNR decay over the top two decades: 2Tx %.2f dB/dec (5 +- 1), 3Tx %.2f "
                  "dB/dec (3.5 +- 1)",
                  slope2, slope3);
    report(9, pass9, d9, t9.elapsed());
}

// ---- criterion 10: deterministic outputs -------------------------------------
void criterion_10() {
    Timer t;
    bool pass = true;
    for (const char* name : {"ortho_check", "fig2_psd"}) {
        ExperimentConfig cfg = preset_config(name);
        const auto r1 = run_experiment(cfg, 1);
        const auto r2 = run_experiment(cfg, 2);
        if (render_csv(cfg, r1) != render_csv(cfg, r2)) pass = false;
        if (summary_json(cfg, r1) != summary_json(cfg, r2)) pass = false;
    }
    report(10, pass,
           "byte-identical CSV and JSON for repeated preset runs with identical seed "
           "(independent of thread count)",
           t.elapsed());
}

} // namespace

int main() {
    std::printf("stccpm acceptance suite (%s)\n", kVersion);
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criteria_8_and_9();
    criterion_10();
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
