#include "receiver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stccpm {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

int ipow(int base, int exp) {
    int r = 1;
    while (exp-- > 0) r *= base;
    return r;
}
} // namespace

Trellis build_trellis(const CpmParams& params, const StcCodeSpec& spec) {
    params.validate();
    spec.validate(false);

    Trellis tr;
    tr.params = params;
    tr.spec = spec;
    tr.phases = phase_state_set(params);
    tr.n_phase = static_cast<int>(tr.phases.size());
    tr.n_hist = ipow(params.M, params.gamma - 1);
    tr.n_states = tr.n_phase * tr.n_hist;
    tr.n_shapes = ipow(params.M, params.gamma);

    tr.phase_rot.resize(tr.n_phase);
    for (int p = 0; p < tr.n_phase; ++p)
        tr.phase_rot[p] = std::polar(1.0, kTwoPi * tr.phases[p].to_double());

    const auto alpha = params.alphabet();
    tr.phase_step.assign(static_cast<std::size_t>(tr.n_phase) * params.M, -1);
    for (int p = 0; p < tr.n_phase; ++p) {
        for (int a = 0; a < params.M; ++a) {
            const Rational next = (tr.phases[p] + params.h * Rational(alpha[a], 2)).mod1();
            const auto it = std::lower_bound(tr.phases.begin(), tr.phases.end(), next);
            if (it == tr.phases.end() || !(*it == next))
                throw std::logic_error("phase state set not closed");
            tr.phase_step[p * params.M + a] = static_cast<int>(it - tr.phases.begin());
        }
    }

    // Steady-state branch shapes. Slot class r covers every global slot
    // k >= gamma-1 with k = r (mod Lt): the data window is full and the
    // correction constant (k+1-gamma)*(m-1)/Lt repeats mod 1 with period
    // Lt slots.
    const double amp = spec.amplitude(params);
    const double hval = params.h.to_double();
    const double dt = params.dt();
    const int Lt = spec.Lt;
    tr.shapes.resize(static_cast<std::size_t>(Lt) * tr.n_shapes * Lt * params.sps);
    tr.gram.resize(static_cast<std::size_t>(Lt) * tr.n_shapes * Lt * Lt);

    for (int r = 0; r < Lt; ++r) {
        for (int b = 0; b < tr.n_shapes; ++b) {
            const int input = b % params.M;
            int hist = b / params.M;
            std::vector<int> window(params.gamma); // symbol index by age
            window[0] = input;
            for (int j = 1; j < params.gamma; ++j) {
                window[j] = hist % params.M;
                hist /= params.M;
            }
            for (int m = 0; m < Lt; ++m) {
                cplx* dst = &tr.shapes[((static_cast<std::size_t>(r) * tr.n_shapes + b) * Lt + m) *
                                       params.sps];
                const double frac =
                    (m == 0 || spec.correction == Correction::None)
                        ? 0.0
                        : static_cast<double>(m) / static_cast<double>(Lt);
                for (int s = 0; s < params.sps; ++s) {
                    const double tau = s * dt;
                    double phase = 0.0;
                    for (int j = 0; j < params.gamma; ++j)
                        phase += hval * alpha[window[j]] *
                                 phase_pulse_q(params.pulse, params.gamma, tau + j * params.T, params.T);
                    if (frac != 0.0) {
                        if (spec.correction == Correction::LinPC) {
                            phase += frac * (r * params.T + tau) / params.T;
                        } else { // offPC
                            double acc = 0.0;
                            for (int j = 0; j < params.gamma; ++j)
                                acc += 2.0 * phase_pulse_q(params.pulse, params.gamma,
                                                           tau + j * params.T, params.T);
                            int sat = (r + 1 - params.gamma) % Lt;
                            if (sat < 0) sat += Lt;
                            phase += frac * (acc + static_cast<double>(sat));
                        }
                    }
                    phase -= std::floor(phase);
                    dst[s] = std::polar(amp, kTwoPi * phase);
                }
            }
            // Constant-envelope invariant of every branch segment.
            for (int m = 0; m < Lt; ++m) {
                const cplx* sh = tr.shape(r, b, m);
                for (int s = 0; s < params.sps; ++s)
                    if (std::abs(std::abs(sh[s]) - amp) > 1e-9 * amp)
                        throw std::logic_error("branch segment lost constant modulus");
            }
            cplx* G = &tr.gram[(static_cast<std::size_t>(r) * tr.n_shapes + b) * Lt * Lt];
            for (int m = 0; m < Lt; ++m)
                for (int mp = 0; mp < Lt; ++mp) {
                    cplx acc{0.0, 0.0};
                    const cplx* sm = tr.shape(r, b, m);
                    const cplx* sp = tr.shape(r, b, mp);
                    for (int s = 0; s < params.sps; ++s) acc += sm[s] * std::conj(sp[s]);
                    G[m * Lt + mp] = acc * dt;
                }
        }
    }
    return tr;
}

PhaseState trellis_state(const Trellis& tr, int state_index) {
    if (state_index < 0 || state_index >= tr.n_states)
        throw InputError("state index out of range");
    PhaseState st;
    st.theta = tr.phases[state_index / tr.n_hist];
    const auto alpha = tr.params.alphabet();
    int hist = state_index % tr.n_hist;
    for (int j = 1; j < tr.params.gamma; ++j) {
        st.history.push_back(alpha[hist % tr.params.M]);
        hist /= tr.params.M;
    }
    return st;
}

namespace {

// One candidate path during the stream-head stage (k < gamma-1), where
// zero-history symbols make the branch waveforms slot-specific.
struct HeadPath {
    std::vector<int> sym_idx; // symbols so far (alphabet indices)
    double metric = 0.0;
};

// Branch samples for head slot k of antenna m (0-based), synthesized from
// the candidate prefix with the same formulas as the encoder.
void head_branch(const CpmParams& params, const StcCodeSpec& spec, int m,
                 const std::vector<double>& prefix, int k, int n_total, cplx* out) {
    const double amp = spec.amplitude(params);
    const double dt = params.dt();
    for (int s = 0; s < params.sps; ++s) {
        const double t = (static_cast<double>(k) * params.sps + s) * dt;
        double phase = cpm_phase_cycles(params, prefix, t);
        if (m > 0 && spec.correction != Correction::None)
            phase += correction_phase(spec, params, m + 1, t, n_total);
        phase -= std::floor(phase);
        out[s] = std::polar(amp, kTwoPi * phase);
    }
}

} // namespace

DetectionResult mlsd_detect(const std::vector<Waveform>& received, const ChannelRealization& ch,
                            const Trellis& tr) {
    const CpmParams& params = tr.params;
    const StcCodeSpec& spec = tr.spec;
    const int Lt = spec.Lt;
    const int Lr = static_cast<int>(received.size());
    const int M = params.M;
    if (received.empty()) throw InputError("no received waveforms");
    const std::size_t len = received[0].size();
    if (len % static_cast<std::size_t>(params.sps) != 0)
        throw InputError("received length is not a whole number of symbols");
    const int Nc = static_cast<int>(len / params.sps);
    if (Nc % Lt != 0) throw InputError("received length is not a whole number of code blocks");
    for (const auto& w : received)
        if (w.size() != len) throw InputError("received waveform length mismatch");

    const double dt = params.dt();
    const auto alpha = params.alphabet();

    // Initial phases fold into an effective channel seen by the theta-free
    // branch shapes.
    std::vector<cplx> theta_rot(Lt);
    for (int m = 0; m < Lt; ++m) theta_rot[m] = std::polar(1.0, kTwoPi * spec.theta_init[m]);
    auto eff = [&](const FadingMatrix& A, int n, int m) { return A.at(n, m) * theta_rot[m]; };

    // sum |r|^2 dt, the branch-independent part of the metric.
    double r_energy = 0.0;
    for (const auto& w : received)
        for (const auto& v : w.samples) r_energy += std::norm(v);
    r_energy *= dt;

    const int head_steps = std::min(params.gamma - 1, Nc);

    // ---- head stage: explicit path enumeration over the first gamma-1 slots
    std::vector<HeadPath> paths{HeadPath{}};
    std::vector<cplx> btmp(params.sps);
    std::vector<cplx> gtmp(static_cast<std::size_t>(Lr) * params.sps);
    for (int k = 0; k < head_steps; ++k) {
        const FadingMatrix& A = ch.block(k / Lt);
        std::vector<HeadPath> next;
        next.reserve(paths.size() * M);
        for (const auto& p : paths) {
            for (int v = 0; v < M; ++v) {
                std::vector<double> prefix(p.sym_idx.size() + 1);
                for (std::size_t i = 0; i < p.sym_idx.size(); ++i)
                    prefix[i] = alpha[p.sym_idx[i]];
                prefix.back() = alpha[v];

                std::fill(gtmp.begin(), gtmp.end(), cplx{0.0, 0.0});
                for (int m = 0; m < Lt; ++m) {
                    head_branch(params, spec, m, prefix, k, Nc, btmp.data());
                    for (int n = 0; n < Lr; ++n) {
                        const cplx g = eff(A, n, m);
                        for (int s = 0; s < params.sps; ++s) gtmp[n * params.sps + s] += g * btmp[s];
                    }
                }
                double delta = 0.0;
                for (int n = 0; n < Lr; ++n) {
                    const cplx* rx = &received[n].samples[static_cast<std::size_t>(k) * params.sps];
                    for (int s = 0; s < params.sps; ++s) {
                        const cplx d = gtmp[n * params.sps + s];
                        delta += std::norm(d) - 2.0 * (std::conj(rx[s]) * d).real();
                    }
                }
                HeadPath q;
                q.sym_idx = p.sym_idx;
                q.sym_idx.push_back(v);
                q.metric = p.metric + delta * dt;
                next.push_back(std::move(q));
            }
        }
        paths = std::move(next);
    }

    // ---- dense Viterbi from slot gamma-1 on
    const int n_states = tr.n_states;
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> metric(n_states, INF), metric_next(n_states, INF);
    const int steady_steps = Nc - head_steps;
    // survivors[step*n_states + state] = packed (prev_state, input)
    std::vector<std::int32_t> surv(static_cast<std::size_t>(std::max(steady_steps, 0)) * n_states, -1);
    std::vector<std::vector<int>> head_of_state(n_states); // head prefix per start state

    if (head_steps == 0) {
        metric[0] = 0.0; // phase 0 is always phases[0], empty history
    } else {
        for (auto& p : paths) {
            // history digits: age-1 symbol in the low digit
            int hist = 0;
            for (int j = 1; j <= params.gamma - 1; ++j) {
                const int idx = static_cast<int>(p.sym_idx.size()) - j;
                hist += (idx >= 0 ? p.sym_idx[idx] : 0) * ipow(M, j - 1);
            }
            const int state = 0 * tr.n_hist + hist; // accumulated phase still 0
            if (p.metric < metric[state] ||
                (p.metric == metric[state] && p.sym_idx < head_of_state[state])) {
                metric[state] = p.metric;
                head_of_state[state] = p.sym_idx;
            }
        }
    }

    std::vector<cplx> corr(static_cast<std::size_t>(Lr) * Lt * tr.n_shapes);
    std::vector<double> energy(static_cast<std::size_t>(Lr) * tr.n_shapes);
    std::vector<cplx> zvals(static_cast<std::size_t>(Lr) * tr.n_shapes);
    std::vector<cplx> aeff(static_cast<std::size_t>(Lr) * Lt);

    // Full path of a candidate (head prefix + steady inputs), for exact-tie
    // lexicographic comparison. prev_state/input identify the incoming edge
    // at `step`; earlier steps come from the survivor table.
    auto backtrack_path = [&](int step, int prev_state, int input) {
        std::vector<int> seq(static_cast<std::size_t>(head_steps + step + 1));
        seq[head_steps + step] = input;
        int s = prev_state;
        for (int t = step - 1; t >= 0; --t) {
            const std::int32_t packed = surv[static_cast<std::size_t>(t) * n_states + s];
            seq[head_steps + t] = packed % M;
            s = packed / M;
        }
        if (head_steps > 0) {
            const auto& pre = head_of_state[s];
            for (int i = 0; i < head_steps; ++i) seq[i] = pre[i];
        }
        return seq;
    };

    const int hist_shift = (params.gamma >= 2) ? ipow(M, params.gamma - 2) : 1;

    for (int k = head_steps; k < Nc; ++k) {
        const int r = k % Lt;
        const int step = k - head_steps;
        const FadingMatrix& A = ch.block(k / Lt);
        for (int n = 0; n < Lr; ++n)
            for (int m = 0; m < Lt; ++m) aeff[n * Lt + m] = eff(A, n, m);

        // Per-antenna correlations of the received slot with every shape.
        for (int n = 0; n < Lr; ++n) {
            const cplx* rx = &received[n].samples[static_cast<std::size_t>(k) * params.sps];
            for (int m = 0; m < Lt; ++m) {
                for (int b = 0; b < tr.n_shapes; ++b) {
                    const cplx* sh = tr.shape(r, b, m);
                    cplx acc{0.0, 0.0};
                    for (int s = 0; s < params.sps; ++s) acc += std::conj(rx[s]) * sh[s];
                    corr[(static_cast<std::size_t>(n) * Lt + m) * tr.n_shapes + b] = acc * dt;
                }
            }
        }
        // Combine with the effective channel: z and branch energy.
        for (int n = 0; n < Lr; ++n) {
            for (int b = 0; b < tr.n_shapes; ++b) {
                cplx z{0.0, 0.0};
                for (int m = 0; m < Lt; ++m)
                    z += aeff[n * Lt + m] * corr[(static_cast<std::size_t>(n) * Lt + m) * tr.n_shapes + b];
                zvals[static_cast<std::size_t>(n) * tr.n_shapes + b] = z;
                const cplx* G = tr.branch_gram(r, b);
                double e = 0.0;
                for (int m = 0; m < Lt; ++m)
                    for (int mp = 0; mp < Lt; ++mp)
                        e += (aeff[n * Lt + m] * std::conj(aeff[n * Lt + mp]) * G[m * Lt + mp]).real();
                energy[static_cast<std::size_t>(n) * tr.n_shapes + b] = e;
            }
        }

        std::fill(metric_next.begin(), metric_next.end(), INF);
        std::int32_t* sv = &surv[static_cast<std::size_t>(step) * n_states];
        for (int st = 0; st < n_states; ++st) {
            if (metric[st] == INF) continue;
            const int p = st / tr.n_hist;
            const int hist = st % tr.n_hist;
            const int leaving = (params.gamma == 1) ? -1 : hist / hist_shift;
            const cplx rot = tr.phase_rot[p];
            for (int v = 0; v < M; ++v) {
                const int b = hist * M + v;
                double delta = 0.0;
                for (int n = 0; n < Lr; ++n) {
                    const cplx z = zvals[static_cast<std::size_t>(n) * tr.n_shapes + b];
                    delta += energy[static_cast<std::size_t>(n) * tr.n_shapes + b] -
                             2.0 * (rot * z).real();
                }
                const double cand = metric[st] + delta;
                const int leave_idx = (params.gamma == 1) ? v : leaving;
                const int p_next = tr.phase_step[p * M + leave_idx];
                const int hist_next = (params.gamma == 1) ? 0 : (hist % hist_shift) * M + v;
                const int st_next = p_next * tr.n_hist + hist_next;
                if (cand < metric_next[st_next]) {
                    metric_next[st_next] = cand;
                    sv[st_next] = st * M + v;
                } else if (cand == metric_next[st_next] && sv[st_next] >= 0) {
                    // Exact tie: smaller symbol at the first differing slot wins.
                    const auto mine = backtrack_path(step, st, v);
                    const auto theirs = backtrack_path(step, sv[st_next] / M, sv[st_next] % M);
                    if (mine < theirs) sv[st_next] = st * M + v;
                }
            }
        }
        std::swap(metric, metric_next);
    }

    // Pick the best final state; exact ties resolve to the lexicographically
    // smaller detected sequence.
    auto final_path = [&](int st_final) {
        if (steady_steps == 0) {
            std::vector<int> seq = head_of_state[st_final];
            return seq;
        }
        const std::int32_t packed =
            surv[static_cast<std::size_t>(steady_steps - 1) * n_states + st_final];
        return backtrack_path(steady_steps - 1, packed / M, packed % M);
    };
    int best_state = -1;
    double best = INF;
    for (int st = 0; st < n_states; ++st) {
        if (metric[st] < best) {
            best = metric[st];
            best_state = st;
        } else if (best_state >= 0 && metric[st] == best) {
            if (final_path(st) < final_path(best_state)) best_state = st;
        }
    }
    if (best_state < 0) throw std::logic_error("no surviving path");

    DetectionResult res;
    res.path_metric = best + r_energy;
    std::vector<int> idx_seq(static_cast<std::size_t>(Nc));
    int st = best_state;
    for (int step = steady_steps - 1; step >= 0; --step) {
        const std::int32_t packed = surv[static_cast<std::size_t>(step) * n_states + st];
        if (packed < 0) throw std::logic_error("broken traceback");
        idx_seq[head_steps + step] = packed % M;
        st = packed / M;
    }
    if (head_steps > 0) {
        const auto& pre = head_of_state[st];
        for (int k = 0; k < head_steps; ++k) idx_seq[k] = pre[k];
    }

    res.symbols.resize(idx_seq.size());
    for (std::size_t i = 0; i < idx_seq.size(); ++i) res.symbols[i] = alpha[idx_seq[i]];
    res.bits = gray_symbols_to_bits(res.symbols, params);
    return res;
}

int gray_index_from_bits(const std::uint8_t* bits, int bits_per_symbol) {
    int g = 0;
    for (int i = 0; i < bits_per_symbol; ++i) g = (g << 1) | (bits[i] ? 1 : 0);
    int idx = g;
    for (int shift = 1; shift < bits_per_symbol; shift <<= 1) idx ^= idx >> shift;
    return idx;
}

void gray_bits_from_index(int index, int bits_per_symbol, std::uint8_t* bits) {
    const int g = index ^ (index >> 1);
    for (int i = 0; i < bits_per_symbol; ++i)
        bits[i] = static_cast<std::uint8_t>((g >> (bits_per_symbol - 1 - i)) & 1);
}

std::vector<double> gray_bits_to_symbols(const std::vector<std::uint8_t>& bits,
                                         const CpmParams& params) {
    const int bps = params.bits_per_symbol();
    if (bits.size() % static_cast<std::size_t>(bps) != 0)
        throw InputError("bit count is not a multiple of log2(M)");
    const auto alpha = params.alphabet();
    std::vector<double> out(bits.size() / bps);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = alpha[gray_index_from_bits(&bits[i * bps], bps)];
    return out;
}

std::vector<std::uint8_t> gray_symbols_to_bits(const std::vector<double>& symbols,
                                               const CpmParams& params) {
    const int bps = params.bits_per_symbol();
    const auto alpha = params.alphabet();
    std::vector<std::uint8_t> out(symbols.size() * bps);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        int idx = -1;
        for (int a = 0; a < params.M; ++a)
            if (std::abs(symbols[i] - alpha[a]) < 1e-9) { idx = a; break; }
        if (idx < 0) throw InputError("symbol outside alphabet in gray mapping");
        gray_bits_from_index(idx, bps, &out[i * bps]);
    }
    return out;
}

} // namespace stccpm
