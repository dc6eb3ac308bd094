#include "cpm_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace stccpm {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double phase_pulse_q(PulseShape pulse, int gamma, double t, double T) {
    const double span = static_cast<double>(gamma) * T;
    if (t <= 0.0) return 0.0;
    if (t >= span) return 0.5;
    switch (pulse) {
        case PulseShape::REC:
            return t / (2.0 * span);
        case PulseShape::RC: {
            const double x = t / span;
            return 0.5 * (x - std::sin(kTwoPi * x) / kTwoPi);
        }
    }
    throw ConfigError("unknown pulse shape");
}

double cpm_phase_cycles(const CpmParams& params, std::span<const double> symbols, double t) {
    const double hval = params.h.to_double();
    const int n = static_cast<int>(symbols.size());
    // Pulses older than gamma*T are saturated at q = 1/2; only the gamma
    // most recent started pulses need q evaluations.
    const int last_started = std::min(n - 1, static_cast<int>(std::floor(t / params.T)));
    if (last_started < 0) return 0.0;
    const int first_active = std::max(0, last_started - params.gamma + 1);
    double sat = 0.0;
    for (int i = 0; i < first_active; ++i) sat += symbols[i];
    double phase = 0.5 * hval * sat;
    for (int i = first_active; i <= last_started; ++i)
        phase += hval * symbols[i] * phase_pulse_q(params.pulse, params.gamma, t - i * params.T, params.T);
    return phase;
}

Waveform synthesize_cpm(const CpmParams& params, std::span<const double> symbols,
                        double theta0_cycles, const PhaseFn& extra_phase,
                        double amplitude_scale, int antenna_id) {
    params.validate();
    const int n = static_cast<int>(symbols.size());
    Waveform w;
    w.sample_rate = params.sample_rate();
    w.t0 = 0.0;
    w.antenna_id = antenna_id;
    w.samples.resize(static_cast<std::size_t>(std::max(n, 0)) * params.sps);

    const double hval = params.h.to_double();
    const double dt = params.dt();
    // Running sum over saturated pulses; incremental so synthesis is O(gamma)
    // per sample. h/2 * d is exact in floating point for dyadic h.
    double saturated_sum = 0.0;
    std::size_t k = 0;
    for (int sym = 0; sym < n; ++sym) {
        const int first_active = std::max(0, sym - params.gamma + 1);
        if (sym - params.gamma >= 0) saturated_sum += symbols[sym - params.gamma];
        const double base = 0.5 * hval * saturated_sum;
        for (int s = 0; s < params.sps; ++s, ++k) {
            const double t = static_cast<double>(k) * dt;
            double phase = theta0_cycles + base;
            for (int i = first_active; i <= sym; ++i)
                phase += hval * symbols[i] *
                         phase_pulse_q(params.pulse, params.gamma, t - i * params.T, params.T);
            if (extra_phase) phase += extra_phase(t);
            phase -= std::floor(phase); // reduce before trig for precision
            w.samples[k] = std::polar(amplitude_scale, kTwoPi * phase);
        }
    }
    // Empty stream: one symbol period of the bare carrier.
    if (n == 0) {
        w.samples.assign(static_cast<std::size_t>(params.sps), std::polar(amplitude_scale, kTwoPi * theta0_cycles));
    }
    return w;
}

std::vector<Rational> phase_state_set(const CpmParams& params) {
    params.validate();
    const auto alpha = params.alphabet();
    std::vector<Rational> increments;
    increments.reserve(alpha.size());
    for (int d : alpha) increments.push_back((params.h * Rational(d, 2)).mod1());

    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    std::vector<Rational> frontier{Rational(0)};
    seen.insert({0, 1});
    std::vector<Rational> out{Rational(0)};
    while (!frontier.empty()) {
        std::vector<Rational> next;
        for (const auto& s : frontier) {
            for (const auto& inc : increments) {
                const Rational r = (s + inc).mod1();
                if (seen.insert({r.num, r.den}).second) {
                    next.push_back(r);
                    out.push_back(r);
                }
            }
        }
        frontier = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void check_symbols_in_alphabet(std::span<const double> symbols,
                               std::span<const double> alphabet) {
    for (double d : symbols) {
        bool ok = false;
        for (double a : alphabet)
            if (std::abs(d - a) < 1e-9) { ok = true; break; }
        if (!ok) throw InputError("symbol " + std::to_string(d) + " outside alphabet");
    }
}

} // namespace stccpm
