#include "stc_code.hpp"

#include <cmath>

namespace stccpm {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Correction correction_from_name(const std::string& s) {
    if (s == "none") return Correction::None;
    if (s == "linPC" || s == "linpc") return Correction::LinPC;
    if (s == "offPC" || s == "offpc") return Correction::OffPC;
    throw ConfigError("unknown correction: " + s);
}

void StcCodeSpec::validate(bool strict) const {
    if (Lt < 1) throw ConfigError("Lt must be >= 1");
    if (static_cast<int>(theta_init.size()) != Lt)
        throw ConfigError("theta_init must have Lt entries");
    if (strict && correction == Correction::None && Lt > 1)
        throw ConfigError("correction=none is only valid for Lt=1");
}

double StcCodeSpec::amplitude(const CpmParams& params) const {
    return std::sqrt(params.Es / (static_cast<double>(Lt) * params.T));
}

int map_symbol_index(int Lt, int l, int r, int i) {
    if (r < 1 || r > Lt) throw InputError("slot index r out of range");
    if (i < 1) throw InputError("pulse index i out of range");
    return Lt * l + r - i + 1;
}

double map_symbol(std::span<const double> data, int Lt, int l, int r, int i) {
    const int j = map_symbol_index(Lt, l, r, i);
    if (j < 1) throw InputError("data index before sequence start (needs history)");
    if (j > static_cast<int>(data.size())) throw InputError("data index past sequence end");
    return data[static_cast<std::size_t>(j - 1)];
}

double correction_phase(const StcCodeSpec& spec, const CpmParams& params, int m, double t,
                        int n_symbols) {
    if (m < 1 || m > spec.Lt) throw InputError("antenna index out of range");
    if (m == 1 || spec.correction == Correction::None) return 0.0;
    const double frac = static_cast<double>(m - 1) / static_cast<double>(spec.Lt);
    if (spec.correction == Correction::LinPC) return frac * t / params.T;
    // offPC: pulse train aligned with the data pulses (zero history, so
    // only pulses i >= 0 started at t = i*T contribute).
    const int last_started = std::min(n_symbols - 1, static_cast<int>(std::floor(t / params.T)));
    if (last_started < 0) return 0.0;
    const int first_active = std::max(0, last_started - params.gamma + 1);
    double acc = static_cast<double>(first_active); // saturated pulses: 2q = 1 each
    for (int i = first_active; i <= last_started; ++i)
        acc += 2.0 * phase_pulse_q(params.pulse, params.gamma, t - i * params.T, params.T);
    return frac * acc;
}

std::vector<double> offset_alphabet(const StcCodeSpec& spec, const CpmParams& params, int m) {
    if (m < 1 || m > spec.Lt) throw InputError("antenna index out of range");
    const double off = 2.0 * static_cast<double>(m - 1) /
                       (static_cast<double>(spec.Lt) * params.h.to_double());
    std::vector<double> a;
    a.reserve(params.M);
    for (int d : params.alphabet()) a.push_back(static_cast<double>(d) + off);
    return a;
}

namespace {

void check_encode_inputs(const StcCodeSpec& spec, const CpmParams& params,
                         std::span<const double> data) {
    params.validate();
    spec.validate(false);
    if (data.size() % static_cast<std::size_t>(spec.Lt) != 0)
        throw InputError("N_c must be a multiple of Lt (whole code blocks)");
    std::vector<double> alpha;
    for (int d : params.alphabet()) alpha.push_back(static_cast<double>(d));
    check_symbols_in_alphabet(data, alpha);
}

} // namespace

std::vector<Waveform> encode_continuous(const StcCodeSpec& spec, const CpmParams& params,
                                        std::span<const double> data) {
    check_encode_inputs(spec, params, data);
    const double amp = spec.amplitude(params);
    const int n = static_cast<int>(data.size());
    std::vector<Waveform> out;
    out.reserve(spec.Lt);
    for (int m = 1; m <= spec.Lt; ++m) {
        PhaseFn corr;
        if (m > 1 && spec.correction != Correction::None) {
            corr = [&spec, &params, m, n](double t) {
                return correction_phase(spec, params, m, t, n);
            };
        }
        out.push_back(synthesize_cpm(params, data, spec.theta_init[m - 1], corr, amp, m - 1));
    }
    return out;
}

BlockwiseResult encode_blockwise(const StcCodeSpec& spec, const CpmParams& params,
                                 std::span<const double> data) {
    check_encode_inputs(spec, params, data);
    const double amp = spec.amplitude(params);
    const double hval = params.h.to_double();
    const double dt = params.dt();
    const int n = static_cast<int>(data.size());
    const int n_blocks = n / spec.Lt;

    BlockwiseResult res;
    res.blocks.resize(static_cast<std::size_t>(n_blocks));
    for (int l = 0; l < n_blocks; ++l) res.blocks[l].l = l;
    res.waveforms.assign(static_cast<std::size_t>(spec.Lt), Waveform{});

    for (int m = 1; m <= spec.Lt; ++m) {
        Waveform& w = res.waveforms[m - 1];
        w.sample_rate = params.sample_rate();
        w.antenna_id = m - 1;
        w.samples.resize(static_cast<std::size_t>(n) * params.sps);

        const double frac = (m == 1 || spec.correction == Correction::None)
                                ? 0.0
                                : static_cast<double>(m - 1) / static_cast<double>(spec.Lt);
        double theta_mem = spec.theta_init[m - 1];
        std::size_t sample = 0;
        for (int k = 0; k < n; ++k) { // global slot index, 0-based
            const int l = k / spec.Lt;
            const int r = k % spec.Lt + 1;
            const int window = std::min(params.gamma - 1, k); // history depth available

            CodeSlot slot;
            slot.antenna = m;
            slot.slot = r;
            slot.block = l;
            slot.theta_start = theta_mem;
            slot.symbols.resize(params.gamma, 0.0);
            for (int j = 0; j <= window; ++j) slot.symbols[j] = data[k - j];

            // Slot-local correction, zero at the slot start; the memory
            // absorbed everything earlier.
            auto slot_corr = [&](double tau) {
                if (frac == 0.0) return 0.0;
                if (spec.correction == Correction::LinPC) return frac * tau / params.T;
                double acc = 0.0;
                for (int j = 0; j <= window; ++j)
                    acc += 2.0 * (phase_pulse_q(params.pulse, params.gamma, tau + j * params.T, params.T) -
                                  phase_pulse_q(params.pulse, params.gamma, j * params.T, params.T));
                return frac * acc;
            };

            for (int s = 0; s < params.sps; ++s, ++sample) {
                const double tau = static_cast<double>(s) * dt;
                double phase = theta_mem + slot_corr(tau);
                for (int j = 0; j <= window; ++j)
                    phase += hval * data[k - j] *
                             phase_pulse_q(params.pulse, params.gamma, tau + j * params.T, params.T);
                phase -= std::floor(phase);
                w.samples[sample] = std::polar(amp, kTwoPi * phase);
            }

            // Phase memory update xi: the symbol leaving the active window
            // contributes its saturated phase h/2*d, and the slot-local
            // correction contributes its increment over the slot. This is
            // exactly what phase continuity at the boundary requires.
            const int leaving = k - params.gamma + 1;
            double xi = (leaving >= 0) ? 0.5 * hval * data[leaving] : 0.0;
            xi += slot_corr(params.T);
            theta_mem += xi;
            theta_mem -= std::floor(theta_mem);

            res.blocks[l].slots.push_back(std::move(slot));
        }
    }
    return res;
}

} // namespace stccpm
