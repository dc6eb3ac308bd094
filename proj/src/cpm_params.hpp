#ifndef STCCPM_CPM_PARAMS_HPP
#define STCCPM_CPM_PARAMS_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "rational.hpp"

namespace stccpm {

// Thrown when a parameter set or config is rejected.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when runtime data (symbols, waveform dimensions) is invalid.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PulseShape { REC, RC };

inline const char* pulse_name(PulseShape p) { return p == PulseShape::REC ? "REC" : "RC"; }

inline PulseShape pulse_from_name(const std::string& s) {
    if (s == "REC" || s == "rec") return PulseShape::REC;
    if (s == "RC" || s == "rc") return PulseShape::RC;
    throw ConfigError("unknown pulse shape: " + s);
}

// Core CPM parameter set: alphabet size M, modulation index h (exact
// rational, lowest terms), memory length gamma in symbols, phase pulse
// shape, samples per symbol, symbol period and symbol energy.
struct CpmParams {
    int M = 4;
    Rational h{1, 2};
    int gamma = 2;
    PulseShape pulse = PulseShape::REC;
    int sps = 12;
    double T = 1.0;
    double Es = 1.0;

    void validate() const {
        if (M < 2 || M % 2 != 0) throw ConfigError("M must be even and >= 2");
        if (h.num <= 0) throw ConfigError("modulation index h must be > 0");
        if (gamma < 1) throw ConfigError("gamma must be >= 1");
        if (sps < 2) throw ConfigError("sps must be >= 2");
        if (T <= 0.0) throw ConfigError("T must be > 0");
        if (Es <= 0.0) throw ConfigError("Es must be > 0");
    }

    // Data alphabet {-M+1, -M+3, ..., M-1}: M odd integers.
    std::vector<int> alphabet() const {
        std::vector<int> a;
        a.reserve(M);
        for (int k = 0; k < M; ++k) a.push_back(-M + 1 + 2 * k);
        return a;
    }

    int bits_per_symbol() const {
        int b = 0;
        while ((1 << b) < M) ++b;
        if ((1 << b) != M) throw ConfigError("M must be a power of 2 for bit mapping");
        return b;
    }

    double sample_rate() const { return static_cast<double>(sps) / T; }
    double dt() const { return T / static_cast<double>(sps); }
};

} // namespace stccpm

#endif
