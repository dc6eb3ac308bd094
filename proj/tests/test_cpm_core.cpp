#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "cpm_core.hpp"
#include "rng.hpp"

using namespace stccpm;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

CpmParams params(int M, Rational h, int gamma, PulseShape pulse, int sps = 12) {
    CpmParams p;
    p.M = M;
    p.h = h;
    p.gamma = gamma;
    p.pulse = pulse;
    p.sps = sps;
    return p;
}

double unwrapped_phase_step(cplx a, cplx b) {
    return std::arg(b * std::conj(a)) / kTwoPi; // cycles, in (-1/2, 1/2]
}
} // namespace

TEST_CASE("phase pulse endpoints are exact") {
    const double T = 1.0;
    for (auto pulse : {PulseShape::REC, PulseShape::RC}) {
        for (int gamma : {1, 2, 3}) {
            CHECK(phase_pulse_q(pulse, gamma, 0.0, T) == 0.0);
            CHECK(phase_pulse_q(pulse, gamma, -0.3 * T, T) == 0.0);
            CHECK(phase_pulse_q(pulse, gamma, gamma * T, T) == 0.5);
            CHECK(phase_pulse_q(pulse, gamma, 2.0 * gamma * T, T) == 0.5);
        }
    }
}

TEST_CASE("phase pulse midpoint values") {
    // gamma = 2, both shapes: q(gamma*T/2) = 1/4 (REC: linear midpoint;
    // RC: odd symmetry of the sine term about the midpoint).
    CHECK(phase_pulse_q(PulseShape::REC, 2, 1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(phase_pulse_q(PulseShape::RC, 2, 1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("phase pulse is continuous and nondecreasing") {
    const double T = 1.0;
    for (auto pulse : {PulseShape::REC, PulseShape::RC}) {
        for (int gamma : {1, 2, 3}) {
            double prev = -1.0;
            for (int k = 0; k <= 400; ++k) {
                const double t = -T + k * (gamma + 2) * T / 400.0;
                const double q = phase_pulse_q(pulse, gamma, t, T);
                CHECK(q >= prev - 1e-12);
                prev = q;
            }
        }
    }
}

TEST_CASE("empty data gives a constant phasor") {
    const auto p = params(4, {1, 2}, 2, PulseShape::REC);
    const auto w = synthesize_cpm(p, {}, 0.37, nullptr, 2.0);
    REQUIRE(w.size() > 0);
    for (const auto& s : w.samples) {
        CHECK(std::abs(s - 2.0 * std::polar(1.0, kTwoPi * 0.37)) < 1e-12);
    }
}

TEST_CASE("single +1 symbol ramps linearly to a quarter cycle (M=2, h=1/2, 1REC)") {
    // Hand integration: phase(t) = h*d*q(t) = (1/2)(t/(2T)) = t/(4T) cycles.
    const auto p = params(2, {1, 2}, 1, PulseShape::REC, 16);
    const std::vector<double> data{1.0};
    const auto w = synthesize_cpm(p, data, 0.0, nullptr, 1.0);
    REQUIRE(w.size() == 16);
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double t = static_cast<double>(k) / 16.0;
        const double expect = t / 4.0;
        CHECK(std::arg(w.samples[k]) / kTwoPi == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("constant envelope over random data") {
    const auto p = params(4, {1, 2}, 2, PulseShape::REC);
    Rng rng(123);
    const auto alpha = p.alphabet();
    std::vector<double> data(50);
    for (auto& d : data) d = alpha[rng.uniform_int(4)];
    const double amp = 0.7071;
    const auto w = synthesize_cpm(p, data, 0.11, nullptr, amp);
    REQUIRE(w.size() == 600);
    for (const auto& s : w.samples) CHECK(std::abs(std::abs(s) - amp) < 1e-12 * amp);
}

TEST_CASE("phase continuity: no jump of half a cycle or more between samples") {
    Rng rng(99);
    for (auto pulse : {PulseShape::REC, PulseShape::RC}) {
        const auto p = params(4, {1, 2}, 2, pulse, 8);
        const auto alpha = p.alphabet();
        std::vector<double> data(40);
        for (auto& d : data) d = alpha[rng.uniform_int(4)];
        const auto w = synthesize_cpm(p, data, 0.0, nullptr, 1.0);
        // Analytic slope bound: h*(M-1)/2 cycles per symbol of |dphase/dt|.
        const double bound = 0.5 * (4 - 1) * 0.5 / 8 + 1e-9;
        for (std::size_t k = 1; k < w.size(); ++k) {
            const double step = std::abs(unwrapped_phase_step(w.samples[k - 1], w.samples[k]));
            CHECK(step < 0.5);
            CHECK(step <= bound);
        }
    }
}

TEST_CASE("initial phase rotates the whole waveform by a constant factor") {
    const auto p = params(4, {1, 2}, 2, PulseShape::RC);
    const auto alpha = p.alphabet();
    Rng rng(7);
    std::vector<double> data(30);
    for (auto& d : data) d = alpha[rng.uniform_int(4)];
    const auto w0 = synthesize_cpm(p, data, 0.15, nullptr, 1.0);
    const auto w1 = synthesize_cpm(p, data, 0.62, nullptr, 1.0);
    const cplx rot = std::polar(1.0, kTwoPi * (0.62 - 0.15));
    for (std::size_t k = 0; k < w0.size(); ++k)
        CHECK(std::abs(w1.samples[k] - rot * w0.samples[k]) < 1e-12);
}

TEST_CASE("phase state sets match hand-derived closures") {
    // h=1/2, M=4: increments {+-1/4, +-3/4} mod 1 close to {0,1/4,1/2,3/4}.
    auto p = params(4, {1, 2}, 2, PulseShape::REC);
    auto set = phase_state_set(p);
    REQUIRE(set.size() == 4);
    CHECK(set[0] == Rational(0));
    CHECK(set[1] == Rational(1, 4));
    CHECK(set[2] == Rational(1, 2));
    CHECK(set[3] == Rational(3, 4));

    // h=1: increments are odd multiples of 1/2.
    p = params(4, {1, 1}, 1, PulseShape::REC);
    set = phase_state_set(p);
    REQUIRE(set.size() == 2);
    CHECK(set[0] == Rational(0));
    CHECK(set[1] == Rational(1, 2));

    // h=2/3, M=2: increments +-1/3 mod 1.
    p = params(2, {2, 3}, 1, PulseShape::REC);
    set = phase_state_set(p);
    REQUIRE(set.size() == 3);
    CHECK(set[0] == Rational(0));
    CHECK(set[1] == Rational(1, 3));
    CHECK(set[2] == Rational(2, 3));
}

TEST_CASE("symbols outside the alphabet are rejected") {
    const auto p = params(4, {1, 2}, 2, PulseShape::REC);
    std::vector<double> alpha;
    for (int a : p.alphabet()) alpha.push_back(a);
    CHECK_THROWS_AS(check_symbols_in_alphabet(std::vector<double>{2.0}, alpha), InputError);
    CHECK_NOTHROW(check_symbols_in_alphabet(std::vector<double>{3.0, -3.0}, alpha));
}

TEST_CASE("invalid parameter sets are rejected") {
    CpmParams p;
    p.M = 3;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = CpmParams{};
    p.gamma = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = CpmParams{};
    p.sps = 1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = CpmParams{};
    p.h = Rational(-1, 2);
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("rational arithmetic reduces and wraps") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-1, 4).mod1() == Rational(3, 4));
    CHECK((Rational(3, 4) + Rational(1, 2)).mod1() == Rational(1, 4));
    CHECK(Rational(7, -2) == Rational(-7, 2));
}
