#ifndef STCCPM_RATIONAL_HPP
#define STCCPM_RATIONAL_HPP

#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace stccpm {

// Exact rational arithmetic for phase bookkeeping. Phases are kept in
// cycles, so trellis states compare exactly instead of drifting apart
// in floating point.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { reduce(); }
    explicit Rational(std::int64_t n) : num(n), den(1) {}

    void reduce() {
        if (den == 0) throw std::invalid_argument("rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    Rational operator+(const Rational& o) const { return {num * o.den + o.num * den, den * o.den}; }
    Rational operator-(const Rational& o) const { return {num * o.den - o.num * den, den * o.den}; }
    Rational operator*(const Rational& o) const { return {num * o.num, den * o.den}; }
    Rational operator*(std::int64_t k) const { return {num * k, den}; }

    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const { return num * o.den < o.num * den; }

    // Reduce into [0, 1).
    Rational mod1() const {
        std::int64_t n = num % den;
        if (n < 0) n += den;
        return {n, den};
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }
};

struct RationalHash {
    std::size_t operator()(const Rational& r) const {
        return std::hash<std::int64_t>()(r.num) * 1000003u ^ std::hash<std::int64_t>()(r.den);
    }
};

} // namespace stccpm

#endif
