#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "errors.hpp"

namespace zhat {

using BigInt = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(const BigInt& num, const BigInt& den) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline BigInt big_from_u64(std::uint64_t v) {
    BigInt r;
    mpz_import(r.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
    return r;
}

inline BigInt big_from_i64(std::int64_t v) {
    if (v >= 0) return big_from_u64(static_cast<std::uint64_t>(v));
    BigInt r = big_from_u64(static_cast<std::uint64_t>(-(v + 1)) + 1);
    return -r;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

/// m^n as a big integer.
inline BigInt big_pow(std::uint64_t m, unsigned n) {
    BigInt r;
    mpz_pow_ui(r.get_mpz_t(), big_from_u64(m).get_mpz_t(), n);
    return r;
}

/// Nonnegative residue of x modulo m (m >= 1).
inline std::uint64_t mod_floor(std::int64_t x, std::uint64_t m) {
    if (x >= 0) return static_cast<std::uint64_t>(x) % m;
    std::uint64_t a = (static_cast<std::uint64_t>(-(x + 1)) + 1) % m;
    return a == 0 ? 0 : m - a;
}

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

/// m^n when it fits in 64 bits, nullopt-like sentinel 0 otherwise.
inline std::uint64_t checked_pow(std::uint64_t m, unsigned n) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < n; ++i) {
        if (m != 0 && r > std::numeric_limits<std::uint64_t>::max() / m) return 0;
        r *= m;
    }
    return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
        throw ResourceError("64-bit overflow in modulus product");
    return a * b;
}

inline std::uint64_t lcm_checked(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    return checked_mul(a / std::gcd(a, b), b);
}

/// Closed interval of reals with an explicit certification flag.  Floating
/// endpoints are rounded outward (lo down, hi up) wherever they are computed.
struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    bool certified = true;
    double cutoff = 0.0;
    std::vector<std::string> flags;

    bool contains(double x) const { return lo <= x && x <= hi; }
    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool has_flag(const std::string& f) const {
        for (const auto& g : flags)
            if (g == f) return true;
        return false;
    }
};

inline double round_down(double x, int ulps = 1) {
    for (int i = 0; i < ulps; ++i) x = std::nextafter(x, -std::numeric_limits<double>::infinity());
    return x;
}

inline double round_up(double x, int ulps = 1) {
    for (int i = 0; i < ulps; ++i) x = std::nextafter(x, std::numeric_limits<double>::infinity());
    return x;
}

} // namespace zhat
