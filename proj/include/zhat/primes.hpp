#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "numeric.hpp"

namespace zhat {

/// Primes <= limit by a plain sieve of Eratosthenes.
inline std::vector<std::uint64_t> sieve_primes(std::uint64_t limit) {
    std::vector<std::uint64_t> out;
    if (limit < 2) return out;
    std::vector<bool> composite(limit + 1, false);
    for (std::uint64_t p = 2; p * p <= limit; ++p)
        if (!composite[p])
            for (std::uint64_t q = p * p; q <= limit; q += p) composite[q] = true;
    out.reserve(static_cast<std::size_t>(1.3 * limit / std::log(static_cast<double>(limit) + 1.0)) + 8);
    for (std::uint64_t p = 2; p <= limit; ++p)
        if (!composite[p]) out.push_back(p);
    return out;
}

inline constexpr std::uint64_t kSharedSieveLimit = std::uint64_t{1} << 22;

/// Process-wide table of primes below kSharedSieveLimit.  Built once on first
/// use, read-only afterwards.
inline const std::vector<std::uint64_t>& shared_primes() {
    static const std::vector<std::uint64_t> table = sieve_primes(kSharedSieveLimit);
    return table;
}

inline std::vector<std::uint64_t> primes_up_to(std::uint64_t limit) {
    if (limit <= kSharedSieveLimit) {
        const auto& t = shared_primes();
        auto end = std::upper_bound(t.begin(), t.end(), limit);
        return {t.begin(), end};
    }
    return sieve_primes(limit);
}

/// Primality flags for the integers of [lo, hi] (segmented sieve).
inline std::vector<std::uint8_t> prime_flags(std::int64_t lo, std::int64_t hi) {
    std::vector<std::uint8_t> flags;
    if (hi < lo) return flags;
    flags.assign(static_cast<std::size_t>(hi - lo + 1), 0);
    if (hi < 2) return flags;
    const std::int64_t start = std::max<std::int64_t>(lo, 2);
    for (std::int64_t x = start; x <= hi; ++x) flags[static_cast<std::size_t>(x - lo)] = 1;
    const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(hi))) + 1;
    for (std::uint64_t p : primes_up_to(root)) {
        const auto ip = static_cast<std::int64_t>(p);
        if (ip * ip > hi) break;
        std::int64_t first = std::max(ip * ip, (start + ip - 1) / ip * ip);
        for (std::int64_t q = first; q <= hi; q += ip) flags[static_cast<std::size_t>(q - lo)] = 0;
    }
    return flags;
}

namespace detail {

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

} // namespace detail

/// Deterministic Miller-Rabin for 64-bit integers.
inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = detail::powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

using Factorization = std::vector<std::pair<std::uint64_t, unsigned>>;

/// Prime factorization of n >= 1 by trial division (primes ascending).
inline Factorization factorize(std::uint64_t n) {
    Factorization f;
    if (n <= 1) return f;
    auto take = [&](std::uint64_t p) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) f.emplace_back(p, e);
    };
    take(2);
    take(3);
    for (std::uint64_t p = 5; p <= n / p; p += 6) {
        take(p);
        take(p + 2);
    }
    if (n > 1) f.emplace_back(n, 1);
    return f;
}

/// p-adic valuation of a nonzero integer.
inline unsigned valuation(std::uint64_t n, std::uint64_t p) {
    unsigned e = 0;
    while (n != 0 && n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

inline unsigned valuation(const BigInt& n, std::uint64_t p) {
    if (n == 0) throw DomainError("valuation of zero");
    BigInt q = abs(n);
    const BigInt bp(static_cast<unsigned long>(p));
    unsigned e = 0;
    while (mpz_divisible_p(q.get_mpz_t(), bp.get_mpz_t())) {
        mpz_divexact(q.get_mpz_t(), q.get_mpz_t(), bp.get_mpz_t());
        ++e;
    }
    return e;
}

/// Product of the primes <= p.
inline std::uint64_t primorial(std::uint64_t p) {
    std::uint64_t r = 1;
    for (std::uint64_t q : primes_up_to(p)) r = checked_mul(r, q);
    return r;
}

} // namespace zhat
