#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "compiled_set.hpp"
#include "errors.hpp"
#include "measure.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "primes.hpp"

namespace zhat {

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

/// Partial Dirichlet sum over X n [1, N] with a bracket on the tail.
struct DirichletTruncation {
    std::uint64_t cutoff = 0;
    double s = 0;
    long double partial = 0;
    long double tail_lo = 0, tail_hi = 0;
    std::vector<std::string> flags;

    long double lo() const { return partial + tail_lo; }
    long double hi() const { return partial + tail_hi; }
};

namespace detail {

inline long double pow_neg(std::uint64_t k, long double s) { return std::pow(static_cast<long double>(k), -s); }

inline bool known_finite(const CompiledSet& set, std::uint64_t N) {
    const auto* f = std::get_if<FiniteSet>(&set.expr().root->v);
    if (!f) return false;
    return std::all_of(f->values.begin(), f->values.end(), [&](std::int64_t v) { return v <= static_cast<std::int64_t>(N); });
}

} // namespace detail

/// zeta_X(s) = sum over positive members k of X of k^-s (dimension 1).
inline DirichletTruncation zeta_set(const CompiledSet& set, double s, std::uint64_t N) {
    if (!(s > 1)) throw DomainError("zeta_set needs s > 1");
    if (set.dim() != 1) throw DomainError("zeta_set is defined for dimension 1");
    if (N < 1) throw DomainError("cutoff must be >= 1");
    const auto flags = set.indicator(Box{1, 1, static_cast<std::int64_t>(N)});
    DirichletTruncation t;
    t.cutoff = N;
    t.s = s;
    const long double ls = s;
    const unsigned threads = set.options().threads;
    t.partial = chunked_sum(0, N, threads, [&](std::uint64_t i) {
        const std::uint64_t k = N - i;
        return flags[k - 1] ? detail::pow_neg(k, ls) : 0.0L;
    });
    if (detail::known_finite(set, N)) {
        t.flags.push_back("FINITE-SET");
    } else {
        t.tail_hi = std::pow(static_cast<long double>(N), 1 - ls) / (ls - 1);
        t.flags.push_back("SUBSET-TAIL");
    }
    return t;
}

/// Bracket for zeta_X(s) / zeta(s), clipped to [0, 1].
inline Bracket delta_ratio(const CompiledSet& set, double s, std::uint64_t N) {
    const DirichletTruncation x = zeta_set(set, s, N);
    const Bracket z = zeta_bracket(s, std::max<std::uint64_t>(N, 2), set.options().threads);
    Bracket b;
    b.cutoff = static_cast<double>(N);
    b.lo = std::clamp(round_down(static_cast<double>(x.lo() / z.hi), 2), 0.0, 1.0);
    b.hi = std::clamp(round_up(static_cast<double>(x.hi() / z.lo), 2), 0.0, 1.0);
    b.flags = x.flags;
    return b;
}

inline double von_mangoldt(std::uint64_t n) {
    if (n == 0) throw DomainError("von Mangoldt function is undefined at 0");
    if (n == 1) return 0.0;
    const auto f = factorize(n);
    return f.size() == 1 ? std::log(static_cast<double>(f[0].first)) : 0.0;
}

/// |log n - sum_{d | n} Lambda(d)| < tol, summing over every divisor.
inline bool vm_identity_check(std::uint64_t n, double tol) {
    if (n == 0) throw DomainError("n must be >= 1");
    std::vector<std::uint64_t> divisors{1};
    for (auto [p, e] : factorize(n)) {
        const std::size_t base = divisors.size();
        std::uint64_t pk = 1;
        for (unsigned i = 1; i <= e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < base; ++j) divisors.push_back(divisors[j] * pk);
        }
    }
    double sum = 0;
    for (auto d : divisors) sum += von_mangoldt(d);
    return std::fabs(std::log(static_cast<double>(n)) - sum) < tol;
}

struct DlogReport {
    double s = 0;
    std::uint64_t N = 0;
    double tol = 0;
    double lhs = 0;  ///< (-sum log n n^-s) / (sum n^-s)
    double rhs = 0;  ///< -sum Lambda(n) n^-s
    double difference = 0;
    double tail_bound = 0;
    Verdict verdict = Verdict::Inconclusive;
};

/// Compares zeta'/zeta with -sum Lambda(n) n^-s at cutoff N.
inline DlogReport dlog_zeta_check(double s, std::uint64_t N, double tol, unsigned threads = 1) {
    if (!(s > 1)) throw DomainError("dlog_zeta_check needs s > 1");
    if (N < 3) throw DomainError("cutoff must be >= 3");
    const long double ls = s;
    const auto primes = N <= kSharedSieveLimit ? primes_up_to(N) : sieve_primes(N);
    const long double Z = chunked_sum(0, N, threads, [&](std::uint64_t i) { return detail::pow_neg(N - i, ls); });
    const long double A = chunked_sum(0, N, threads, [&](std::uint64_t i) {
        const std::uint64_t n = N - i;
        return std::log(static_cast<long double>(n)) * detail::pow_neg(n, ls);
    });
    long double V = 0;
    for (auto it = primes.rbegin(); it != primes.rend(); ++it) {
        const long double lp = std::log(static_cast<long double>(*it));
        for (long double q = *it; q <= N; q *= *it) V += lp * std::pow(q, -ls);
    }
    // Integral comparison; log x / x^s is decreasing for x >= 3 when s > 1.
    const long double lN = std::log(static_cast<long double>(N));
    const long double Tz = std::pow(static_cast<long double>(N), 1 - ls) / (ls - 1);
    const long double Ta = std::pow(static_cast<long double>(N), 1 - ls) * (lN / (ls - 1) + 1 / ((ls - 1) * (ls - 1)));
    DlogReport r;
    r.s = s;
    r.N = N;
    r.tol = tol;
    r.lhs = static_cast<double>(-A / Z);
    r.rhs = static_cast<double>(-V);
    r.difference = std::fabs(r.lhs - r.rhs);
    // zeta'/zeta lies in [-(A+Ta)/Z, -A/(Z+Tz)]; -sum Lambda n^-s within Ta (Lambda <= log)
    const long double spread = (A + Ta) / Z - A / (Z + Tz);
    r.tail_bound = static_cast<double>(spread + Ta) + 1e-12;
    if (r.difference > tol + r.tail_bound) r.verdict = Verdict::Fail;
    else if (r.tail_bound > tol) r.verdict = Verdict::Inconclusive;
    else r.verdict = Verdict::Pass;
    return r;
}

/**
 * Inclusion-exclusion Dirichlet series of the complement of a_1 Z u ... u a_n Z:
 * the signed terms (-1)^|J| lcm(J)^-s, collected by lcm.
 */
class IEDirichlet {
public:
    explicit IEDirichlet(std::vector<std::uint64_t> moduli) : moduli_(std::move(moduli)) {
        if (moduli_.empty()) throw DomainError("modulus list is empty");
        if (moduli_.size() > 24) throw ResourceError("inclusion-exclusion over more than 24 moduli");
        std::map<BigInt, BigInt> terms;
        std::function<void(std::size_t, const BigInt&, int)> walk = [&](std::size_t from, const BigInt& l, int sign) {
            terms[l] += sign;
            for (std::size_t i = from; i < moduli_.size(); ++i) {
                BigInt next;
                mpz_lcm(next.get_mpz_t(), l.get_mpz_t(), big_from_u64(moduli_[i]).get_mpz_t());
                walk(i + 1, next, -sign);
            }
        };
        walk(0, BigInt(1), 1);
        for (auto& [l, c] : terms)
            if (c != 0) terms_.emplace_back(l, c);
    }

    const std::vector<std::uint64_t>& moduli() const { return moduli_; }
    const std::vector<std::pair<BigInt, BigInt>>& terms() const { return terms_; }

    double eval(double s) const {
        long double acc = 0;
        for (const auto& [l, c] : terms_) acc += c.get_d() * std::exp(-s * std::log(static_cast<long double>(l.get_d())));
        return static_cast<double>(acc);
    }

    Rational at_one() const {
        Rational acc = 0;
        for (const auto& [l, c] : terms_) acc += Rational(c, l);
        acc.canonicalize();
        return acc;
    }

private:
    std::vector<std::uint64_t> moduli_;
    std::vector<std::pair<BigInt, BigInt>> terms_;
};

namespace detail {

/// Drops moduli divisible by another; 1 in the list makes the set empty.
inline std::vector<std::uint64_t> primitive(std::vector<std::uint64_t> a) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::vector<std::uint64_t> out;
    for (auto x : a)
        if (std::none_of(out.begin(), out.end(), [&](std::uint64_t y) { return x % y == 0; })) out.push_back(x);
    return out;
}

/// delta(a, s) = delta(a[1:], s) - a_1^-s delta({a_i / gcd(a_i, a_1)}, s), with
/// T(a_1) supplying a_1^-s in the chosen number type.
template <class T, class Pow>
T de_recursive(const std::vector<std::uint64_t>& list, const Pow& pow_neg, std::map<std::vector<std::uint64_t>, T>& memo) {
    const auto a = primitive(list);
    if (a.empty()) return T(1);
    if (a[0] == 1) return T(0);
    if (auto it = memo.find(a); it != memo.end()) return it->second;
    const std::uint64_t a1 = a[0];
    std::vector<std::uint64_t> rest(a.begin() + 1, a.end()), reduced;
    for (auto x : rest) reduced.push_back(x / std::gcd(x, a1));
    T v = de_recursive<T>(rest, pow_neg, memo) - pow_neg(a1) * de_recursive<T>(reduced, pow_neg, memo);
    memo.emplace(a, v);
    return v;
}

} // namespace detail

/// delta(complement of union a_i Z, s) for s >= 1, via the divisibility
/// recursion (independent of the subset expansion).
inline double de_delta_exact(const std::vector<std::uint64_t>& moduli, double s) {
    if (!(s >= 1)) throw DomainError("de_delta_exact needs s >= 1");
    if (moduli.empty()) throw DomainError("modulus list is empty");
    std::map<std::vector<std::uint64_t>, long double> memo;
    const long double ls = s;
    return static_cast<double>(detail::de_recursive<long double>(
        moduli, [&](std::uint64_t a) { return std::pow(static_cast<long double>(a), -ls); }, memo));
}

/// The same recursion at s = 1 in exact rationals.
inline Rational de_delta_at_one(const std::vector<std::uint64_t>& moduli) {
    if (moduli.empty()) throw DomainError("modulus list is empty");
    std::map<std::vector<std::uint64_t>, Rational> memo;
    Rational r = detail::de_recursive<Rational>(moduli, [](std::uint64_t a) { return Rational(BigInt(1), big_from_u64(a)); }, memo);
    r.canonicalize();
    return r;
}

inline std::string de_delta_csv(const std::vector<std::uint64_t>& moduli, const std::vector<double>& s_grid) {
    std::ostringstream os;
    os << "s,value\n";
    char buf[64];
    for (double s : s_grid) {
        std::snprintf(buf, sizeof buf, "%.10g,%.15g\n", s, de_delta_exact(moduli, s));
        os << buf;
    }
    return os.str();
}

} // namespace zhat
