#pragma once

#include <cctype>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "primes.hpp"

namespace zhat {

/// An element of N u {inf}.
class ExtNat {
public:
    constexpr ExtNat() = default;
    constexpr ExtNat(std::uint64_t v) : value_(v) {}

    static constexpr ExtNat inf() {
        ExtNat e;
        e.inf_ = true;
        return e;
    }

    constexpr bool is_inf() const { return inf_; }
    constexpr bool is_finite() const { return !inf_; }
    constexpr std::uint64_t value() const { return value_; }

    friend constexpr bool operator==(const ExtNat&, const ExtNat&) = default;

    friend constexpr std::strong_ordering operator<=>(const ExtNat& a, const ExtNat& b) {
        if (a.inf_ || b.inf_) return a.inf_ == b.inf_ ? std::strong_ordering::equal
                                     : a.inf_        ? std::strong_ordering::greater
                                                     : std::strong_ordering::less;
        return a.value_ <=> b.value_;
    }

    friend constexpr ExtNat operator+(const ExtNat& a, const ExtNat& b) {
        if (a.inf_ || b.inf_) return inf();
        return ExtNat(a.value_ + b.value_);
    }

    std::string str() const { return inf_ ? "inf" : std::to_string(value_); }

private:
    std::uint64_t value_ = 0;
    bool inf_ = false;
};

inline ExtNat min(const ExtNat& a, const ExtNat& b) { return a < b ? a : b; }
inline ExtNat max(const ExtNat& a, const ExtNat& b) { return a < b ? b : a; }

/**
 * A finitely presented supernatural number prod p^{e_p}, e_p in N u {inf}.
 *
 * Only nonzero exponents are stored, so the empty map is the unit 1 and two
 * values compare equal iff they have the same exponent at every prime.
 */
class Supernatural {
public:
    Supernatural() = default;

    /// Builds from (prime, exponent) pairs; zero exponents are dropped and
    /// repeated primes accumulate.
    static Supernatural from_exponents(const std::vector<std::pair<std::uint64_t, ExtNat>>& pairs) {
        Supernatural s;
        for (const auto& [p, e] : pairs) {
            if (!is_prime(p)) throw DomainError("supernatural base " + std::to_string(p) + " is not prime");
            if (e == ExtNat(0)) continue;
            auto it = s.exps_.find(p);
            if (it == s.exps_.end())
                s.exps_.emplace(p, e);
            else
                it->second = it->second + e;
        }
        return s;
    }

    static Supernatural prime_power(std::uint64_t p, ExtNat e) { return from_exponents({{p, e}}); }

    ExtNat exponent(std::uint64_t p) const {
        auto it = exps_.find(p);
        return it == exps_.end() ? ExtNat(0) : it->second;
    }

    const std::map<std::uint64_t, ExtNat>& exponents() const { return exps_; }
    bool is_one() const { return exps_.empty(); }

    /// True when every exponent is finite, i.e. the value is a positive integer.
    bool is_finite() const {
        for (const auto& [p, e] : exps_)
            if (e.is_inf()) return false;
        return true;
    }

    friend bool operator==(const Supernatural&, const Supernatural&) = default;

    friend Supernatural operator*(const Supernatural& a, const Supernatural& b) {
        Supernatural r = a;
        for (const auto& [p, e] : b.exps_) {
            auto it = r.exps_.find(p);
            if (it == r.exps_.end())
                r.exps_.emplace(p, e);
            else
                it->second = it->second + e;
        }
        return r;
    }

    /// Canonical text form, e.g. "2^inf*3^2*5"; the empty product prints as "1".
    std::string str() const {
        if (exps_.empty()) return "1";
        std::string out;
        for (const auto& [p, e] : exps_) {
            if (!out.empty()) out += '*';
            out += std::to_string(p);
            if (e != ExtNat(1)) out += "^" + e.str();
        }
        return out;
    }

    static Supernatural parse(const std::string& text);

private:
    std::map<std::uint64_t, ExtNat> exps_;
};

/// rho(k): the factorization of |k| as a supernatural number.
inline Supernatural rho(std::int64_t k) {
    if (k == 0) throw DomainError("rho(0) is the zero ideal and has no supernatural representation here");
    std::uint64_t a = k < 0 ? static_cast<std::uint64_t>(-(k + 1)) + 1 : static_cast<std::uint64_t>(k);
    std::vector<std::pair<std::uint64_t, ExtNat>> pairs;
    for (auto [p, e] : factorize(a)) pairs.emplace_back(p, ExtNat(e));
    return Supernatural::from_exponents(pairs);
}

inline Supernatural mul(const Supernatural& a, const Supernatural& b) { return a * b; }

/// a | b iff v_p(a) <= v_p(b) for every p.
inline bool divides(const Supernatural& a, const Supernatural& b) {
    for (const auto& [p, e] : a.exponents())
        if (e > b.exponent(p)) return false;
    return true;
}

inline std::pair<Supernatural, Supernatural> gcd_lcm(const Supernatural& a, const Supernatural& b) {
    std::vector<std::pair<std::uint64_t, ExtNat>> g, l;
    for (const auto& [p, e] : a.exponents()) {
        const ExtNat f = b.exponent(p);
        g.emplace_back(p, min(e, f));
        l.emplace_back(p, max(e, f));
    }
    for (const auto& [p, f] : b.exponents())
        if (a.exponent(p) == ExtNat(0)) l.emplace_back(p, f);
    return {Supernatural::from_exponents(g), Supernatural::from_exponents(l)};
}

/// Number of distinct primes in the support.
inline ExtNat omega(const Supernatural& s) { return ExtNat(s.exponents().size()); }

/// Sum of exponents.
inline ExtNat Omega(const Supernatural& s) {
    ExtNat total(0);
    for (const auto& [p, e] : s.exponents()) total = total + e;
    return total;
}

inline Supernatural Supernatural::parse(const std::string& text) {
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto number = [&](const char* what) -> std::uint64_t {
        skip();
        if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
            throw ParseError(std::string("bad supernatural literal"), i, what);
        std::uint64_t v = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            const std::uint64_t d = static_cast<std::uint64_t>(text[i] - '0');
            if (v > (std::numeric_limits<std::uint64_t>::max() - d) / 10)
                throw ParseError("integer too large", i);
            v = v * 10 + d;
            ++i;
        }
        return v;
    };
    skip();
    if (text.compare(i, 1, "1") == 0) {
        std::size_t j = i + 1;
        while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j == text.size()) return {};
    }
    std::vector<std::pair<std::uint64_t, ExtNat>> pairs;
    std::uint64_t last = 0;
    while (true) {
        const std::size_t at = i;
        const std::uint64_t p = number("prime");
        if (!is_prime(p)) throw ParseError(std::to_string(p) + " is not prime", at);
        if (p <= last) throw ParseError("primes must be strictly increasing", at);
        last = p;
        ExtNat e(1);
        skip();
        if (i < text.size() && text[i] == '^') {
            ++i;
            skip();
            if (text.compare(i, 3, "inf") == 0) {
                e = ExtNat::inf();
                i += 3;
            } else {
                e = ExtNat(number("exponent or inf"));
            }
        }
        pairs.emplace_back(p, e);
        skip();
        if (i == text.size()) break;
        if (text[i] != '*') throw ParseError("unexpected character", i, "'*' or end of input");
        ++i;
    }
    return from_exponents(pairs);
}

/// Per-prime verdict of limit_profile over the inspected window.
enum class LimitStatus { Stabilized, Diverging, Unsettled };

inline const char* to_string(LimitStatus s) {
    switch (s) {
    case LimitStatus::Stabilized: return "stabilized";
    case LimitStatus::Diverging: return "diverging";
    case LimitStatus::Unsettled: return "unsettled";
    }
    return "?";
}

struct PrimeTrack {
    std::uint64_t prime = 0;
    std::vector<unsigned> valuations;  // over the window, oldest first
    LimitStatus status = LimitStatus::Unsettled;
};

/// Coordinatewise valuation profile of an integer sequence.  Statuses are
/// witnesses over the window only.
struct ValuationProfile {
    std::uint64_t prime_bound = 0;
    std::size_t terms = 0;
    std::size_t window = 0;
    std::vector<PrimeTrack> tracks;

    const PrimeTrack& track(std::uint64_t p) const {
        for (const auto& t : tracks)
            if (t.prime == p) return t;
        throw DomainError("prime " + std::to_string(p) + " not tracked");
    }
};

/**
 * Valuations v_p(x_k) for p <= prime_bound over the last `window` of the
 * first `terms` elements of the sequence (indices start at 1).
 *
 * Constant over the window -> Stabilized; nondecreasing with a strict overall
 * increase -> Diverging (a witness for v_p -> inf); anything else Unsettled.
 */
inline ValuationProfile limit_profile(const std::function<BigInt(std::size_t)>& seq, std::uint64_t prime_bound,
                                      std::size_t terms, std::size_t window = 0) {
    if (prime_bound < 1 || terms < 1) throw DomainError("limit_profile needs P >= 1 and at least one term");
    if (window == 0 || window > terms) window = terms;
    ValuationProfile prof{prime_bound, terms, window, {}};
    std::vector<BigInt> xs;
    for (std::size_t k = terms - window + 1; k <= terms; ++k) {
        BigInt x = seq(k);
        if (x == 0) throw DomainError("sequence term " + std::to_string(k) + " is zero");
        xs.push_back(std::move(x));
    }
    for (std::uint64_t p : primes_up_to(prime_bound)) {
        PrimeTrack t{p, {}, LimitStatus::Unsettled};
        for (const auto& x : xs) t.valuations.push_back(valuation(x, p));
        const bool constant = std::adjacent_find(t.valuations.begin(), t.valuations.end(),
                                                 std::not_equal_to<>()) == t.valuations.end();
        const bool monotone = std::is_sorted(t.valuations.begin(), t.valuations.end());
        if (constant)
            t.status = LimitStatus::Stabilized;
        else if (monotone && t.valuations.back() > t.valuations.front())
            t.status = LimitStatus::Diverging;
        prof.tracks.push_back(std::move(t));
    }
    return prof;
}

} // namespace zhat
