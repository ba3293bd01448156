#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "compiled_set.hpp"
#include "errors.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "primes.hpp"

namespace zhat {

/// mu(m Zhat^n) = m^-n.
inline Rational haar_ideal(std::uint64_t m, unsigned n) {
    if (m < 1) throw DomainError("modulus must be >= 1");
    return Rational(BigInt(1), big_pow(m, n));
}

/// A divisibility chain of moduli m_1 | m_2 | ...
class ModulusChain {
public:
    enum class Kind { Primorial, Factorial, PrimorialPower, Explicit };

    static ModulusChain primorial() { return ModulusChain(Kind::Primorial, 1, {}); }
    static ModulusChain factorial() { return ModulusChain(Kind::Factorial, 1, {}); }
    static ModulusChain primorial_power(unsigned k) {
        if (k < 1) throw DomainError("primorial power must be >= 1");
        return ModulusChain(k == 1 ? Kind::Primorial : Kind::PrimorialPower, k, {});
    }
    static ModulusChain explicit_list(std::vector<std::uint64_t> moduli) {
        if (moduli.empty()) throw DomainError("explicit chain is empty");
        for (std::size_t i = 0; i < moduli.size(); ++i) {
            if (moduli[i] < 1) throw DomainError("chain moduli must be >= 1");
            if (i && (moduli[i] == moduli[i - 1] || moduli[i] % moduli[i - 1] != 0))
                throw DomainError("chain is not a strict divisibility chain at " + std::to_string(moduli[i - 1]) + " -> " +
                                  std::to_string(moduli[i]));
        }
        return ModulusChain(Kind::Explicit, 1, std::move(moduli));
    }

    /// "primorial", "factorial", "primorialK" / "primorial^K", or a comma list.
    static ModulusChain parse(const std::string& text) {
        if (text == "primorial") return primorial();
        if (text == "factorial") return factorial();
        if (text.rfind("primorial", 0) == 0) {
            std::string k = text.substr(9);
            if (!k.empty() && k[0] == '^') k = k.substr(1);
            try {
                std::size_t used = 0;
                const unsigned long v = std::stoul(k, &used);
                if (used == k.size() && v >= 1 && v <= 64) return primorial_power(static_cast<unsigned>(v));
            } catch (const std::exception&) {
            }
            throw DomainError("bad chain '" + text + "'");
        }
        std::string body = text.rfind("explicit:", 0) == 0 ? text.substr(9) : text;
        std::vector<std::uint64_t> mods;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                const unsigned long long v = std::stoull(item, &used);
                if (used != item.size()) throw DomainError("");
                mods.push_back(v);
            } catch (const std::exception&) {
                throw DomainError("bad chain '" + text + "': expected primorial, factorial, primorialK or a comma list");
            }
        }
        return explicit_list(std::move(mods));
    }

    Kind kind() const { return kind_; }
    unsigned power() const { return power_; }

    std::string str() const {
        switch (kind_) {
        case Kind::Primorial: return "primorial";
        case Kind::Factorial: return "factorial";
        case Kind::PrimorialPower: return "primorial" + std::to_string(power_);
        case Kind::Explicit: break;
        }
        std::string s;
        for (auto m : list_) s += (s.empty() ? "" : ",") + std::to_string(m);
        return s;
    }

    /// The first `count` moduli, fewer if the next one overflows 64 bits.
    std::vector<std::uint64_t> levels(std::size_t count) const {
        if (kind_ == Kind::Explicit) return {list_.begin(), list_.begin() + static_cast<std::ptrdiff_t>(std::min(count, list_.size()))};
        std::vector<std::uint64_t> out;
        std::uint64_t m = 1;
        std::uint64_t j = 1;
        const auto& primes = shared_primes();
        while (out.size() < count) {
            std::uint64_t f = 0;
            if (kind_ == Kind::Factorial) f = ++j;
            else f = checked_pow(primes[out.size()], power_);
            if (f == 0) break;
            try {
                m = checked_mul(m, f);
            } catch (const ResourceError&) {
                break;
            }
            out.push_back(m);
        }
        return out;
    }

    std::size_t size_hint() const { return kind_ == Kind::Explicit ? list_.size() : 64; }

private:
    ModulusChain(Kind k, unsigned power, std::vector<std::uint64_t> list) : kind_(k), power_(power), list_(std::move(list)) {}

    Kind kind_;
    unsigned power_;
    std::vector<std::uint64_t> list_;
};

struct TraceLevel {
    std::size_t index = 0;
    std::uint64_t modulus = 1;
    std::uint64_t residue_count = 0;
    Rational measure;
    ImageMode mode = ImageMode::Exact;
};

struct MeasureTrace {
    std::string chain;
    unsigned dim = 1;
    std::vector<TraceLevel> levels;
    /// True when every level is an exact image (values bound mu from above).
    bool certified = true;
    bool complete = true;
    bool assumes_dirichlet = false;
    std::vector<std::string> notes;

    bool nonincreasing() const {
        for (std::size_t i = 1; i < levels.size(); ++i)
            if (levels[i].measure > levels[i - 1].measure) return false;
        return true;
    }
};

/// Level measures |pi_m(X)| / m^n along a chain.  N is the truncation bound
/// for TRUNCATED sets (0: max(m, 10^6) in dimension 1, m otherwise).
inline MeasureTrace closure_measure_trace(const CompiledSet& set, const ModulusChain& chain, std::size_t count,
                                          std::int64_t N = 0) {
    MeasureTrace t;
    t.chain = chain.str();
    t.dim = set.dim();
    t.certified = set.mode() == ImageMode::Exact;
    t.assumes_dirichlet = set.assumes_dirichlet();
    const auto moduli = chain.levels(count);
    if (moduli.size() < count && chain.kind() != ModulusChain::Kind::Explicit) {
        t.complete = false;
        t.notes.push_back("chain modulus overflows 64 bits after level " + std::to_string(moduli.size()));
    }
    if (!t.certified) t.notes.push_back("UNCERTIFIED: truncated images give lower bounds for the level measures");
    for (std::size_t j = 0; j < moduli.size(); ++j) {
        const std::uint64_t m = moduli[j];
        std::int64_t bound = N;
        if (bound == 0) bound = static_cast<std::int64_t>(set.dim() == 1 ? std::max<std::uint64_t>(m, 1'000'000) : m);
        try {
            const ResidueImage img = set.residue_image(m, std::max<std::int64_t>(bound, static_cast<std::int64_t>(m)));
            const std::uint64_t c = img.count();
            t.levels.push_back({j + 1, m, c, Rational(big_from_u64(c), big_pow(m, set.dim())), img.mode});
            t.levels.back().measure.canonicalize();
        } catch (const ResourceError& e) {
            t.complete = false;
            t.notes.push_back(std::string("resource limit at level ") + std::to_string(j + 1) + ": " + e.what());
            break;
        }
    }
    return t;
}

inline std::string trace_csv(const MeasureTrace& t) {
    std::ostringstream os;
    os << "level_index,modulus,residue_count,measure_num,measure_den,measure_float,mode\n";
    for (const auto& l : t.levels) {
        os << l.index << ',' << l.modulus << ',' << l.residue_count << ',' << l.measure.get_num().get_str() << ','
           << l.measure.get_den().get_str() << ',';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", to_double(l.measure));
        os << buf << ',' << to_string(l.mode) << '\n';
    }
    return os.str();
}

/// mu of the complement of a_1 Z u ... u a_n Z in Zhat, by inclusion-exclusion
/// over all subsets of the list.
inline Rational multiples_measure_ie(const std::vector<std::uint64_t>& moduli) {
    constexpr std::size_t kMaxModuli = 24;
    constexpr std::size_t kMaxLcmBits = 1 << 14;
    if (moduli.empty()) throw DomainError("modulus list is empty");
    for (auto a : moduli)
        if (a < 1) throw DomainError("moduli must be >= 1");
    if (moduli.size() > kMaxModuli)
        throw ResourceError("inclusion-exclusion over " + std::to_string(moduli.size()) + " moduli exceeds the limit of " +
                            std::to_string(kMaxModuli) + "; reduce the list (drop moduli divisible by others)");
    BigInt L = 1;
    for (auto a : moduli) mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), big_from_u64(a).get_mpz_t());
    if (mpz_sizeinbase(L.get_mpz_t(), 2) > kMaxLcmBits)
        throw ResourceError("lcm of the moduli is too large; reduce the list (drop moduli divisible by others)");
    // sum over J of (-1)^|J| L / lcm(J), then divide by L
    BigInt acc = 0;
    std::vector<BigInt> lcms(moduli.size() + 1);
    std::function<void(std::size_t, std::size_t, bool)> walk = [&](std::size_t depth, std::size_t from, bool odd) {
        const BigInt q = L / lcms[depth];
        if (odd) acc -= q;
        else acc += q;
        for (std::size_t i = from; i < moduli.size(); ++i) {
            mpz_lcm(lcms[depth + 1].get_mpz_t(), lcms[depth].get_mpz_t(), big_from_u64(moduli[i]).get_mpz_t());
            walk(depth + 1, i + 1, !odd);
        }
    };
    lcms[0] = 1;
    walk(0, 0, false);
    Rational r(acc, L);
    r.canonicalize();
    return r;
}

/// Local factor 1 - c_p / p^k.
struct LocalFactor {
    std::function<Rational(std::uint64_t)> c;
    double c_max = 0;
    unsigned k = 2;
    std::string text;

    /// "1", or "1-c/p^k" with integer c >= 0 and k >= 1 ("1-1/p" means k = 1).
    static LocalFactor parse(const std::string& spec) {
        std::string s;
        for (char ch : spec)
            if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
        LocalFactor f;
        f.text = s;
        if (s == "1") {
            f.c = [](std::uint64_t) { return Rational(0); };
            f.c_max = 0;
            return f;
        }
        auto bad = [&] { return DomainError("nonconforming local factor '" + spec + "': expected 1-c/p^k"); };
        if (s.rfind("1-", 0) != 0) throw bad();
        const auto slash = s.find("/p");
        if (slash == std::string::npos) throw bad();
        unsigned long long c = 0, k = 1;
        try {
            std::size_t used = 0;
            const std::string cs = s.substr(2, slash - 2);
            c = std::stoull(cs, &used);
            if (used != cs.size()) throw bad();
            const std::string rest = s.substr(slash + 2);
            if (!rest.empty()) {
                if (rest[0] != '^') throw bad();
                const std::string ks = rest.substr(1);
                k = std::stoull(ks, &used);
                if (used != ks.size()) throw bad();
            }
        } catch (const std::logic_error&) {
            throw bad();
        }
        if (k < 1 || k > 64) throw bad();
        f.k = static_cast<unsigned>(k);
        f.c_max = static_cast<double>(c);
        f.c = [c](std::uint64_t) { return Rational(big_from_u64(c)); };
        return f;
    }
};

/// Bracket for prod over all p of (1 - c_p/p^k), from the partial product over
/// p <= P and an integral-comparison tail bound.
inline Bracket euler_product(const LocalFactor& f, std::uint64_t P) {
    if (P < 2) throw DomainError("prime cutoff must be >= 2");
    if (!f.c) throw DomainError("local factor has no coefficient function");
    const auto primes = P <= kSharedSieveLimit ? primes_up_to(P) : sieve_primes(P);
    long double prod = 1.0L;
    for (auto p : primes) {
        const Rational c = f.c(p);
        if (c < 0 || to_double(c) > f.c_max) throw DomainError("local coefficient outside [0, c_max] at p=" + std::to_string(p));
        const long double x = static_cast<long double>(to_double(c)) / std::pow(static_cast<long double>(p), f.k);
        if (x > 1) throw DomainError("local factor is negative at p=" + std::to_string(p));
        prod *= 1.0L - x;
    }
    const long double rel = 8 * std::numeric_limits<long double>::epsilon() * (primes.size() + 1);
    Bracket b;
    b.cutoff = static_cast<double>(P);
    b.hi = std::min(1.0, round_up(static_cast<double>(prod * (1 + rel))));
    if (f.c_max == 0) {
        b.lo = b.hi = 1.0;
        return b;
    }
    if (f.k == 1) {
        b.lo = 0;
        b.flags.push_back("DIVERGENT-TAIL");
        return b;
    }
    // log(1 - x) >= -2x for x <= 1/2, and sum_{n>P} n^-k <= P^(1-k)/(k-1)
    if (f.c_max / std::pow(static_cast<long double>(P + 1), f.k) > 0.5L) throw DomainError("cutoff too small for the tail bound");
    const long double tail = 2.0L * f.c_max * std::pow(static_cast<long double>(P), 1.0L - f.k) / (f.k - 1);
    b.lo = std::max(0.0, round_down(static_cast<double>(prod * (1 - rel) * std::exp(-tail))));
    return b;
}

/// [S_N + (N+1)^(1-s)/(s-1), S_N + N^(1-s)/(s-1)] for zeta(s).
inline Bracket zeta_bracket(double s, std::uint64_t N, unsigned threads = 1) {
    if (!(s > 1)) throw DomainError("zeta_bracket needs s > 1");
    if (N < 2) throw DomainError("zeta_bracket needs N >= 2");
    const long double ls = s;
    // summed from the small terms up for accuracy
    const long double S = chunked_sum(0, N, threads, [&](std::uint64_t i) { return std::pow(static_cast<long double>(N - i), -ls); });
    const long double lo_tail = std::pow(static_cast<long double>(N + 1), 1 - ls) / (ls - 1);
    const long double hi_tail = std::pow(static_cast<long double>(N), 1 - ls) / (ls - 1);
    const long double pad = 4 * std::numeric_limits<long double>::epsilon() * (S + hi_tail) * std::log2(static_cast<long double>(N) + 2);
    Bracket b;
    b.cutoff = static_cast<double>(N);
    b.lo = round_down(static_cast<double>(S + lo_tail - pad));
    b.hi = round_up(static_cast<double>(S + hi_tail + pad));
    return b;
}

} // namespace zhat
