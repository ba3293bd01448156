#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "compiled_set.hpp"
#include "density.hpp"
#include "errors.hpp"
#include "measure.hpp"
#include "numeric.hpp"
#include "primes.hpp"
#include "residue_image.hpp"

namespace zhat {

struct VerificationReport {
    std::string theorem;
    Json inputs = Json::object();
    Json quantities = Json::object();
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::string> narrative;
};

namespace detail {

inline Json rational_json(const Rational& q) { return Json{{"exact", to_string(q)}, {"float", to_double(q)}}; }

inline Json bracket_json(const Bracket& b) {
    Json j{{"lo", b.lo}, {"hi", b.hi}, {"certified", b.certified}, {"cutoff", b.cutoff}};
    if (!b.flags.empty()) j["flags"] = b.flags;
    return j;
}

inline std::string join_u64(const std::vector<std::uint64_t>& v, const char* sep = ",") {
    std::string s;
    for (auto x : v) s += (s.empty() ? "" : sep) + std::to_string(x);
    return s;
}

inline double distance_to(double x, double lo, double hi) { return x < lo ? lo - x : (x > hi ? x - hi : 0.0); }

/// Verdict combining certified checks and estimator checks.
inline Verdict combine(bool certified_ok, bool estimates_ok) {
    if (!certified_ok) return Verdict::Fail;
    return estimates_ok ? Verdict::Pass : Verdict::Inconclusive;
}

} // namespace detail

// ---------------------------------------------------------------------------

struct DavenportErdosInput {
    /// Explicit moduli; if empty the family p^power for primes p <= pmax.
    std::vector<std::uint64_t> moduli;
    unsigned power = 2;
    std::uint64_t pmax = 31;
    std::vector<double> s_grid;  ///< empty: 50 points from 1.001 to 3
    std::int64_t r_max = 10'000'000;
    double tol = 5e-3;
    unsigned threads = 1;
};

inline std::vector<std::uint64_t> de_family(const DavenportErdosInput& in) {
    if (!in.moduli.empty()) return in.moduli;
    if (in.power < 1) throw DomainError("family exponent must be >= 1");
    std::vector<std::uint64_t> f;
    for (auto p : primes_up_to(in.pmax)) {
        const std::uint64_t q = checked_pow(p, in.power);
        if (q == 0) throw ResourceError("family member overflows");
        f.push_back(q);
    }
    if (f.empty()) throw DomainError("family is empty");
    return f;
}

/**
 * Complement of a set of multiples: inclusion-exclusion measures along the
 * family, the Dirichlet-series ratio by the divisibility recursion, and the
 * empirical asymptotic and logarithmic densities.
 */
inline VerificationReport davenport_erdos(const DavenportErdosInput& in) {
    VerificationReport rep;
    rep.theorem = "davenport-erdos";
    const auto fam = de_family(in);
    if (fam.size() > 20) throw ResourceError("family has " + std::to_string(fam.size()) + " members; at most 20 are supported");
    std::vector<double> s_grid = in.s_grid;
    if (s_grid.empty())
        for (int i = 0; i < 50; ++i) s_grid.push_back(1.001 + (3.0 - 1.001) * i / 49.0);
    std::sort(s_grid.begin(), s_grid.end());
    rep.inputs = {{"family", detail::join_u64(fam)}, {"r_max", in.r_max}, {"tol", in.tol}, {"s_points", s_grid.size()}};
    if (in.moduli.empty()) rep.inputs["generator"] = "p^" + std::to_string(in.power) + ", p <= " + std::to_string(in.pmax);

    // (a) inclusion-exclusion along prefixes
    bool ie_monotone = true;
    Json ie = Json::array();
    Rational prev = 1, last = 1;
    for (std::size_t n = 1; n <= fam.size(); ++n) {
        last = multiples_measure_ie(std::vector<std::uint64_t>(fam.begin(), fam.begin() + static_cast<std::ptrdiff_t>(n)));
        if (last > prev) ie_monotone = false;
        prev = last;
        ie.push_back({{"n", n}, {"measure", to_string(last)}, {"float", to_double(last)}});
    }
    rep.quantities["ie_measures"] = ie;
    rep.quantities["ie_nonincreasing"] = ie_monotone;

    // (b) delta(X_n, s) by recursion
    Json deltas = Json::array();
    bool delta_increasing = true;
    double pd = -1;
    for (double s : s_grid) {
        const double v = de_delta_exact(fam, s);
        if (!(v > pd)) delta_increasing = false;
        pd = v;
        deltas.push_back({{"s", s}, {"delta", v}});
    }
    const Rational at_one = de_delta_at_one(fam);
    const bool meets = at_one == last;
    rep.quantities["delta"] = deltas;
    rep.quantities["delta_increasing"] = delta_increasing;
    rep.quantities["delta_at_1"] = to_string(at_one);
    rep.quantities["delta_at_1_equals_ie"] = meets;

    // limit bracket for mu over the whole family
    Bracket limit;
    limit.hi = to_double(last);
    limit.lo = limit.hi;
    if (in.moduli.empty()) {
        const Bracket ep = euler_product(LocalFactor::parse(in.power == 1 ? "1-1/p" : "1-1/p^" + std::to_string(in.power)), 1'000'000);
        limit.lo = std::min(ep.lo, limit.hi);
        limit.flags = ep.flags;
        if (ep.has_flag("DIVERGENT-TAIL")) rep.narrative.push_back("DIVERGENT-TAIL: the full family has measure 0");
    }
    rep.quantities["limit_bracket"] = detail::bracket_json(limit);

    // (c) empirical densities of the integer complement
    std::vector<std::string> parts;
    SetOptions opts;
    opts.threads = in.threads;
    const CompiledSet X = compile("!multiples(" + detail::join_u64(fam) + ")", opts);
    const auto grid = geometric_grid(in.r_max);
    const DensityReport das = density_alpha(X, 0, grid);
    const DensityReport dlog = density_alpha(X, -1, grid);
    const double log_est = dlog.increment_est.value_or(0.5 * (dlog.lower_est + dlog.upper_est));
    const double as_dist = std::max(detail::distance_to(das.lower_est, limit.lo, limit.hi), detail::distance_to(das.upper_est, limit.lo, limit.hi));
    const double log_dist = detail::distance_to(log_est, limit.lo, limit.hi);
    rep.quantities["d_as"] = {{"lower", das.lower_est}, {"upper", das.upper_est}, {"distance", as_dist}};
    rep.quantities["d_log"] = {{"estimate", log_est},
                               {"ratio_lower", dlog.lower_est},
                               {"ratio_upper", dlog.upper_est},
                               {"distance", log_dist}};
    const bool certified_ok = ie_monotone && delta_increasing && meets;
    const bool estimates_ok = as_dist <= in.tol && log_dist <= in.tol;
    rep.verdict = detail::combine(certified_ok, estimates_ok);
    rep.narrative.push_back(std::string("inclusion-exclusion measures ") + (ie_monotone ? "are" : "are NOT") + " nonincreasing");
    rep.narrative.push_back(std::string("delta(X, s) ") + (delta_increasing ? "increases" : "does NOT increase") + " along the s grid");
    rep.narrative.push_back(std::string("delta(X, 1) ") + (meets ? "equals" : "differs from") + " the inclusion-exclusion measure");
    rep.narrative.push_back("d_log is the increment ratio of log-weighted sums over the tail window");
    return rep;
}

// ---------------------------------------------------------------------------

/// Residues of primes <= prime_bound mod m against units u {q mod m : q | m}.
inline VerificationReport dirichlet_coverage(std::uint64_t m_max, std::uint64_t prime_bound) {
    if (m_max < 2) throw DomainError("m_max must be >= 2");
    if (prime_bound < 2) throw DomainError("prime bound must be >= 2");
    VerificationReport rep;
    rep.theorem = "dirichlet";
    rep.inputs = {{"m_max", m_max}, {"prime_bound", prime_bound}};
    const auto primes = prime_bound <= kSharedSieveLimit ? primes_up_to(prime_bound) : sieve_primes(prime_bound);
    const CompiledSet P = compile("primes");
    bool certified_ok = true, covered = true;
    Json missing = Json::array(), samples = Json::object();
    for (std::uint64_t m = 2; m <= m_max; ++m) {
        std::vector<std::uint8_t> seen(m, 0);
        for (auto p : primes) seen[p % m] = 1;
        const ResidueImage expected = P.residue_image(m);
        for (std::uint64_t r = 0; r < m; ++r) {
            const bool exp = expected.bits.test(r);
            if (seen[r] && !exp) {
                certified_ok = false;
                rep.narrative.push_back("prime in class " + std::to_string(r) + " mod " + std::to_string(m) + " outside units u divisor-primes");
            }
            if (!seen[r] && exp) {
                covered = false;
                if (missing.size() < 20) missing.push_back({{"m", m}, {"class", r}});
            }
        }
        if (m == 2 || m == 12) {
            Json cls = Json::array();
            for (std::uint64_t r = 0; r < m; ++r)
                if (seen[r]) cls.push_back(r);
            samples[std::to_string(m)] = cls;
        }
    }
    rep.quantities["missing"] = missing;
    rep.quantities["images"] = samples;
    rep.verdict = detail::combine(certified_ok, covered);
    if (!covered) rep.narrative.push_back("some unit classes have no prime below the bound; raise prime_bound");
    else rep.narrative.push_back("every m <= " + std::to_string(m_max) + " has image units u divisor-primes");
    return rep;
}

// ---------------------------------------------------------------------------

struct OmegaLevel {
    std::uint64_t P = 0;
    std::uint64_t modulus = 0;
    Rational direct, closed_form;
    std::string route;
};

/// sum_{|S| <= k} prod_{p in S} 1/(p-1), times prod (1 - 1/p).
inline Rational omega_closed_form(unsigned k, const std::vector<std::uint64_t>& primes) {
    std::vector<Rational> e(k + 1, Rational(0));
    e[0] = 1;
    for (auto p : primes) {
        const Rational t(BigInt(1), big_from_u64(p - 1));
        for (unsigned j = k; j >= 1; --j) e[j] += e[j - 1] * t;
    }
    Rational sum = 0, prod = 1;
    for (const auto& v : e) sum += v;
    for (auto p : primes) prod *= Rational(big_from_u64(p - 1), big_from_u64(p));
    Rational r = sum * prod;
    r.canonicalize();
    return r;
}

/// Fraction of residues mod prod p divisible by at most k of the primes:
/// direct enumeration within budget, else counting CRT coordinates.
inline std::pair<Rational, std::string> omega_direct(unsigned k, const std::vector<std::uint64_t>& primes, std::uint64_t budget) {
    std::uint64_t m = 1;
    for (auto p : primes) m = checked_mul(m, p);
    if (m <= budget) {
        std::uint64_t good = 0;
        for (std::uint64_t r = 0; r < m; ++r) {
            unsigned c = 0;
            for (auto p : primes)
                if (r % p == 0 && ++c > k) break;
            if (c <= k) ++good;
        }
        Rational q(big_from_u64(good), big_from_u64(m));
        q.canonicalize();
        return {q, "enumeration"};
    }
    // residue r <-> (r mod p); divisible by p on exactly one of the p coordinates
    std::vector<BigInt> cnt(primes.size() + 1, 0);
    cnt[0] = 1;
    for (auto p : primes) {
        for (std::size_t j = cnt.size() - 1; j >= 1; --j) cnt[j] = cnt[j] * (p - 1) + cnt[j - 1];
        cnt[0] *= (p - 1);
    }
    BigInt good = 0;
    for (unsigned j = 0; j <= k && j < cnt.size(); ++j) good += cnt[j];
    Rational q(good, big_from_u64(m));
    q.canonicalize();
    return {q, "crt-count"};
}

inline VerificationReport omega_bound_measure(unsigned k, const std::vector<std::uint64_t>& P_list, std::uint64_t budget = 100'000'000) {
    if (P_list.empty()) throw DomainError("prime cutoff list is empty");
    VerificationReport rep;
    rep.theorem = "omega";
    rep.inputs = {{"k", k}, {"P", P_list}, {"budget", budget}};
    bool match = true, decreasing = true;
    std::optional<Rational> prev;
    Json trace = Json::array();
    for (auto P : P_list) {
        const auto primes = primes_up_to(P);
        if (primes.empty()) throw DomainError("no primes below cutoff " + std::to_string(P));
        if (primes.size() > 20) throw DomainError("at most 20 primes are supported");
        auto [direct, route] = omega_direct(k, primes, budget);
        const Rational cf = omega_closed_form(k, primes);
        std::uint64_t m = 1;
        for (auto p : primes) m *= p;
        if (direct != cf) match = false;
        if (prev && !(direct < *prev)) decreasing = false;
        prev = direct;
        trace.push_back({{"P", P}, {"modulus", m}, {"direct", to_string(direct)}, {"closed_form", to_string(cf)},
                         {"float", to_double(direct)}, {"route", route}});
    }
    rep.quantities["trace"] = trace;
    rep.quantities["closed_form_matches"] = match;
    rep.quantities["strictly_decreasing"] = decreasing;
    rep.verdict = match && decreasing ? Verdict::Pass : Verdict::Fail;
    rep.narrative.push_back("each level value bounds mu of {omega(x) <= " + std::to_string(k) + "} from above");
    return rep;
}

// ---------------------------------------------------------------------------

/// CRT product test of pi_m(X) at each level.  FAIL means a certified level
/// whose image is not a product of its prime-power components.
inline VerificationReport eulerian_check(const CompiledSet& set, const std::vector<std::uint64_t>& m_list, std::int64_t N = 0) {
    VerificationReport rep;
    rep.theorem = "eulerian";
    rep.inputs = {{"set", set.text()}, {"levels", m_list}, {"mode", to_string(set.mode())}};
    if (set.mode() == ImageMode::Truncated) rep.inputs["N"] = N;
    Json levels = Json::array();
    bool all_product = true;
    for (auto m : m_list) {
        ResidueImage img = set.mode() == ImageMode::Exact ? set.residue_image(m) : set.truncated_image(m, std::max<std::int64_t>(N, m));
        img.mode = ImageMode::Exact;  // split the observed image; certification is tracked separately
        const CrtSplit sp = crt_split(img);
        levels.push_back({{"m", m}, {"image_size", sp.image_size}, {"product_size", sp.product_size.get_str()}, {"product", sp.is_product}});
        if (!sp.is_product) {
            all_product = false;
            rep.narrative.push_back("NOT-product at m=" + std::to_string(m) + ": " + std::to_string(sp.image_size) + " classes vs " +
                                    sp.product_size.get_str() + " in the product of components");
        }
    }
    rep.quantities["levels"] = levels;
    rep.quantities["product_at_all_levels"] = all_product;
    if (set.mode() == ImageMode::Truncated) rep.verdict = Verdict::Inconclusive;
    else rep.verdict = all_product ? Verdict::Pass : Verdict::Fail;
    return rep;
}

// ---------------------------------------------------------------------------

struct AsdmltpInput {
    std::vector<std::uint64_t> moduli;
    std::int64_t r_max = 1'000'000;
    std::uint64_t m_check = 0;  ///< 0: lcm of the moduli
    std::int64_t N = 1'000'000;
    double tol = 1e-2;
    unsigned threads = 1;
};

inline VerificationReport asdmltp_verify(const AsdmltpInput& in) {
    const auto& a = in.moduli;
    if (a.empty()) throw DomainError("modulus list is empty");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 2) throw DomainError("moduli must be >= 2");
        unsigned big_omega = 0;
        for (auto [p, e] : factorize(a[i])) big_omega += e;
        if (big_omega < 2)
            throw DomainError("modulus " + std::to_string(a[i]) +
                              " is prime; the theorem needs every modulus to have at least two prime factors counted with multiplicity");
        for (std::size_t j = 0; j < i; ++j)
            if (std::gcd(a[i], a[j]) != 1)
                throw DomainError("moduli " + std::to_string(a[j]) + " and " + std::to_string(a[i]) + " are not coprime");
    }
    VerificationReport rep;
    rep.theorem = "asdmltp";
    std::uint64_t L = 1;
    for (auto x : a) L = lcm_checked(L, x);
    const std::uint64_t mc = in.m_check ? in.m_check : L;
    rep.inputs = {{"moduli", a}, {"r_max", in.r_max}, {"m_check", mc}, {"N", in.N}, {"tol", in.tol}};

    Rational T = 1;
    for (auto x : a) T *= Rational(big_from_u64(x - 1), big_from_u64(x));
    T.canonicalize();
    const Rational ie = multiples_measure_ie(a);
    const bool identity = ie == T;
    rep.quantities["target"] = detail::rational_json(T);
    rep.quantities["ie"] = detail::rational_json(ie);
    rep.quantities["ie_equals_target"] = identity;

    SetOptions opts;
    opts.threads = in.threads;
    const CompiledSet X = compile("!multiples(" + detail::join_u64(a) + ")", opts);
    const DensityReport d = density_alpha(X, 0, geometric_grid(in.r_max));
    const double t = to_double(T);
    const bool dens_ok = std::fabs(d.lower_est - t) <= in.tol && std::fabs(d.upper_est - t) <= in.tol;
    rep.quantities["d_as"] = {{"lower", d.lower_est}, {"upper", d.upper_est}};

    // local conditions: r is attained iff a_i does not divide r for every a_i | m
    ResidueImage local(mc, 1, ImageMode::Exact);
    for (std::uint64_t r = 0; r < mc; ++r)
        if (std::none_of(a.begin(), a.end(), [&](std::uint64_t x) { return mc % x == 0 && r % x == 0; })) local.bits.set(r);
    const ResidueImage trunc = X.truncated_image(mc, std::max<std::int64_t>(in.N, static_cast<std::int64_t>(mc)));
    bool extra = false, same = true;
    for (std::uint64_t r = 0; r < mc; ++r) {
        if (trunc.bits.test(r) != local.bits.test(r)) same = false;
        if (trunc.bits.test(r) && !local.bits.test(r)) extra = true;
    }
    rep.quantities["level_check"] = {{"m", mc}, {"truncated_count", trunc.count()}, {"local_count", local.count()}, {"equal", same}};
    const bool certified_ok = identity && !extra;
    rep.verdict = detail::combine(certified_ok, dens_ok && same);
    rep.narrative.push_back(std::string("inclusion-exclusion ") + (identity ? "equals" : "differs from") + " the product of (1 - 1/a_i)");
    if (!same && !extra) rep.narrative.push_back("truncated image misses classes; raise N");
    return rep;
}

// ---------------------------------------------------------------------------

/// Local condition family: complement of U_p has local density c / p^e
/// (e = 0 means U_p is everything).
struct LocalSpec {
    std::string name;
    double c = 0;
    unsigned e = 0;
    unsigned k_p = 1;          ///< U_p is a residue set mod p^k_p
    std::string cut_out_set;   ///< DSL for {x : x mod p^k_p in U_p for all p}

    static LocalSpec preset(const std::string& name) {
        if (name == "squarefree") return {name, 1, 2, 2, "kfree(2)"};
        if (name == "units") return {name, 1, 1, 1, "finite(-1,1)"};
        if (name == "trivial") return {name, 0, 0, 1, "cong(0,1)"};
        if (name.rfind("kfree", 0) == 0) {
            std::string ks = name.substr(5);
            if (!ks.empty() && ks[0] == ':') ks = ks.substr(1);
            unsigned long k = 0;
            try {
                k = std::stoul(ks);
            } catch (const std::exception&) {
            }
            if (k >= 2 && k <= 63) return {name, 1, static_cast<unsigned>(k), static_cast<unsigned>(k), "kfree(" + std::to_string(k) + ")"};
        }
        throw DomainError("unknown local spec '" + name + "'; presets: squarefree, units, trivial, kfree:K");
    }
};

inline VerificationReport poonen_stoll_tail(const LocalSpec& spec, const std::vector<std::uint64_t>& cutoffs, std::int64_t r = 1'000'000,
                                            double tol = 1e-3) {
    if (cutoffs.empty()) throw DomainError("cutoff list is empty");
    VerificationReport rep;
    rep.theorem = "poonen-stoll";
    rep.inputs = {{"spec", spec.name}, {"cutoffs", cutoffs}, {"r", r}, {"tol", tol}};
    Json bounds = Json::array();
    bool converges = true;
    double last = 0;
    for (auto P : cutoffs) {
        double bound;
        if (spec.e == 0 || spec.c == 0) bound = 0;
        else if (spec.e == 1) {
            bound = std::numeric_limits<double>::infinity();
            converges = false;
        } else {
            // sum_{p > P} c p^-e <= c P^(1-e) / (e-1)
            bound = round_up(spec.c * std::pow(static_cast<double>(P), 1.0 - spec.e) / (spec.e - 1));
        }
        last = bound;
        bounds.push_back({{"cutoff", P}, {"tail_bound", std::isinf(bound) ? Json("divergent") : Json(bound)}});
    }
    rep.quantities["tail_bounds"] = bounds;
    Bracket prod;
    if (spec.e == 0 || spec.c == 0) {
        prod.lo = prod.hi = 1;
    } else {
        LocalFactor f = LocalFactor::parse("1-1/p^" + std::to_string(spec.e));
        prod = euler_product(f, std::max<std::uint64_t>(cutoffs.back(), 10'000));
    }
    rep.quantities["product_bracket"] = detail::bracket_json(prod);
    const CompiledSet X = compile(spec.cut_out_set);
    const DensityReport d = density_alpha(X, 0, geometric_grid(r));
    rep.quantities["empirical"] = {{"set", X.text()}, {"lower", d.lower_est}, {"upper", d.upper_est}};
    const double dist = std::max(detail::distance_to(d.lower_est, prod.lo, prod.hi), detail::distance_to(d.upper_est, prod.lo, prod.hi));
    if (!converges) {
        rep.verdict = Verdict::Inconclusive;
        rep.narrative.push_back("complement densities sum like 1/p and diverge: the tail condition fails");
        rep.narrative.push_back("the cut-out set is " + X.text() + " while the product of local sets has measure " +
                                (prod.has_flag("DIVERGENT-TAIL") ? "0 (divergent tail)" : std::to_string(prod.hi)));
    } else {
        const bool small = last <= tol;
        rep.verdict = small && dist <= 1e-2 ? Verdict::Pass : Verdict::Inconclusive;
        rep.narrative.push_back("tail bound at the last cutoff is " + std::to_string(last));
    }
    rep.quantities["empirical_distance"] = dist;
    return rep;
}

// ---------------------------------------------------------------------------

/// Upper density of X_m - X along a chain: classes of X mod m minus X itself.
inline VerificationReport mt_criterion(const CompiledSet& set, const ModulusChain& chain, std::size_t levels, std::int64_t r_max,
                                       double tol = 1e-2) {
    VerificationReport rep;
    rep.theorem = "mt";
    rep.inputs = {{"set", set.text()}, {"chain", chain.str()}, {"levels", levels}, {"r_max", r_max}, {"tol", tol}};
    const Box box = set.box(r_max);
    const auto flags = set.indicator(box);
    const auto grid = geometric_grid(r_max, 8);
    const std::uint64_t side = box.side();
    const unsigned n = set.dim();
    Json trace = Json::array();
    double last = 1;
    for (auto m : chain.levels(levels)) {
        ResidueImage img;
        try {
            img = set.residue_image(m, std::max<std::int64_t>(r_max, static_cast<std::int64_t>(m)));
        } catch (const ResourceError& e) {
            rep.narrative.push_back(std::string("stopped: ") + e.what());
            break;
        }
        // count gap points per sup-norm shell, then take ratios at grid radii
        std::vector<std::uint64_t> gap(static_cast<std::size_t>(r_max) + 1, 0);
        std::vector<std::uint64_t> t(n);
        for (std::uint64_t i = 0; i < flags.size(); ++i) {
            if (flags[i]) continue;
            std::uint64_t idx = i;
            std::int64_t s = 0;
            for (unsigned a = n; a-- > 0;) {
                const std::int64_t c = box.lo + static_cast<std::int64_t>(idx % side);
                idx /= side;
                t[a] = mod_floor(c, m);
                s = std::max(s, c < 0 ? -c : c);
            }
            if (img.contains(t)) ++gap[static_cast<std::size_t>(s)];
        }
        std::vector<double> ratios;
        std::uint64_t acc = 0;
        std::size_t g = 0;
        for (std::int64_t s = 0; s <= r_max && g < grid.size(); ++s) {
            acc += gap[static_cast<std::size_t>(s)];
            if (grid[g] == s) {
                const Box b = set.box(s);
                ratios.push_back(static_cast<double>(acc) / static_cast<double>(b.points()));
                ++g;
            }
        }
        const std::size_t w = std::min<std::size_t>(5, ratios.size());
        const double upper = *std::max_element(ratios.end() - static_cast<std::ptrdiff_t>(w), ratios.end());
        last = upper;
        trace.push_back({{"m", m}, {"level_measure", to_double(img.measure())}, {"gap_upper", upper}});
    }
    rep.quantities["trace"] = trace;
    rep.quantities["vanishes"] = last <= tol;
    rep.verdict = last <= tol ? Verdict::Pass : Verdict::Inconclusive;
    rep.narrative.push_back(last <= tol ? "gap trace falls below tolerance: density and closure measure agree at this scale"
                                        : "gap trace does not vanish at this scale; it tracks mu(closure) minus the lower density");
    return rep;
}

// ---------------------------------------------------------------------------

/// x_n for n >= 1: 0, 1, -1, 2, -2, ...
inline std::int64_t enumerate_integer(std::uint64_t n) {
    if (n == 1) return 0;
    const auto h = static_cast<std::int64_t>(n / 2);
    return n % 2 == 0 ? h : -h;
}

inline VerificationReport counterexample_cover(std::uint64_t a, unsigned K, std::uint64_t budget = 100'000'000) {
    if (a == 2) throw DomainError("a = 2 gives sum a^-n = 1, leaving no gap; use a >= 3");
    if (a < 3) throw DomainError("a must be >= 3");
    if (K < 1) throw DomainError("K must be >= 1");
    const std::uint64_t m = checked_pow(a, K);
    if (m == 0 || m > budget) throw ResourceError("level a^K exceeds the budget");
    VerificationReport rep;
    rep.theorem = "counterexample";
    rep.inputs = {{"a", a}, {"K", K}};
    Bitset cover(m);
    std::uint64_t an = 1;
    std::vector<std::int64_t> xs;
    for (unsigned n = 1; n <= K; ++n) {
        an *= a;
        const std::int64_t x = enumerate_integer(n);
        xs.push_back(x);
        for (std::uint64_t r = mod_floor(x, an); r < m; r += an) cover.set(r);
    }
    bool all_covered = true;
    for (auto x : xs) all_covered = all_covered && cover.test(mod_floor(x, m));
    const Rational comp(big_from_u64(m - cover.count()), big_from_u64(m));
    Rational bound = 1, geo = 0, p = 1;
    for (unsigned n = 1; n <= K; ++n) {
        p /= Rational(big_from_u64(a));
        geo += p;
    }
    bound -= geo;
    const Rational gap = Rational(1) - Rational(BigInt(1), big_from_u64(a - 1));
    const bool ok = comp >= bound && bound > gap && all_covered;
    rep.quantities["enumerated"] = xs;
    rep.quantities["all_enumerated_covered"] = all_covered;
    rep.quantities["complement_level_measure"] = detail::rational_json(Rational(comp));
    rep.quantities["bound"] = detail::rational_json(bound);
    rep.quantities["limit_gap"] = detail::rational_json(gap);
    rep.quantities["complement_density_on_enumerated"] = 0;
    rep.verdict = ok ? Verdict::Pass : Verdict::Fail;
    rep.narrative.push_back("the first " + std::to_string(K) + " enumerated integers all lie in U_K, yet the complement of U_K keeps measure >= " +
                            std::to_string(to_double(bound)));
    return rep;
}

// ---------------------------------------------------------------------------

/// Dense iff no finite set of primes meets every support.
inline VerificationReport union_dense_check(const std::vector<std::vector<std::uint64_t>>& supports, bool family_flag,
                                            std::uint64_t budget = 1'000'000) {
    if (supports.empty()) throw DomainError("supports list is empty");
    for (const auto& s : supports)
        if (s.empty()) throw DomainError("empty support");
    VerificationReport rep;
    rep.theorem = "union-dense";
    Json sj = Json::array();
    for (const auto& s : supports) sj.push_back(s);
    rep.inputs = {{"supports", sj}, {"family_flag", family_flag}};
    if (family_flag) {
        for (std::size_t i = 0; i < supports.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                for (auto p : supports[i])
                    if (std::find(supports[j].begin(), supports[j].end(), p) != supports[j].end())
                        throw DomainError("family flag needs pairwise disjoint supports");
        rep.quantities["dense"] = true;
        rep.verdict = Verdict::Pass;
        rep.narrative.push_back("DENSE: disjoint supports escape every finite prime set, so no finite hitting set exists");
        return rep;
    }
    std::set<std::uint64_t> uni;
    for (const auto& s : supports) uni.insert(s.begin(), s.end());
    const std::vector<std::uint64_t> primes(uni.begin(), uni.end());
    std::uint64_t tried = 0;
    std::vector<std::size_t> pick;
    std::optional<std::vector<std::uint64_t>> found;
    auto hits = [&](const std::vector<std::size_t>& idx) {
        for (const auto& s : supports) {
            bool h = false;
            for (auto i : idx)
                if (std::find(s.begin(), s.end(), primes[i]) != s.end()) h = true;
            if (!h) return false;
        }
        return true;
    };
    std::function<bool(std::size_t, std::size_t)> choose = [&](std::size_t from, std::size_t left) -> bool {
        if (left == 0) {
            if (++tried > budget) return true;
            if (hits(pick)) {
                found = std::vector<std::uint64_t>();
                for (auto i : pick) found->push_back(primes[i]);
                return true;
            }
            return false;
        }
        for (std::size_t i = from; i + left <= primes.size(); ++i) {
            pick.push_back(i);
            if (choose(i + 1, left - 1)) return true;
            pick.pop_back();
        }
        return false;
    };
    for (std::size_t size = 1; size <= primes.size() && !found && tried <= budget; ++size) {
        pick.clear();
        choose(0, size);
    }
    rep.quantities["candidates_tried"] = tried;
    if (found) {
        rep.quantities["dense"] = false;
        rep.quantities["hitting_set"] = *found;
        rep.verdict = Verdict::Pass;
        rep.narrative.push_back("NOT DENSE: hitting set {" + detail::join_u64(*found) + "}");
    } else {
        rep.verdict = Verdict::Inconclusive;
        rep.narrative.push_back("hitting-set search exceeded its budget");
    }
    return rep;
}

// ---------------------------------------------------------------------------

inline VerificationReport verify_axioms(std::size_t cases, std::uint64_t seed, std::size_t estimator_cases = 5, unsigned threads = 1) {
    const AxiomReport ax = axiom_suite(cases, seed, estimator_cases, 1'000'000, threads);
    VerificationReport rep;
    rep.theorem = "axioms";
    rep.inputs = {{"cases", cases}, {"seed", seed}, {"estimator_cases", estimator_cases}};
    auto dump = [](const std::vector<AxiomResult>& v) {
        Json j = Json::array();
        for (const auto& r : v) {
            Json e{{"axiom", r.axiom}, {"checks", r.checks}, {"failures", r.failures}};
            if (r.failures) e["witness"] = r.witness;
            j.push_back(e);
        }
        return j;
    };
    rep.quantities["periodic"] = dump(ax.exact);
    rep.quantities["deformed"] = dump(ax.deformed);
    Json est = Json::array();
    bool est_ok = true;
    for (const auto& e : ax.estimators) {
        est.push_back({{"set", e.set}, {"method", e.method}, {"expected", e.expected}, {"lower", e.lower}, {"upper", e.upper}, {"pass", e.pass}});
        est_ok = est_ok && e.pass;
    }
    rep.quantities["estimators"] = est;
    const bool exact_ok = AxiomReport::all_pass(ax.exact);
    bool deformed_ok = true;
    for (const auto& r : ax.deformed) {
        if (r.axiom == "Dn7") deformed_ok = deformed_ok && r.failures > 0;
        else deformed_ok = deformed_ok && r.failures == 0;
    }
    rep.verdict = detail::combine(exact_ok && deformed_ok, est_ok);
    rep.narrative.push_back(std::string("periodic density: ") + (exact_ok ? "all axioms hold exactly" : "axiom failure"));
    if (const auto* d7 = ax.find(ax.deformed, "Dn7"); d7 && d7->failures) rep.narrative.push_back("deformation fails Dn7: " + d7->witness);
    return rep;
}

} // namespace zhat
