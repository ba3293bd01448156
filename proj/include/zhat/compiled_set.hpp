#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"
#include "expr.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "primes.hpp"
#include "residue_image.hpp"
#include "sequences.hpp"

namespace zhat {

struct SetOptions {
    /// Restrict boxes to positive coordinates.  Unset: positive for
    /// dimension 1, symmetric for dimension >= 2.
    std::optional<bool> positive_only;
    /// Largest number of residue tuples or box points enumerated at once.
    std::uint64_t budget = 100'000'000;
    unsigned threads = 1;
    /// Preimage search radius for multivariate polynomial images (0: 1000
    /// for two variables, 100 for three).
    std::int64_t preimage_radius = 0;
};

using Point = std::vector<std::int64_t>;

/// Cube [lo, hi]^dim.
struct Box {
    unsigned dim = 1;
    std::int64_t lo = 0, hi = -1;

    std::uint64_t side() const { return hi < lo ? 0 : static_cast<std::uint64_t>(hi - lo) + 1; }
    std::uint64_t points() const { return checked_pow(side(), dim); }
};

namespace detail {

using Flags = std::vector<std::uint8_t>;

struct Ctx {
    unsigned dim;
    std::int64_t radius;
};

inline std::uint64_t uabs(std::int64_t x) { return x < 0 ? static_cast<std::uint64_t>(-(x + 1)) + 1 : static_cast<std::uint64_t>(x); }

/// Univariate helper: all critical points of f lie in [-C, C].
inline std::int64_t critical_radius(const std::vector<std::int64_t>& c) {
    const std::size_t d = c.size() - 1;
    if (d < 2) return 1;
    long double lead = std::fabs(static_cast<long double>(c[d]) * d);
    long double m = 0;
    for (std::size_t i = 0; i + 1 < d; ++i) m = std::max(m, std::fabs(static_cast<long double>(c[i + 1]) * (i + 1)) / lead);
    return static_cast<std::int64_t>(std::ceil(1 + m)) + 1;
}

/// Sign of f(t) - x, where overflow counts as beyond every int64.
inline int cmp_value(const Polynomial& f, std::int64_t t, std::int64_t x, int sign_at_t) {
    const std::int64_t v[3] = {t, 0, 0};
    auto val = f.eval(v);
    if (!val) return sign_at_t;
    return *val < x ? -1 : (*val > x ? 1 : 0);
}

inline int leading_sign(const std::vector<std::int64_t>& c, std::int64_t dir) {
    const std::size_t d = c.size() - 1;
    int s = c[d] > 0 ? 1 : -1;
    if (dir < 0 && d % 2 == 1) s = -s;
    return s;
}

inline bool univariate_hits(const Polynomial& f, std::int64_t x) {
    const auto c = f.univariate_coefficients();
    if (c.size() == 1) return c[0] == x;
    const std::int64_t C = critical_radius(c);
    for (std::int64_t t = -C; t <= C; ++t)
        if (cmp_value(f, t, x, 0) == 0) return true;
    for (std::int64_t dir : {1, -1}) {
        const int s = leading_sign(c, dir);
        // f is monotone on the tail; find the first t with s*(f(t)-x) >= 0.
        std::int64_t lo = C + 1, hi = C + 1;
        auto ahead = [&](std::int64_t u) { return s * cmp_value(f, dir * u, x, s) >= 0; };
        if (ahead(lo)) {
            if (cmp_value(f, dir * lo, x, s) == 0) return true;
            continue;
        }
        while (!ahead(hi)) {
            lo = hi;
            if (hi > (std::int64_t{1} << 61)) return false;
            hi *= 2;
        }
        while (hi - lo > 1) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            (ahead(mid) ? hi : lo) = mid;
        }
        if (cmp_value(f, dir * hi, x, s) == 0) return true;
    }
    return false;
}

inline std::int64_t poly_radius(const Polynomial& f, std::int64_t configured) {
    if (configured > 0) return configured;
    return f.arity() == 2 ? 1000 : 100;
}

template <class Fn>
void for_each_box_point(unsigned arity, std::int64_t R, Fn&& fn) {
    std::int64_t v[3] = {0, 0, 0};
    for (unsigned i = 0; i < arity; ++i) v[i] = -R;
    while (true) {
        fn(static_cast<const std::int64_t*>(v));
        unsigned i = arity;
        while (i-- > 0) {
            if (v[i] < R) {
                ++v[i];
                break;
            }
            v[i] = -R;
            if (i == 0) return;
        }
    }
}

/// Distinct values of a multivariate f over [-R, R]^arity, sorted (overflowing
/// evaluations skipped).
inline std::shared_ptr<const std::vector<std::int64_t>> poly_values(const PolyImage& n, std::int64_t configured) {
    const std::int64_t R = poly_radius(n.f, configured);
    std::lock_guard<std::mutex> lock(n.cache->mu);
    auto& slot = n.cache->tables[R];
    if (!slot) {
        std::vector<std::int64_t> v;
        for_each_box_point(n.f.arity(), R, [&](const std::int64_t* p) {
            if (auto val = n.f.eval(p)) v.push_back(*val);
        });
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        slot = std::make_shared<const std::vector<std::int64_t>>(std::move(v));
    }
    return slot;
}

inline bool contains_point(const Expr& e, std::span<const std::int64_t> x, const Ctx& ctx);

inline bool contains_point(const Expr& e, std::span<const std::int64_t> x, const Ctx& ctx) {
    return std::visit(
        [&](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Cong>) {
                const std::uint64_t r = mod_floor(n.r, n.m);
                return std::all_of(x.begin(), x.end(), [&](std::int64_t c) { return mod_floor(c, n.m) == r; });
            } else if constexpr (std::is_same_v<T, Multiples>) {
                for (auto a : n.moduli)
                    if (std::all_of(x.begin(), x.end(), [&](std::int64_t c) { return mod_floor(c, a) == 0; })) return true;
                return false;
            } else if constexpr (std::is_same_v<T, Coprime>) {
                std::uint64_t g = 0;
                for (auto c : x) g = std::gcd(g, uabs(c));
                return g == 1;
            } else if constexpr (std::is_same_v<T, KFree>) {
                if (x[0] == 0) return false;
                for (auto [p, e] : factorize(uabs(x[0])))
                    if (e >= n.k) return false;
                return true;
            } else if constexpr (std::is_same_v<T, Primes>) {
                return x[0] > 1 && is_prime(static_cast<std::uint64_t>(x[0]));
            } else if constexpr (std::is_same_v<T, PolyImage>) {
                if (n.f.arity() == 1) return univariate_hits(n.f, x[0]);
                const auto vals = poly_values(n, ctx.radius);
                return std::binary_search(vals->begin(), vals->end(), x[0]);
            } else if constexpr (std::is_same_v<T, LeadingDigit>) {
                if (x[0] <= 0) return false;
                std::int64_t v = x[0];
                while (v >= static_cast<std::int64_t>(n.base)) v /= n.base;
                return v == static_cast<std::int64_t>(n.digit);
            } else if constexpr (std::is_same_v<T, Seq>) {
                if (x[0] <= 0) return false;
                auto t = SequenceRegistry::instance().terms_up_to(n.name, x[0]);
                return std::binary_search(t.begin(), t.end(), x[0]);
            } else if constexpr (std::is_same_v<T, FiniteSet>) {
                return std::find(n.values.begin(), n.values.end(), x[0]) != n.values.end();
            } else if constexpr (std::is_same_v<T, Binary>) {
                const bool a = contains_point(n.lhs, x, ctx), b = contains_point(n.rhs, x, ctx);
                switch (n.op) {
                case BinaryOp::Union: return a || b;
                case BinaryOp::Intersection: return a && b;
                case BinaryOp::Difference: return a && !b;
                }
                return false;
            } else {
                return !contains_point(n.child, x, ctx);
            }
        },
        e->v);
}

inline void mark_progression(Flags& f, std::int64_t lo, std::int64_t hi, std::int64_t r, std::uint64_t m) {
    if (hi < lo) return;
    const std::uint64_t off = mod_floor(r - lo, m);  // lo + off = r (mod m)
    for (std::uint64_t i = off; i <= static_cast<std::uint64_t>(hi - lo); i += m) f[i] = 1;
}

inline void mark_poly_image(const PolyImage& n, std::int64_t lo, std::int64_t hi, Flags& out, const Ctx& ctx) {
    const Polynomial& f = n.f;
    auto mark = [&](std::optional<std::int64_t> v) {
        if (v && *v >= lo && *v <= hi) out[static_cast<std::size_t>(*v - lo)] = 1;
    };
    if (f.arity() > 1) {
        const auto vals = poly_values(n, ctx.radius);
        for (auto it = std::lower_bound(vals->begin(), vals->end(), lo); it != vals->end() && *it <= hi; ++it) mark(*it);
        return;
    }
    const auto c = f.univariate_coefficients();
    if (c.size() == 1) {
        mark(c[0]);
        return;
    }
    const std::int64_t C = critical_radius(c);
    for (std::int64_t t = -C; t <= C; ++t) {
        const std::int64_t v[3] = {t, 0, 0};
        mark(f.eval(v));
    }
    for (std::int64_t dir : {1, -1}) {
        const int s = leading_sign(c, dir);
        for (std::int64_t u = C + 1;; ++u) {
            const std::int64_t v[3] = {dir * u, 0, 0};
            auto val = f.eval(v);
            if (!val) break;
            if ((s > 0 && *val > hi) || (s < 0 && *val < lo)) break;
            mark(val);
        }
    }
}

/// Indicator of the node on the integer interval [lo, hi] (dimension 1).
inline Flags indicator_1d(const Expr& e, std::int64_t lo, std::int64_t hi, const Ctx& ctx) {
    const auto len = static_cast<std::size_t>(hi - lo + 1);
    Flags out(len, 0);
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Cong>) {
                mark_progression(out, lo, hi, n.r, n.m);
            } else if constexpr (std::is_same_v<T, Multiples>) {
                for (auto a : n.moduli) mark_progression(out, lo, hi, 0, a);
            } else if constexpr (std::is_same_v<T, KFree>) {
                std::fill(out.begin(), out.end(), 1);
                if (lo <= 0 && 0 <= hi) out[static_cast<std::size_t>(-lo)] = 0;
                const std::uint64_t bound = std::max(uabs(lo), uabs(hi));
                const auto root = static_cast<std::uint64_t>(std::pow(static_cast<long double>(bound), 1.0L / n.k)) + 2;
                for (std::uint64_t p : primes_up_to(root)) {
                    const std::uint64_t q = checked_pow(p, n.k);
                    if (q == 0 || q > bound) break;
                    const std::uint64_t off = mod_floor(-lo, q);
                    for (std::uint64_t i = off; i < len; i += q) out[i] = 0;
                }
            } else if constexpr (std::is_same_v<T, Primes>) {
                out = prime_flags(lo, hi);
            } else if constexpr (std::is_same_v<T, PolyImage>) {
                mark_poly_image(n, lo, hi, out, ctx);
            } else if constexpr (std::is_same_v<T, LeadingDigit>) {
                const std::int64_t b = n.base, d = n.digit;
                for (std::int64_t scale = 1;; scale *= b) {
                    const std::int64_t a = d * scale, z = (d + 1) * scale - 1;
                    if (a > hi) break;
                    for (std::int64_t v = std::max(a, lo); v <= std::min(z, hi); ++v) out[static_cast<std::size_t>(v - lo)] = 1;
                    if (scale > std::numeric_limits<std::int64_t>::max() / (b * (d + 1) + 1)) break;
                }
            } else if constexpr (std::is_same_v<T, Seq>) {
                if (hi >= 1)
                    for (auto v : SequenceRegistry::instance().terms_up_to(n.name, hi))
                        if (v >= lo) out[static_cast<std::size_t>(v - lo)] = 1;
            } else if constexpr (std::is_same_v<T, FiniteSet>) {
                for (auto v : n.values)
                    if (v >= lo && v <= hi) out[static_cast<std::size_t>(v - lo)] = 1;
            } else if constexpr (std::is_same_v<T, Coprime>) {
                throw DomainError("coprime() needs dimension >= 2");
            } else if constexpr (std::is_same_v<T, Binary>) {
                Flags a = indicator_1d(n.lhs, lo, hi, ctx), b = indicator_1d(n.rhs, lo, hi, ctx);
                for (std::size_t i = 0; i < len; ++i) {
                    switch (n.op) {
                    case BinaryOp::Union: out[i] = a[i] | b[i]; break;
                    case BinaryOp::Intersection: out[i] = a[i] & b[i]; break;
                    case BinaryOp::Difference: out[i] = a[i] & !b[i]; break;
                    }
                }
            } else {
                out = indicator_1d(n.child, lo, hi, ctx);
                for (auto& f : out) f = !f;
            }
        },
        e->v);
    return out;
}

/// Indicator on the cube [lo, hi]^dim, flattened with coordinate 0 most
/// significant.
inline Flags indicator_cube(const Expr& e, const Box& box, const Ctx& ctx) {
    const std::uint64_t side = box.side(), total = box.points();
    Flags out(total, 0);
    auto coord = [&](std::uint64_t idx, unsigned axis) {
        for (unsigned i = box.dim - 1; i > axis; --i) idx /= side;
        return box.lo + static_cast<std::int64_t>(idx % side);
    };
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Binary>) {
                Flags a = indicator_cube(n.lhs, box, ctx), b = indicator_cube(n.rhs, box, ctx);
                for (std::uint64_t i = 0; i < total; ++i) {
                    switch (n.op) {
                    case BinaryOp::Union: out[i] = a[i] | b[i]; break;
                    case BinaryOp::Intersection: out[i] = a[i] & b[i]; break;
                    case BinaryOp::Difference: out[i] = a[i] & !b[i]; break;
                    }
                }
            } else if constexpr (std::is_same_v<T, Complement>) {
                out = indicator_cube(n.child, box, ctx);
                for (auto& f : out) f = !f;
            } else if constexpr (std::is_same_v<T, Cong> || std::is_same_v<T, Multiples>) {
                std::vector<std::uint64_t> mods;
                std::int64_t r = 0;
                if constexpr (std::is_same_v<T, Cong>) {
                    mods = {n.m};
                    r = n.r;
                } else {
                    mods = n.moduli;
                }
                for (auto m : mods) {
                    Flags axis(side, 0);
                    mark_progression(axis, box.lo, box.hi, r, m);
                    for (std::uint64_t i = 0; i < total; ++i) {
                        bool all = true;
                        for (unsigned a = 0; a < box.dim && all; ++a) all = axis[static_cast<std::size_t>(coord(i, a) - box.lo)];
                        if (all) out[i] = 1;
                    }
                }
            } else if constexpr (std::is_same_v<T, Coprime>) {
                for (std::uint64_t i = 0; i < total; ++i) {
                    std::uint64_t g = 0;
                    for (unsigned a = 0; a < box.dim; ++a) g = std::gcd(g, uabs(coord(i, a)));
                    out[i] = g == 1;
                }
            } else {
                throw DomainError("one-dimensional atom used in dimension " + std::to_string(box.dim));
            }
        },
        e->v);
    return out;
}

inline bool is_exact(const Expr& e) {
    return std::visit(
        [](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, LeadingDigit> || std::is_same_v<T, Seq> || std::is_same_v<T, Complement>) return false;
            else if constexpr (std::is_same_v<T, Binary>) return n.op == BinaryOp::Union && is_exact(n.lhs) && is_exact(n.rhs);
            else return true;
        },
        e->v);
}

inline bool uses_primes(const Expr& e) {
    return std::visit(
        [](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Primes>) return true;
            else if constexpr (std::is_same_v<T, Binary>) return uses_primes(n.lhs) || uses_primes(n.rhs);
            else if constexpr (std::is_same_v<T, Complement>) return uses_primes(n.child);
            else return false;
        },
        e->v);
}

inline std::optional<std::uint64_t> period_of(const Expr& e) {
    return std::visit(
        [](const auto& n) -> std::optional<std::uint64_t> {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Cong>) return n.m;
            else if constexpr (std::is_same_v<T, Multiples>) {
                std::uint64_t l = 1;
                for (auto a : n.moduli) l = lcm_checked(l, a);
                return l;
            } else if constexpr (std::is_same_v<T, Binary>) {
                auto a = period_of(n.lhs), b = period_of(n.rhs);
                if (!a || !b) return std::nullopt;
                return lcm_checked(*a, *b);
            } else if constexpr (std::is_same_v<T, Complement>) return period_of(n.child);
            else return std::nullopt;
        },
        e->v);
}

inline void check_node_dims(const Expr& e, unsigned dim) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Binary>) {
                check_node_dims(n.lhs, dim);
                check_node_dims(n.rhs, dim);
            } else if constexpr (std::is_same_v<T, Complement>) {
                check_node_dims(n.child, dim);
            } else if constexpr (std::is_same_v<T, Seq>) {
                if (!SequenceRegistry::instance().contains(n.name)) {
                    std::string known;
                    for (const auto& s : SequenceRegistry::instance().names()) known += (known.empty() ? "" : ", ") + s;
                    throw DomainError("unknown sequence '" + n.name + "'; registered: " + known);
                }
            }
            const unsigned f = fixed_dim(e);
            if (f && f != dim)
                throw DomainError("dimension mismatch: node of dimension " + std::to_string(f) + " in a dimension " +
                                  std::to_string(dim) + " expression");
        },
        e->v);
}

} // namespace detail

/**
 * A set expression bound to a dimension, an image mode and enumeration
 * options.  Membership is total on Z^n; multivariate polynomial images are
 * searched over a bounded preimage box.
 */
class CompiledSet {
public:
    CompiledSet(SetExpr expr, SetOptions opts) : expr_(std::move(expr)), opts_(opts) {
        detail::check_node_dims(expr_.root, expr_.dim);
        mode_ = detail::is_exact(expr_.root) ? ImageMode::Exact : ImageMode::Truncated;
        if (!opts_.positive_only) opts_.positive_only = expr_.dim == 1;
    }

    const SetExpr& expr() const { return expr_; }
    unsigned dim() const { return expr_.dim; }
    ImageMode mode() const { return mode_; }
    bool positive_only() const { return *opts_.positive_only; }
    const SetOptions& options() const { return opts_; }
    std::string text() const { return print(expr_); }
    bool assumes_dirichlet() const { return mode_ == ImageMode::Exact && detail::uses_primes(expr_.root); }

    /// Period q such that X is a union of classes mod q, when structurally known.
    std::optional<std::uint64_t> period() const { return detail::period_of(expr_.root); }

    bool contains(std::span<const std::int64_t> x) const {
        if (x.size() != dim()) throw DomainError("point has wrong dimension");
        return detail::contains_point(expr_.root, x, ctx());
    }
    bool contains(std::int64_t x) const { return contains(std::span<const std::int64_t>(&x, 1)); }

    /// Indicator over [lo, hi]^n; ordering as in Box.
    std::vector<std::uint8_t> indicator(const Box& box) const {
        if (box.dim != dim()) throw DomainError("box has wrong dimension");
        const std::uint64_t pts = box.points();
        if (pts == 0 && box.side() != 0) throw ResourceError("box overflows");
        if (pts > opts_.budget)
            throw ResourceError("box of " + std::to_string(pts) + " points exceeds enumeration budget " + std::to_string(opts_.budget));
        if (dim() > 1) return detail::indicator_cube(expr_.root, box, ctx());
        std::vector<std::uint8_t> out(pts);
        const unsigned threads = std::max(1u, opts_.threads);
        std::vector<std::vector<std::uint8_t>> parts(threads);
        parallel_blocks(pts, threads, [&](std::size_t t, std::uint64_t b, std::uint64_t e) {
            if (b < e)
                parts[t] = detail::indicator_1d(expr_.root, box.lo + static_cast<std::int64_t>(b),
                                                box.lo + static_cast<std::int64_t>(e) - 1, ctx());
        });
        std::size_t at = 0;
        for (auto& p : parts) {
            std::copy(p.begin(), p.end(), out.begin() + static_cast<std::ptrdiff_t>(at));
            at += p.size();
        }
        return out;
    }

    /// The box used for a bound N: [1, N]^n in positive mode, else [-N, N]^n.
    Box box(std::int64_t N) const { return positive_only() ? Box{dim(), 1, N} : Box{dim(), -N, N}; }

    /// X n box(N), sorted lexicographically.
    std::vector<Point> members_in_box(std::int64_t N) const {
        const Box b = box(N);
        const auto flags = indicator(b);
        std::vector<Point> out;
        const std::uint64_t side = b.side();
        for (std::uint64_t i = 0; i < flags.size(); ++i) {
            if (!flags[i]) continue;
            Point p(dim());
            std::uint64_t idx = i;
            for (unsigned a = dim(); a-- > 0;) {
                p[a] = b.lo + static_cast<std::int64_t>(idx % side);
                idx /= side;
            }
            out.push_back(std::move(p));
        }
        return out;
    }

    std::vector<std::int64_t> members_1d(std::int64_t N) const {
        std::vector<std::int64_t> out;
        for (auto& p : members_in_box(N)) out.push_back(p[0]);
        return out;
    }

    /// pi_m(X): exact in EXACT mode, pi_m(X n [-N, N]^n) otherwise.
    ResidueImage residue_image(std::uint64_t m, std::int64_t N = 0) const {
        if (m < 1) throw DomainError("modulus must be >= 1");
        const std::uint64_t tuples = checked_pow(m, dim());
        if (tuples == 0 || tuples > opts_.budget)
            throw ResourceError("residue enumeration at level m=" + std::to_string(m) + " needs " + std::to_string(m) + "^" +
                                std::to_string(dim()) + " tuples, over budget " + std::to_string(opts_.budget));
        if (mode_ == ImageMode::Exact) {
            ResidueImage img = exact_image(expr_.root, m);
            img.assumes_dirichlet = assumes_dirichlet();
            return img;
        }
        return truncated_image(m, N);
    }

    /// Truncated image regardless of mode (used for cross-checks).
    ResidueImage truncated_image(std::uint64_t m, std::int64_t N) const {
        if (N < static_cast<std::int64_t>(m)) throw DomainError("truncation bound N must be >= m");
        const Box b{dim(), -N, N};
        const auto flags = indicator(b);
        ResidueImage img(m, dim(), ImageMode::Truncated);
        img.truncation = N;
        const std::uint64_t side = b.side();
        std::vector<std::uint64_t> t(dim());
        for (std::uint64_t i = 0; i < flags.size(); ++i) {
            if (!flags[i]) continue;
            std::uint64_t idx = i;
            for (unsigned a = dim(); a-- > 0;) {
                t[a] = mod_floor(b.lo + static_cast<std::int64_t>(idx % side), m);
                idx /= side;
            }
            img.bits.set(img.flatten(t));
        }
        return img;
    }

private:
    detail::Ctx ctx() const { return {dim(), opts_.preimage_radius}; }

    ResidueImage exact_image(const Expr& e, std::uint64_t m) const {
        const unsigned n = dim();
        ResidueImage img(m, n, ImageMode::Exact);
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Cong> || std::is_same_v<T, Multiples>) {
                    std::vector<std::pair<std::int64_t, std::uint64_t>> classes;
                    if constexpr (std::is_same_v<T, Cong>) classes = {{node.r, node.m}};
                    else
                        for (auto a : node.moduli) classes.emplace_back(0, a);
                    for (auto [r, m0] : classes) {
                        // s is attained mod m iff s = r mod gcd(m, m0), coordinatewise.
                        const std::uint64_t g = std::gcd(m, m0), rr = mod_floor(r, g);
                        std::vector<std::uint64_t> axis;
                        for (std::uint64_t s = rr; s < m; s += g) axis.push_back(s);
                        set_product(img, axis);
                    }
                } else if constexpr (std::is_same_v<T, KFree>) {
                    // class r excluded iff p^k | r for some p^j || m with j >= k
                    std::vector<std::uint64_t> bad;
                    for (auto [p, j] : factorize(m))
                        if (j >= node.k) bad.push_back(checked_pow(p, node.k));
                    for (std::uint64_t r = 0; r < m; ++r)
                        if (std::none_of(bad.begin(), bad.end(), [&](std::uint64_t q) { return r % q == 0; })) img.bits.set(r);
                } else if constexpr (std::is_same_v<T, Primes>) {
                    // units, plus the primes dividing m (relies on Dirichlet for the units)
                    for (std::uint64_t r = 0; r < m; ++r)
                        if (std::gcd(r, m) == 1) img.bits.set(r);
                    for (auto [p, j] : factorize(m)) img.bits.set(p % m);
                } else if constexpr (std::is_same_v<T, Coprime>) {
                    const auto fac = factorize(m);
                    std::vector<std::uint64_t> t(n);
                    for (std::uint64_t i = 0; i < img.tuples(); ++i) {
                        t = img.unflatten(i);
                        bool ok = true;
                        for (auto [p, j] : fac) {
                            if (std::all_of(t.begin(), t.end(), [&](std::uint64_t c) { return c % p == 0; })) {
                                ok = false;
                                break;
                            }
                        }
                        if (ok) img.bits.set(i);
                    }
                } else if constexpr (std::is_same_v<T, PolyImage>) {
                    const unsigned ar = node.f.arity();
                    const std::uint64_t pts = checked_pow(m, ar);
                    if (pts == 0 || pts > opts_.budget)
                        throw ResourceError("polynomial image at level m=" + std::to_string(m) + " needs " + std::to_string(m) + "^" +
                                            std::to_string(ar) + " evaluations, over budget");
                    std::uint64_t v[3] = {0, 0, 0};
                    for (std::uint64_t i = 0; i < pts; ++i) {
                        std::uint64_t idx = i;
                        for (unsigned a = 0; a < ar; ++a) {
                            v[a] = idx % m;
                            idx /= m;
                        }
                        img.bits.set(node.f.eval_mod(v, m));
                    }
                } else if constexpr (std::is_same_v<T, FiniteSet>) {
                    for (auto x : node.values) img.bits.set(mod_floor(x, m));
                } else if constexpr (std::is_same_v<T, Binary>) {
                    if (node.op != BinaryOp::Union) throw ModeError("no exact residue rule for intersections or differences");
                    img.bits = exact_image(node.lhs, m).bits;
                    img.bits |= exact_image(node.rhs, m).bits;
                } else {
                    throw ModeError("no exact residue rule for this node");
                }
            },
            e->v);
        return img;
    }

    /// Marks every tuple whose coordinates all lie in `axis`.
    static void set_product(ResidueImage& img, const std::vector<std::uint64_t>& axis) {
        if (axis.empty()) return;
        std::vector<std::size_t> pos(img.dim, 0);
        std::vector<std::uint64_t> t(img.dim);
        while (true) {
            for (unsigned a = 0; a < img.dim; ++a) t[a] = axis[pos[a]];
            img.bits.set(img.flatten(t));
            unsigned a = img.dim;
            while (a-- > 0) {
                if (++pos[a] < axis.size()) break;
                pos[a] = 0;
                if (a == 0) return;
            }
        }
    }

    SetExpr expr_;
    SetOptions opts_;
    ImageMode mode_ = ImageMode::Exact;
};

inline CompiledSet compile(const SetExpr& expr, SetOptions opts = {}) { return CompiledSet(expr, opts); }

inline CompiledSet compile(const std::string& text, SetOptions opts = {}) { return CompiledSet(parse_set(text), opts); }

} // namespace zhat
