#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "analytic.hpp"
#include "compiled_set.hpp"
#include "errors.hpp"
#include "measure.hpp"
#include "numeric.hpp"

namespace zhat {

using Json = nlohmann::ordered_json;

struct DensityReport {
    std::string method;
    Json params = Json::object();
    std::vector<double> grid;
    std::vector<double> values;
    /// Per-grid lower/upper values where the method has them (uniform
    /// inf/sup, analytic certified brackets, Buck level bounds).
    std::vector<double> values_lo, values_hi;
    double lower_est = 0, upper_est = 0;
    /// Stolz-Cesaro increment ratio across the tail window (alpha family).
    std::optional<double> increment_est;
    bool certified = false;
    std::vector<std::string> notes;
};

/// Geometric grid of `count` points with ratio 2 ending at top.
inline std::vector<std::int64_t> geometric_grid(std::int64_t top, std::size_t count = 12) {
    std::vector<std::int64_t> g;
    for (std::int64_t r = top; r >= 1 && g.size() < count; r /= 2) g.push_back(r);
    std::reverse(g.begin(), g.end());
    return g;
}

/// Points 10^k and 2*10^k up to top.  Increments between tail points then
/// span whole decades, which suits base-10 digit sets.
inline std::vector<std::int64_t> decade_grid(std::int64_t top) {
    std::vector<std::int64_t> g;
    for (std::int64_t p = 1; p <= top; p *= 10) {
        g.push_back(p);
        if (2 * p <= top) g.push_back(2 * p);
        if (p > top / 10) break;
    }
    return g;
}

namespace detail {

inline void check_grid(const std::vector<std::int64_t>& grid) {
    if (grid.empty()) throw DomainError("empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 1) throw DomainError("grid points must be >= 1");
        if (i && grid[i] <= grid[i - 1]) throw DomainError("grid must be strictly increasing");
    }
}

inline void tail_extract(DensityReport& rep, std::size_t tail_window) {
    const std::size_t w = std::clamp<std::size_t>(tail_window, 1, rep.values.size());
    const auto b = rep.values.end() - static_cast<std::ptrdiff_t>(w);
    rep.lower_est = *std::min_element(b, rep.values.end());
    rep.upper_est = *std::max_element(b, rep.values.end());
    rep.params["tail_window"] = w;
}

/// Points of the shell {max |k_i| = s} (symmetric) or {max k_i = s, k_i >= 1}.
inline long double shell_size(std::int64_t s, unsigned n, bool positive) {
    if (positive) return std::pow(static_cast<long double>(s), n) - std::pow(static_cast<long double>(s - 1), n);
    if (s == 0) return 1;
    return std::pow(static_cast<long double>(2 * s + 1), n) - std::pow(static_cast<long double>(2 * s - 1), n);
}

/// Members of X per shell s = 0..R.
inline std::vector<std::uint64_t> shell_counts(const CompiledSet& set, std::int64_t R) {
    const bool pos = set.positive_only();
    const Box box = set.box(R);
    const auto flags = set.indicator(box);
    std::vector<std::uint64_t> cnt(static_cast<std::size_t>(R) + 1, 0);
    const unsigned n = set.dim();
    const std::uint64_t side = box.side();
    for (std::uint64_t i = 0; i < flags.size(); ++i) {
        if (!flags[i]) continue;
        std::int64_t s = 0;
        std::uint64_t idx = i;
        for (unsigned a = 0; a < n; ++a) {
            const std::int64_t c = box.lo + static_cast<std::int64_t>(idx % side);
            idx /= side;
            s = std::max(s, c < 0 ? -c : c);
        }
        ++cnt[static_cast<std::size_t>(s)];
    }
    (void)pos;
    return cnt;
}

} // namespace detail

/**
 * alpha-density ratios m_a(X, r) / m_a(Z^n, r) with weights ||k||^alpha over
 * the sup-norm box of radius r; k = 0 is skipped for alpha < 0.
 */
inline DensityReport density_alpha(const CompiledSet& set, double alpha, const std::vector<std::int64_t>& grid,
                                   std::size_t tail_window = 5) {
    if (!(alpha >= -1 && alpha <= 0)) throw DomainError("alpha must lie in [-1, 0]");
    detail::check_grid(grid);
    const std::int64_t R = grid.back();
    const auto cnt = detail::shell_counts(set, R);
    const bool pos = set.positive_only();
    const unsigned n = set.dim();
    DensityReport rep;
    rep.method = alpha == 0 ? "ASYMPTOTIC" : "ALPHA";
    rep.params["alpha"] = alpha;
    rep.params["box"] = pos ? "[1,r]^n" : "[-r,r]^n";
    rep.params["norm"] = "sup";
    std::vector<long double> nums, dens;
    long double num = 0, den = 0;
    std::size_t g = 0;
    for (std::int64_t s = pos ? 1 : 0; s <= R; ++s) {
        if (!(s == 0 && alpha < 0)) {
            const long double w = alpha == 0 ? 1.0L : (alpha == -1 ? 1.0L / s : std::pow(static_cast<long double>(s), alpha));
            num += w * cnt[static_cast<std::size_t>(s)];
            den += w * detail::shell_size(s, n, pos);
        }
        while (g < grid.size() && grid[g] == s) {
            nums.push_back(num);
            dens.push_back(den);
            rep.grid.push_back(static_cast<double>(s));
            rep.values.push_back(den > 0 ? static_cast<double>(num / den) : 0.0);
            ++g;
        }
    }
    detail::tail_extract(rep, tail_window);
    const std::size_t w = rep.params["tail_window"].get<std::size_t>();
    if (w >= 2) {
        const std::size_t a = nums.size() - w, b = nums.size() - 1;
        if (dens[b] > dens[a]) rep.increment_est = static_cast<double>((nums[b] - nums[a]) / (dens[b] - dens[a]));
    }
    rep.notes.push_back("estimates from finite data: lower/upper are min/max over the last tail_window grid points");
    if (n > 1) rep.notes.push_back("box is the sup-norm ball");
    if (alpha < 0) rep.notes.push_back("k = 0 omitted from the weighted sums");
    if (rep.increment_est) rep.notes.push_back("increment_est is the ratio of sum increments between the first and last tail points");
    return rep;
}

/// Sup and inf of |X n W| / |W| over windows W = [k+1, k+L]^n inside [-R, R]^n.
inline DensityReport density_uniform(const CompiledSet& set, const std::vector<std::int64_t>& L_grid, std::int64_t R,
                                     std::size_t tail_window = 5) {
    detail::check_grid(L_grid);
    if (R < 1) throw DomainError("range must be >= 1");
    if (L_grid.back() > 2 * R) throw DomainError("window length exceeds 2R");
    const unsigned n = set.dim();
    if (n > 3) throw DomainError("uniform density supports dimension <= 3");
    const Box box{n, -R, R};
    const auto flags = set.indicator(box);
    const std::uint64_t side = box.side();
    DensityReport rep;
    rep.method = "UNIFORM";
    rep.params["R"] = R;
    // n-dimensional prefix sums (dimension 1 uses a running window).
    std::vector<std::uint64_t> pre;
    if (n > 1) {
        const std::uint64_t ps = side + 1;
        pre.assign(checked_pow(ps, n), 0);
        auto at = [&](std::uint64_t i, std::uint64_t j, std::uint64_t k) { return (i * ps + j) * (n == 3 ? ps : 1) + (n == 3 ? k : 0); };
        for (std::uint64_t i = 1; i <= side; ++i)
            for (std::uint64_t j = 1; j <= side; ++j)
                for (std::uint64_t k = 1; k <= (n == 3 ? side : 1); ++k) {
                    const std::uint64_t f = n == 2 ? flags[(i - 1) * side + (j - 1)] : flags[((i - 1) * side + (j - 1)) * side + (k - 1)];
                    if (n == 2) {
                        pre[at(i, j, 0)] = f + pre[at(i - 1, j, 0)] + pre[at(i, j - 1, 0)] - pre[at(i - 1, j - 1, 0)];
                    } else {
                        pre[at(i, j, k)] = f + pre[at(i - 1, j, k)] + pre[at(i, j - 1, k)] + pre[at(i, j, k - 1)] -
                                           pre[at(i - 1, j - 1, k)] - pre[at(i - 1, j, k - 1)] - pre[at(i, j - 1, k - 1)] +
                                           pre[at(i - 1, j - 1, k - 1)];
                    }
                }
        for (auto L : L_grid) {
            const auto uL = static_cast<std::uint64_t>(L);
            std::uint64_t lo = std::numeric_limits<std::uint64_t>::max(), hi = 0;
            for (std::uint64_t i = 0; i + uL <= side; ++i)
                for (std::uint64_t j = 0; j + uL <= side; ++j)
                    for (std::uint64_t k = 0; k + uL <= (n == 3 ? side : uL); ++k) {
                        std::uint64_t c;
                        if (n == 2) {
                            c = pre[at(i + uL, j + uL, 0)] - pre[at(i, j + uL, 0)] - pre[at(i + uL, j, 0)] + pre[at(i, j, 0)];
                        } else {
                            const std::uint64_t I = i + uL, J = j + uL, K = k + uL;
                            c = pre[at(I, J, K)] - pre[at(i, J, K)] - pre[at(I, j, K)] - pre[at(I, J, k)] + pre[at(i, j, K)] +
                                pre[at(i, J, k)] + pre[at(I, j, k)] - pre[at(i, j, k)];
                        }
                        lo = std::min(lo, c);
                        hi = std::max(hi, c);
                    }
            const long double vol = std::pow(static_cast<long double>(L), n);
            rep.grid.push_back(static_cast<double>(L));
            rep.values_lo.push_back(static_cast<double>(lo / vol));
            rep.values_hi.push_back(static_cast<double>(hi / vol));
        }
    } else {
        for (auto L : L_grid) {
            const auto uL = static_cast<std::uint64_t>(L);
            std::uint64_t c = 0;
            for (std::uint64_t i = 0; i < uL; ++i) c += flags[i];
            std::uint64_t lo = c, hi = c;
            for (std::uint64_t i = uL; i < side; ++i) {
                c += flags[i];
                c -= flags[i - uL];
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            rep.grid.push_back(static_cast<double>(L));
            rep.values_lo.push_back(static_cast<double>(lo) / static_cast<double>(L));
            rep.values_hi.push_back(static_cast<double>(hi) / static_cast<double>(L));
        }
    }
    for (std::size_t i = 0; i < rep.grid.size(); ++i) rep.values.push_back(0.5 * (rep.values_lo[i] + rep.values_hi[i]));
    const std::size_t w = std::clamp<std::size_t>(tail_window, 1, rep.grid.size());
    rep.params["tail_window"] = w;
    const auto off = static_cast<std::ptrdiff_t>(rep.grid.size() - w);
    rep.lower_est = *std::min_element(rep.values_lo.begin() + off, rep.values_lo.end());
    rep.upper_est = *std::max_element(rep.values_hi.begin() + off, rep.values_hi.end());
    rep.notes.push_back("values_lo/values_hi are inf/sup over windows; values are their midpoints");
    rep.notes.push_back("lower = min of infs, upper = max of sups over the last tail_window lengths");
    return rep;
}

/// Default window lengths: ratio 2, ending at R.
inline std::vector<std::int64_t> default_window_grid(std::int64_t R) { return geometric_grid(R, 8); }

/**
 * zeta_X(s) / zeta(s) on a decreasing s grid.  values are point estimates
 * whose tails are completed with the density of X near the cutoff;
 * values_lo/values_hi are the certified brackets.
 */
inline DensityReport density_analytic(const CompiledSet& set, const std::vector<double>& s_grid, std::uint64_t N,
                                      std::size_t tail_window = 2) {
    if (s_grid.empty()) throw DomainError("empty s grid");
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        if (!(s_grid[i] > 1)) throw DomainError("s grid values must be > 1");
        if (i && !(s_grid[i] < s_grid[i - 1])) throw DomainError("s grid must be strictly decreasing");
    }
    if (set.dim() != 1) throw DomainError("analytic density is defined for dimension 1");
    if (N < 4) throw DomainError("cutoff must be >= 4");
    const auto flags = set.indicator(Box{1, 1, static_cast<std::int64_t>(N)});
    std::uint64_t near = 0;
    for (std::uint64_t k = N / 2 + 1; k <= N; ++k) near += flags[k - 1];
    const long double local = static_cast<long double>(near) / static_cast<long double>(N - N / 2);
    const bool finite = detail::known_finite(set, N);
    DensityReport rep;
    rep.method = "ANALYTIC";
    rep.params["N"] = N;
    rep.params["local_density"] = static_cast<double>(local);
    const unsigned threads = set.options().threads;
    for (double s : s_grid) {
        const long double ls = s;
        const long double SX = chunked_sum(0, N, threads, [&](std::uint64_t i) {
            const std::uint64_t k = N - i;
            return flags[k - 1] ? detail::pow_neg(k, ls) : 0.0L;
        });
        const Bracket z = zeta_bracket(s, N, threads);
        const long double Tlo = std::pow(static_cast<long double>(N + 1), 1 - ls) / (ls - 1);
        const long double Thi = std::pow(static_cast<long double>(N), 1 - ls) / (ls - 1);
        const long double SZ = 0.5L * (z.lo - Tlo + z.hi - Thi);
        const long double Tmid = 0.5L * (Tlo + Thi);
        const long double xt = finite ? 0.0L : local * Tmid;
        rep.grid.push_back(s);
        rep.values.push_back(static_cast<double>((SX + xt) / (SZ + Tmid)));
        rep.values_lo.push_back(std::clamp(round_down(static_cast<double>(SX / z.hi), 2), 0.0, 1.0));
        rep.values_hi.push_back(std::clamp(round_up(static_cast<double>((SX + (finite ? 0.0L : Thi)) / z.lo), 2), 0.0, 1.0));
    }
    detail::tail_extract(rep, tail_window);
    rep.notes.push_back("values complete the tail of zeta_X with the density of X on (N/2, N]; not certified");
    rep.notes.push_back("values_lo/values_hi are certified brackets for zeta_X(s)/zeta(s)");
    return rep;
}

/**
 * Buck density: upper = min level measure along the chain (certified for
 * EXACT sets); lower = 1 - Buck upper of the complement.
 */
inline DensityReport density_buck(const CompiledSet& set, const ModulusChain& chain, std::size_t levels, std::int64_t N = 0) {
    DensityReport rep;
    rep.method = "BUCK";
    rep.params["chain"] = chain.str();
    rep.params["levels"] = levels;
    const MeasureTrace tr = closure_measure_trace(set, chain, levels, N);
    if (tr.levels.empty()) throw ResourceError("no chain level fits the budget");
    for (const auto& l : tr.levels) {
        rep.grid.push_back(static_cast<double>(l.modulus));
        rep.values.push_back(to_double(l.measure));
    }
    Rational upper = tr.levels.front().measure;
    for (const auto& l : tr.levels) upper = std::min(upper, l.measure);
    rep.upper_est = to_double(upper);
    rep.certified = tr.certified;
    for (const auto& n : tr.notes) rep.notes.push_back(n);

    // Lower bound through the complement.
    const auto period = set.period();
    bool lower_certified = false;
    std::optional<Rational> lower;
    if (period) {
        for (const auto& l : tr.levels) {
            if (l.modulus % *period != 0) continue;
            // X is a union of classes mod m, so pi_m(X^c) is the complement of pi_m(X).
            lower = lower ? std::max(*lower, l.measure) : l.measure;
            lower_certified = true;
        }
    }
    const SetExpr cexpr{make_node(Complement{set.expr().root}), set.dim()};
    const CompiledSet comp(cexpr, set.options());
    if (!lower) {
        std::optional<Rational> cmin;
        for (const auto& l : tr.levels) {
            const std::uint64_t m = l.modulus;
            const std::int64_t bound = N > 0 ? std::max<std::int64_t>(N, static_cast<std::int64_t>(m))
                                             : std::max<std::int64_t>(1'000'000, 200 * static_cast<std::int64_t>(m));
            const Box b{set.dim(), -bound, bound};
            if (b.points() == 0 || b.points() > set.options().budget) {
                rep.notes.push_back("complement image skipped at m=" + std::to_string(m) + " (box over budget)");
                continue;
            }
            const ResidueImage ci = comp.truncated_image(m, bound);
            Rational cm(big_from_u64(ci.count()), big_pow(m, set.dim()));
            cm.canonicalize();
            cmin = cmin ? std::min(*cmin, cm) : cm;
        }
        if (cmin) lower = Rational(1) - *cmin;
        else lower = Rational(0);
    }
    rep.lower_est = to_double(*lower);
    for (const auto& l : tr.levels) {
        (void)l;
        rep.values_hi.push_back(rep.upper_est);
        rep.values_lo.push_back(rep.lower_est);
    }
    rep.params["lower_certified"] = lower_certified;
    rep.params["upper_exact"] = to_string(upper);
    rep.notes.push_back(lower_certified ? "lower bound from exact complement images (set is periodic)"
                                        : "UNCERTIFIED lower bound: complement images are truncated");
    return rep;
}

/// Nonnegative step function on [-1, 1].
struct StepFunction {
    struct Piece {
        double lo, hi;
        bool lo_closed, hi_closed;
        double weight;
    };
    std::vector<Piece> pieces;

    double operator()(double x) const {
        double v = 0;
        for (const auto& p : pieces) {
            const bool above = p.lo_closed ? x >= p.lo : x > p.lo;
            const bool below = p.hi_closed ? x <= p.hi : x < p.hi;
            if (above && below) v += p.weight;
        }
        return v;
    }

    void validate() const {
        if (pieces.empty()) throw DomainError("degenerate step function: no pieces");
        bool any = false;
        for (const auto& p : pieces) {
            if (p.weight < 0) throw DomainError("step function weights must be >= 0");
            if (p.lo < -1 || p.hi > 1 || p.lo > p.hi) throw DomainError("step intervals must lie in [-1, 1]");
            if (p.weight > 0 && (p.lo < p.hi || (p.lo_closed && p.hi_closed))) any = true;
        }
        if (!any) throw DomainError("degenerate step function: all weights zero");
    }

    /// "w*[a,b] + w*(a,b]" ; the weight and '*' may be omitted.
    static StepFunction parse(const std::string& text) {
        StepFunction f;
        std::string s;
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c))) s += c;
        std::size_t i = 0;
        auto bad = [&] { return DomainError("bad step function '" + text + "': expected terms like 2*[0,0.5]+(0.5,1]"); };
        auto number = [&]() {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(s.substr(i), &used);
            } catch (const std::exception&) {
                throw bad();
            }
            i += used;
            return v;
        };
        while (i < s.size()) {
            double w = 1;
            if (s[i] != '[' && s[i] != '(') {
                w = number();
                if (i >= s.size() || s[i] != '*') throw bad();
                ++i;
            }
            if (i >= s.size() || (s[i] != '[' && s[i] != '(')) throw bad();
            const bool lc = s[i++] == '[';
            const double a = number();
            if (i >= s.size() || s[i] != ',') throw bad();
            ++i;
            const double b = number();
            if (i >= s.size() || (s[i] != ']' && s[i] != ')')) throw bad();
            const bool hc = s[i++] == ']';
            f.pieces.push_back({a, b, lc, hc, w});
            if (i < s.size()) {
                if (s[i] != '+') throw bad();
                ++i;
            }
        }
        f.validate();
        return f;
    }

    std::string str() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            const auto& p = pieces[i];
            os << (i ? "+" : "") << p.weight << '*' << (p.lo_closed ? '[' : '(') << p.lo << ',' << p.hi << (p.hi_closed ? ']' : ')');
        }
        return os.str();
    }
};

/// sum_{k in X} f(k/r) / sum_{k in Z^n} f(k/r), with f(k/r) = prod f(k_i/r).
inline DensityReport density_weighted(const CompiledSet& set, const StepFunction& f, const std::vector<std::int64_t>& grid,
                                      std::size_t tail_window = 5) {
    f.validate();
    detail::check_grid(grid);
    const std::int64_t R = grid.back();
    const unsigned n = set.dim();
    const Box box{n, -R, R};
    const auto flags = set.indicator(box);
    const std::uint64_t side = box.side();
    DensityReport rep;
    rep.method = "WEIGHTED";
    rep.params["step_function"] = f.str();
    for (auto r : grid) {
        std::vector<long double> w(static_cast<std::size_t>(2 * r + 1));
        long double total1 = 0;
        for (std::int64_t k = -r; k <= r; ++k) {
            w[static_cast<std::size_t>(k + r)] = f(static_cast<double>(k) / static_cast<double>(r));
            total1 += w[static_cast<std::size_t>(k + r)];
        }
        const long double total = std::pow(total1, n);
        if (total <= 0) throw DomainError("degenerate step function: zero total weight at r=" + std::to_string(r));
        long double num = 0;
        const std::uint64_t sub = static_cast<std::uint64_t>(2 * r + 1), off = static_cast<std::uint64_t>(R - r);
        const std::uint64_t pts = checked_pow(sub, n);
        for (std::uint64_t i = 0; i < pts; ++i) {
            std::uint64_t idx = i, flat = 0;
            long double wt = 1;
            std::uint64_t mult = 1;
            for (unsigned a = 0; a < n; ++a) {
                const std::uint64_t c = idx % sub;
                idx /= sub;
                wt *= w[c];
                flat += (c + off) * mult;
                mult *= side;
            }
            if (wt > 0 && flags[flat]) num += wt;
        }
        rep.grid.push_back(static_cast<double>(r));
        rep.values.push_back(static_cast<double>(num / total));
    }
    detail::tail_extract(rep, tail_window);
    rep.notes.push_back("estimates from finite data: lower/upper are min/max over the last tail_window grid points");
    return rep;
}

// ---------------------------------------------------------------------------
// Axioms on periodic sets

/// R subset of (Z/m)^n, read as the union of its classes.
struct PeriodicSet {
    std::uint64_t m = 1;
    unsigned n = 1;
    std::vector<std::uint8_t> bits;

    PeriodicSet() = default;
    PeriodicSet(std::uint64_t mod, unsigned dim, bool full = false) : m(mod), n(dim), bits(checked_pow(mod, dim), full) {}

    std::uint64_t size() const { return bits.size(); }
    std::uint64_t count() const { return static_cast<std::uint64_t>(std::count(bits.begin(), bits.end(), 1)); }
    Rational density() const {
        Rational q(big_from_u64(count()), big_from_u64(size()));
        q.canonicalize();
        return q;
    }

    std::vector<std::uint64_t> coords(std::uint64_t i) const {
        std::vector<std::uint64_t> c(n);
        for (unsigned a = n; a-- > 0;) {
            c[a] = i % m;
            i /= m;
        }
        return c;
    }
    std::uint64_t index(const std::vector<std::uint64_t>& c) const {
        std::uint64_t i = 0;
        for (auto v : c) i = i * m + v % m;
        return i;
    }

    PeriodicSet refine(std::uint64_t M) const {
        if (M % m) throw DomainError("refinement modulus must be a multiple");
        PeriodicSet out(M, n);
        for (std::uint64_t i = 0; i < out.size(); ++i) out.bits[i] = bits[index(out.coords(i))];
        return out;
    }
    PeriodicSet complement() const {
        PeriodicSet out = *this;
        for (auto& b : out.bits) b = !b;
        return out;
    }
    PeriodicSet translate(const std::vector<std::int64_t>& b) const {
        PeriodicSet out(m, n);
        for (std::uint64_t i = 0; i < size(); ++i) {
            if (!bits[i]) continue;
            auto c = coords(i);
            for (unsigned a = 0; a < n; ++a) c[a] = mod_floor(static_cast<std::int64_t>(c[a]) + b[a], m);
            out.bits[out.index(c)] = 1;
        }
        return out;
    }

    std::string str() const {
        std::string s = "mod " + std::to_string(m) + (n > 1 ? "^" + std::to_string(n) : "") + " {";
        bool first = true;
        for (std::uint64_t i = 0; i < size(); ++i) {
            if (!bits[i]) continue;
            s += first ? "" : ",";
            first = false;
            if (n == 1) {
                s += std::to_string(i);
            } else {
                auto c = coords(i);
                s += "(";
                for (unsigned a = 0; a < n; ++a) s += (a ? "," : "") + std::to_string(c[a]);
                s += ")";
            }
        }
        return s + "}";
    }

    /// The set as a DSL union of congruences (dimension 1).
    std::string dsl() const {
        std::string s;
        for (std::uint64_t i = 0; i < size(); ++i)
            if (bits[i]) s += (s.empty() ? "" : " | ") + ("cong(" + std::to_string(i) + "," + std::to_string(m) + ")");
        return s;
    }
};

inline std::pair<PeriodicSet, PeriodicSet> common_refinement(const PeriodicSet& a, const PeriodicSet& b) {
    const std::uint64_t M = std::lcm(a.m, b.m);
    return {a.refine(M), b.refine(M)};
}

inline PeriodicSet set_union(const PeriodicSet& a, const PeriodicSet& b) {
    auto [x, y] = common_refinement(a, b);
    for (std::size_t i = 0; i < x.bits.size(); ++i) x.bits[i] |= y.bits[i];
    return x;
}
inline PeriodicSet set_intersection(const PeriodicSet& a, const PeriodicSet& b) {
    auto [x, y] = common_refinement(a, b);
    for (std::size_t i = 0; i < x.bits.size(); ++i) x.bits[i] &= y.bits[i];
    return x;
}
inline PeriodicSet set_difference(const PeriodicSet& a, const PeriodicSet& b) {
    auto [x, y] = common_refinement(a, b);
    for (std::size_t i = 0; i < x.bits.size(); ++i) x.bits[i] &= !y.bits[i];
    return x;
}
inline bool is_subset(const PeriodicSet& a, const PeriodicSet& b) {
    auto [x, y] = common_refinement(a, b);
    for (std::size_t i = 0; i < x.bits.size(); ++i)
        if (x.bits[i] && !y.bits[i]) return false;
    return true;
}

/// aZ^n as a periodic set.
inline PeriodicSet ideal_set(std::uint64_t a, unsigned n) {
    PeriodicSet s(a, n);
    s.bits[0] = 1;
    return s;
}

/// An upper/lower density pair on periodic sets.
struct DensityPair {
    std::string name;
    std::function<Rational(const PeriodicSet&)> upper, lower;
};

inline DensityPair exact_periodic_density() {
    auto d = [](const PeriodicSet& s) { return s.density(); };
    return {"periodic", d, d};
}

/// e+ = 2x - x^2 and e- = x^2 applied to the periodic density.
inline DensityPair deformed_density() {
    return {"deformed", [](const PeriodicSet& s) {
                const Rational x = s.density();
                return Rational(2 * x - x * x);
            },
            [](const PeriodicSet& s) {
                const Rational x = s.density();
                return Rational(x * x);
            }};
}

struct AxiomResult {
    std::string axiom;
    std::size_t checks = 0;
    std::size_t failures = 0;
    std::string witness;  ///< first failing case
};

struct EstimatorCheck {
    std::string set;
    std::string method;
    double expected = 0, lower = 0, upper = 0, tolerance = 0;
    bool pass = false;
};

struct AxiomReport {
    std::size_t cases = 0;
    std::uint64_t seed = 0;
    std::vector<AxiomResult> exact;      ///< periodic density
    std::vector<AxiomResult> deformed;   ///< e+/e- pair
    std::vector<EstimatorCheck> estimators;

    static bool all_pass(const std::vector<AxiomResult>& v) {
        return std::all_of(v.begin(), v.end(), [](const AxiomResult& r) { return r.failures == 0; });
    }
    const AxiomResult* find(const std::vector<AxiomResult>& v, const std::string& id) const {
        for (const auto& r : v)
            if (r.axiom == id) return &r;
        return nullptr;
    }
};

namespace detail {

inline PeriodicSet random_periodic(std::mt19937_64& rng, unsigned n, std::uint64_t max_mod) {
    std::uniform_int_distribution<std::uint64_t> md(1, max_mod);
    PeriodicSet s(md(rng), n);
    std::bernoulli_distribution coin(0.4);
    for (auto& b : s.bits) b = coin(rng);
    return s;
}

/// Runs (Dn1)-(Dn7) for one density pair over the generated cases.
inline std::vector<AxiomResult> run_axioms(const DensityPair& d, std::size_t cases, std::uint64_t seed) {
    std::vector<AxiomResult> res;
    for (const char* id : {"Dn1", "Dn2", "Dn3", "Dn4", "Dn5", "Dn6", "Dn7", "empty"}) res.push_back({id, 0, 0, {}});
    auto record = [&](std::size_t i, bool ok, const std::string& witness) {
        ++res[i].checks;
        if (!ok) {
            if (res[i].failures++ == 0) res[i].witness = witness;
        }
    };
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dimd(1, 2);
    std::uniform_int_distribution<std::int64_t> shift(-1000, 1000);
    std::uniform_int_distribution<std::uint64_t> ad(2, 12);
    for (std::size_t c = 0; c < cases; ++c) {
        const unsigned n = c == 0 ? 1u : static_cast<unsigned>(dimd(rng));
        const std::uint64_t maxm = n == 1 ? 60 : 12;
        const PeriodicSet X = random_periodic(rng, n, maxm), Y = random_periodic(rng, n, maxm);
        const PeriodicSet full(X.m, n, true);
        record(0, d.lower(full) == 1, full.str());
        record(1, d.lower(X) <= d.upper(X), X.str());
        const PeriodicSet sub = set_intersection(X, Y);
        const bool sub_ok = is_subset(sub, X);
        record(2, sub_ok && d.upper(sub) <= d.upper(X) && d.lower(sub) <= d.lower(X), sub.str() + " in " + X.str());
        record(3, d.upper(X) + d.lower(X.complement()) == 1, X.str());
        const PeriodicSet disj = set_difference(Y, X), uni = set_union(X, disj);
        record(4, d.upper(uni) <= d.upper(X) + d.upper(disj) && d.lower(uni) >= d.lower(X) + d.lower(disj),
               X.str() + " and " + disj.str());
        std::vector<std::int64_t> b(n);
        for (auto& v : b) v = shift(rng);
        const PeriodicSet moved = X.translate(b);
        record(5, d.upper(moved) == d.upper(X) && d.lower(moved) == d.lower(X), X.str());
        // case 0 is one-dimensional with a = 2, so a failing deformation has a small witness
        const std::uint64_t a = c == 0 ? 2 : ad(rng);
        const PeriodicSet I = ideal_set(a, n);
        const Rational target(BigInt(1), big_pow(a, n));
        record(6, d.upper(I) == target && d.lower(I) == target,
               "a=" + std::to_string(a) + " n=" + std::to_string(n) + ": upper " + to_string(d.upper(I)) + ", lower " +
                   to_string(d.lower(I)) + ", expected " + to_string(target));
        const PeriodicSet empty(X.m, n);
        record(7, d.upper(empty) == 0 && d.lower(empty) == 0, empty.str());
    }
    return res;
}

} // namespace detail

/**
 * (Dn1)-(Dn7) in exact arithmetic on random periodic sets, for the periodic
 * density and for the deformation e+ = 2x - x^2, e- = x^2.  The first
 * `estimator_cases` one-dimensional sets are also run through the estimators.
 */
inline AxiomReport axiom_suite(std::size_t cases, std::uint64_t seed, std::size_t estimator_cases = 5, std::int64_t r = 1'000'000,
                               unsigned threads = 1) {
    AxiomReport rep;
    rep.cases = cases;
    rep.seed = seed;
    rep.exact = detail::run_axioms(exact_periodic_density(), cases, seed);
    rep.deformed = detail::run_axioms(deformed_density(), cases, seed);

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    SetOptions opts;
    opts.threads = threads;
    for (std::size_t c = 0; c < estimator_cases; ++c) {
        PeriodicSet P = detail::random_periodic(rng, 1, 30);
        if (P.count() == 0) P.bits[0] = 1;
        const double d = to_double(P.density());
        const CompiledSet X = compile(P.dsl(), opts);
        auto add = [&](const std::string& method, double lo, double hi, double tol) {
            const bool ok = std::fabs(lo - d) <= tol && std::fabs(hi - d) <= tol;
            rep.estimators.push_back({P.str(), method, d, lo, hi, tol, ok});
        };
        const auto a = density_alpha(X, 0, geometric_grid(r));
        add("asymptotic", a.lower_est, a.upper_est, 1e-3);
        const auto u = density_uniform(X, default_window_grid(r), r);
        add("uniform", u.lower_est, u.upper_est, 1e-3);
        const auto w = density_weighted(X, StepFunction::parse("[0,1]"), geometric_grid(r, 3));
        add("weighted", w.lower_est, w.upper_est, 1e-3);
        const auto an = density_analytic(X, {1.1, 1.05}, static_cast<std::uint64_t>(r));
        const bool inside = an.values_lo.back() <= d && d <= an.values_hi.back();
        rep.estimators.push_back({P.str(), "analytic-bracket", d, an.values_lo.back(), an.values_hi.back(), 0, inside});
        const auto bk = density_buck(X, ModulusChain::explicit_list({P.m}), 1);
        const bool exact = bk.upper_est == d && bk.lower_est == d;
        rep.estimators.push_back({P.str(), "buck", d, bk.lower_est, bk.upper_est, 0, exact});
    }
    return rep;
}

} // namespace zhat
