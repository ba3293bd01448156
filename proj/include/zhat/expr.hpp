#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "polynomial.hpp"

namespace zhat {

struct Node;
using Expr = std::shared_ptr<const Node>;

/// x = r (mod m) in every coordinate.  Dimension follows the context.
struct Cong {
    std::int64_t r = 0;
    std::uint64_t m = 1;
};
/// Integers divisible by no k-th power of a prime.
struct KFree {
    unsigned k = 2;
};
/// Positive rational primes.
struct Primes {};
/// n-tuples with gcd 1.
struct Coprime {
    unsigned n = 2;
};
/// Sorted values of a multivariate polynomial over a preimage box, keyed by
/// the box radius.  Filled lazily; shared by copies of the node.
struct PolyValueCache {
    std::mutex mu;
    std::map<std::int64_t, std::shared_ptr<const std::vector<std::int64_t>>> tables;
};

/// f(Z^arity) for an integer polynomial f.
struct PolyImage {
    Polynomial f;
    std::shared_ptr<PolyValueCache> cache = std::make_shared<PolyValueCache>();
};
/// Union of a_i Z^n.  Dimension follows the context.
struct Multiples {
    std::vector<std::uint64_t> moduli;
};
/// Positive integers whose leading base-`base` digit is d.
struct LeadingDigit {
    unsigned digit = 1;
    unsigned base = 10;
};
/// Terms of a registered sequence.
struct Seq {
    std::string name;
};
struct FiniteSet {
    std::vector<std::int64_t> values;
};

enum class BinaryOp { Union, Intersection, Difference };

struct Binary {
    BinaryOp op = BinaryOp::Union;
    Expr lhs, rhs;
};
struct Complement {
    Expr child;
};

struct Node {
    std::variant<Cong, KFree, Primes, Coprime, PolyImage, Multiples, LeadingDigit, Seq, FiniteSet, Binary, Complement> v;
};

template <class T>
Expr make_node(T t) {
    return std::make_shared<const Node>(Node{std::move(t)});
}

/// A parsed expression together with its resolved ambient dimension.
struct SetExpr {
    Expr root;
    unsigned dim = 1;
};

inline const char* op_symbol(BinaryOp op) {
    switch (op) {
    case BinaryOp::Union: return "|";
    case BinaryOp::Intersection: return "&";
    case BinaryOp::Difference: return "\\";
    }
    return "?";
}

/// Dimension forced by the node, or 0 if it adapts to its context.
inline unsigned fixed_dim(const Expr& e) {
    return std::visit(
        [](const auto& n) -> unsigned {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Cong> || std::is_same_v<T, Multiples>) return 0;
            else if constexpr (std::is_same_v<T, Coprime>) return n.n;
            else if constexpr (std::is_same_v<T, Binary>) {
                const unsigned a = fixed_dim(n.lhs), b = fixed_dim(n.rhs);
                return a ? a : b;
            } else if constexpr (std::is_same_v<T, Complement>) return fixed_dim(n.child);
            else return 1;
        },
        e->v);
}

inline bool equal(const Expr& a, const Expr& b) {
    if (a->v.index() != b->v.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b->v);
            if constexpr (std::is_same_v<T, Cong>) return x.r == y.r && x.m == y.m;
            else if constexpr (std::is_same_v<T, KFree>) return x.k == y.k;
            else if constexpr (std::is_same_v<T, Primes>) return true;
            else if constexpr (std::is_same_v<T, Coprime>) return x.n == y.n;
            else if constexpr (std::is_same_v<T, PolyImage>) return x.f == y.f;
            else if constexpr (std::is_same_v<T, Multiples>) return x.moduli == y.moduli;
            else if constexpr (std::is_same_v<T, LeadingDigit>) return x.digit == y.digit && x.base == y.base;
            else if constexpr (std::is_same_v<T, Seq>) return x.name == y.name;
            else if constexpr (std::is_same_v<T, FiniteSet>) return x.values == y.values;
            else if constexpr (std::is_same_v<T, Binary>) return x.op == y.op && equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
            else return equal(x.child, y.child);
        },
        a->v);
}

inline bool operator==(const SetExpr& a, const SetExpr& b) { return a.dim == b.dim && equal(a.root, b.root); }

namespace detail {

template <class Vec>
std::string join(const Vec& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

inline std::string print_node(const Expr& e);

inline std::string print_term(const Expr& e) {
    if (std::holds_alternative<Binary>(e->v)) return "(" + print_node(e) + ")";
    return print_node(e);
}

inline std::string print_node(const Expr& e) {
    return std::visit(
        [](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Cong>) return "cong(" + std::to_string(n.r) + "," + std::to_string(n.m) + ")";
            else if constexpr (std::is_same_v<T, KFree>) return "kfree(" + std::to_string(n.k) + ")";
            else if constexpr (std::is_same_v<T, Primes>) return "primes";
            else if constexpr (std::is_same_v<T, Coprime>) return "coprime(" + std::to_string(n.n) + ")";
            else if constexpr (std::is_same_v<T, PolyImage>) return "image(" + n.f.str() + ")";
            else if constexpr (std::is_same_v<T, Multiples>) return "multiples(" + join(n.moduli) + ")";
            else if constexpr (std::is_same_v<T, LeadingDigit>)
                return "leadingdigit(" + std::to_string(n.digit) + "," + std::to_string(n.base) + ")";
            else if constexpr (std::is_same_v<T, Seq>) return "seq(" + n.name + ")";
            else if constexpr (std::is_same_v<T, FiniteSet>) return "finite(" + join(n.values) + ")";
            else if constexpr (std::is_same_v<T, Binary>)
                return print_node(n.lhs) + " " + op_symbol(n.op) + " " + print_term(n.rhs);
            else return "!" + print_term(n.child);
        },
        e->v);
}

class SetParser {
public:
    explicit SetParser(const std::string& s) : s_(s) {}

    Expr parse() {
        Expr e = set();
        skip();
        if (i_ != s_.size()) fail("unexpected input", "'|', '&', '\\' or end of input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what, const std::string& expected = {}, std::size_t at = SIZE_MAX) const {
        throw ParseError(what, at == SIZE_MAX ? i_ : at, expected);
    }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    bool peek(char c) {
        skip();
        return i_ < s_.size() && s_[i_] == c;
    }

    void expect(char c) {
        if (!peek(c)) fail("syntax error", std::string("'") + c + "'");
        ++i_;
    }

    std::int64_t integer() {
        skip();
        const std::size_t at = i_;
        bool neg = false;
        if (i_ < s_.size() && (s_[i_] == '-' || s_[i_] == '+')) {
            neg = s_[i_] == '-';
            ++i_;
        }
        if (i_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_]))) fail("syntax error", "integer", at);
        std::uint64_t v = 0;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            const auto d = static_cast<std::uint64_t>(s_[i_] - '0');
            if (v > (static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) - d) / 10)
                fail("integer too large", {}, at);
            v = v * 10 + d;
            ++i_;
        }
        return neg ? -static_cast<std::int64_t>(v) : static_cast<std::int64_t>(v);
    }

    std::uint64_t positive(const char* what) {
        skip();
        const std::size_t at = i_;
        const std::int64_t v = integer();
        if (v < 1) fail(std::string("invalid parameter: ") + what + " must be a positive integer", {}, at);
        return static_cast<std::uint64_t>(v);
    }

    std::string ident() {
        skip();
        const std::size_t at = i_;
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
        if (at == i_) fail("syntax error", "identifier");
        return s_.substr(at, i_ - at);
    }

    static void check_dims(const Expr& a, const Expr& b, std::size_t at) {
        const unsigned da = fixed_dim(a), db = fixed_dim(b);
        if (da && db && da != db)
            throw ParseError("dimension mismatch (" + std::to_string(da) + " vs " + std::to_string(db) + ")", at);
    }

    Expr set() {
        Expr acc = term();
        while (true) {
            skip();
            if (i_ >= s_.size()) return acc;
            BinaryOp op;
            const char c = s_[i_];
            if (c == '|') op = BinaryOp::Union;
            else if (c == '&') op = BinaryOp::Intersection;
            else if (c == '\\') op = BinaryOp::Difference;
            else return acc;
            const std::size_t at = i_++;
            Expr rhs = term();
            check_dims(acc, rhs, at);
            acc = make_node(Binary{op, acc, rhs});
        }
    }

    Expr term() {
        if (peek('!')) {
            ++i_;
            return make_node(Complement{term()});
        }
        return atom();
    }

    Expr atom() {
        skip();
        if (peek('(')) {
            ++i_;
            Expr e = set();
            expect(')');
            return e;
        }
        const std::size_t at = i_;
        if (i_ >= s_.size() || !std::isalpha(static_cast<unsigned char>(s_[i_])))
            fail("syntax error", "atom (cong, kfree, primes, coprime, image, multiples, leadingdigit, seq, finite) or '('");
        const std::string kw = ident();
        if (kw == "primes") return make_node(Primes{});
        if (kw == "cong") {
            expect('(');
            const std::int64_t r = integer();
            expect(',');
            const std::uint64_t m = positive("modulus");
            expect(')');
            return make_node(Cong{r, m});
        }
        if (kw == "kfree") {
            expect('(');
            skip();
            const std::size_t kat = i_;
            const std::int64_t k = integer();
            if (k < 2 || k > 63) fail("invalid parameter: kfree needs 2 <= k <= 63", {}, kat);
            expect(')');
            return make_node(KFree{static_cast<unsigned>(k)});
        }
        if (kw == "coprime") {
            expect('(');
            skip();
            const std::size_t nat = i_;
            const std::int64_t n = integer();
            if (n < 2 || n > 3) fail("invalid parameter: coprime dimension must be 2 or 3", {}, nat);
            expect(')');
            return make_node(Coprime{static_cast<unsigned>(n)});
        }
        if (kw == "image") {
            expect('(');
            const std::size_t start = i_;
            int depth = 1;
            while (i_ < s_.size() && depth > 0) {
                if (s_[i_] == '(') ++depth;
                else if (s_[i_] == ')') --depth;
                if (depth > 0) ++i_;
            }
            if (depth != 0) fail("unbalanced parenthesis in image()", "')'");
            Polynomial f = Polynomial::parse(s_.substr(start, i_ - start), start);
            ++i_;
            return make_node(PolyImage{std::move(f)});
        }
        if (kw == "multiples") {
            expect('(');
            std::vector<std::uint64_t> ms{positive("modulus")};
            while (peek(',')) {
                ++i_;
                ms.push_back(positive("modulus"));
            }
            expect(')');
            return make_node(Multiples{std::move(ms)});
        }
        if (kw == "leadingdigit") {
            expect('(');
            skip();
            const std::size_t dat = i_;
            const std::int64_t d = integer();
            expect(',');
            const std::int64_t b = integer();
            if (b < 2 || b > 1000000) fail("invalid parameter: base must be in [2, 10^6]", {}, dat);
            if (d < 1 || d >= b) fail("invalid parameter: need 1 <= digit < base", {}, dat);
            expect(')');
            return make_node(LeadingDigit{static_cast<unsigned>(d), static_cast<unsigned>(b)});
        }
        if (kw == "seq") {
            expect('(');
            std::string name = ident();
            expect(')');
            return make_node(Seq{std::move(name)});
        }
        if (kw == "finite") {
            expect('(');
            std::vector<std::int64_t> vs{integer()};
            while (peek(',')) {
                ++i_;
                vs.push_back(integer());
            }
            expect(')');
            return make_node(FiniteSet{std::move(vs)});
        }
        fail("unknown atom '" + kw + "'", "cong, kfree, primes, coprime, image, multiples, leadingdigit, seq, finite", at);
    }

    const std::string& s_;
    std::size_t i_ = 0;
};

} // namespace detail

/// Parses the set-definition language.  Operators | & \ are left-associative
/// with equal precedence; '!' binds tightest.
inline SetExpr parse_set(const std::string& text) {
    Expr root = detail::SetParser(text).parse();
    const unsigned d = fixed_dim(root);
    return SetExpr{root, d ? d : 1};
}

inline std::string print(const Expr& e) { return detail::print_node(e); }
inline std::string print(const SetExpr& e) { return detail::print_node(e.root); }

} // namespace zhat
