#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace zhat {

/// Integer polynomial in up to three variables x, y, z.
class Polynomial {
public:
    using Exponents = std::array<unsigned, 3>;
    static constexpr const char* kVars = "xyz";

    Polynomial() = default;

    static Polynomial constant(std::int64_t c) {
        Polynomial p;
        p.add_term({0, 0, 0}, c);
        return p;
    }

    static Polynomial variable(unsigned index) {
        Polynomial p;
        Exponents e{0, 0, 0};
        e.at(index) = 1;
        p.add_term(e, 1);
        return p;
    }

    void add_term(const Exponents& e, std::int64_t c) {
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(e, 0);
        __int128 sum = static_cast<__int128>(it->second) + c;
        if (sum > std::numeric_limits<std::int64_t>::max() || sum < std::numeric_limits<std::int64_t>::min())
            throw DomainError("polynomial coefficient overflow");
        it->second = static_cast<std::int64_t>(sum);
        if (it->second == 0) terms_.erase(it);
    }

    const std::map<Exponents, std::int64_t>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// 1 + highest variable index that occurs (at least 1).
    unsigned arity() const {
        unsigned a = 1;
        for (const auto& [e, c] : terms_)
            for (unsigned i = 0; i < 3; ++i)
                if (e[i] > 0) a = std::max(a, i + 1);
        return a;
    }

    unsigned degree() const {
        unsigned d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
        return d;
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        Polynomial r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, c);
        return r;
    }

    friend Polynomial operator-(const Polynomial& a) {
        Polynomial r;
        for (const auto& [e, c] : a.terms_) r.add_term(e, -c);
        return r;
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial r;
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                __int128 c = static_cast<__int128>(ca) * cb;
                if (c > std::numeric_limits<std::int64_t>::max() || c < std::numeric_limits<std::int64_t>::min())
                    throw DomainError("polynomial coefficient overflow");
                r.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, static_cast<std::int64_t>(c));
            }
        return r;
    }

    Polynomial pow(unsigned k) const {
        Polynomial r = constant(1);
        for (unsigned i = 0; i < k; ++i) r = r * *this;
        return r;
    }

    /// f(v) mod m for a point of (Z/m)^arity.
    std::uint64_t eval_mod(const std::uint64_t* v, std::uint64_t m) const {
        std::uint64_t acc = 0;
        for (const auto& [e, c] : terms_) {
            std::uint64_t t = mod_floor(c, m);
            for (unsigned i = 0; i < 3; ++i)
                for (unsigned k = 0; k < e[i]; ++k) t = mulmod(t, v[i], m);
            acc = (acc + t) % m;
        }
        return acc;
    }

    /// Exact value at an integer point, or nullopt when it leaves the
    /// int64 range.
    std::optional<std::int64_t> eval(const std::int64_t* v) const {
        constexpr __int128 lim = std::numeric_limits<std::int64_t>::max();
        __int128 acc = 0;
        for (const auto& [e, c] : terms_) {
            __int128 t = c;
            for (unsigned i = 0; i < 3; ++i)
                for (unsigned k = 0; k < e[i]; ++k) {
                    t *= v[i];
                    if (t > lim || t < -lim) return std::nullopt;
                }
            acc += t;
            if (acc > lim || acc < -lim) return std::nullopt;
        }
        return static_cast<std::int64_t>(acc);
    }

    /// Coefficients c_0..c_d of a univariate polynomial in x.
    std::vector<std::int64_t> univariate_coefficients() const {
        std::vector<std::int64_t> c(degree() + 1, 0);
        for (const auto& [e, v] : terms_) {
            if (e[1] || e[2]) throw DomainError("polynomial is not univariate in x");
            c[e[0]] = v;
        }
        return c;
    }

    /// Canonical text: terms by descending total degree, then exponent
    /// tuple descending; explicit '*' between factors.
    std::string str() const {
        if (terms_.empty()) return "0";
        std::vector<std::pair<Exponents, std::int64_t>> ts(terms_.begin(), terms_.end());
        std::sort(ts.begin(), ts.end(), [](const auto& a, const auto& b) {
            const unsigned da = a.first[0] + a.first[1] + a.first[2];
            const unsigned db = b.first[0] + b.first[1] + b.first[2];
            if (da != db) return da > db;
            return a.first > b.first;
        });
        std::string out;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto& [e, c] = ts[i];
            const bool neg = c < 0;
            const std::uint64_t mag = neg ? static_cast<std::uint64_t>(-(c + 1)) + 1 : static_cast<std::uint64_t>(c);
            if (i == 0)
                out += neg ? "-" : "";
            else
                out += neg ? " - " : " + ";
            std::string mono;
            for (unsigned v = 0; v < 3; ++v) {
                if (e[v] == 0) continue;
                if (!mono.empty()) mono += '*';
                mono += kVars[v];
                if (e[v] > 1) mono += "^" + std::to_string(e[v]);
            }
            if (mono.empty())
                out += std::to_string(mag);
            else if (mag == 1)
                out += mono;
            else
                out += std::to_string(mag) + "*" + mono;
        }
        return out;
    }

    static Polynomial parse(const std::string& text, std::size_t offset = 0);

private:
    std::map<Exponents, std::int64_t> terms_;
};

namespace detail {

class PolyParser {
public:
    PolyParser(const std::string& s, std::size_t offset) : s_(s), offset_(offset) {}

    Polynomial parse() {
        Polynomial p = sum();
        skip();
        if (i_ != s_.size()) fail("unexpected character", "operator or end of polynomial");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& what, const std::string& expected = {}) const {
        throw ParseError(what, offset_ + i_, expected);
    }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    bool eat(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    std::uint64_t integer() {
        skip();
        if (i_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_]))) fail("expected integer", "digit");
        std::uint64_t v = 0;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            const auto d = static_cast<std::uint64_t>(s_[i_] - '0');
            if (v > (static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) - d) / 10)
                fail("integer too large");
            v = v * 10 + d;
            ++i_;
        }
        return v;
    }

    Polynomial sum() {
        bool neg = false;
        if (eat('-'))
            neg = true;
        else
            eat('+');
        Polynomial acc = product();
        if (neg) acc = -acc;
        while (true) {
            if (eat('+'))
                acc = acc + product();
            else if (eat('-'))
                acc = acc - product();
            else
                return acc;
        }
    }

    bool at_factor_start() {
        skip();
        if (i_ >= s_.size()) return false;
        const char c = s_[i_];
        return std::isdigit(static_cast<unsigned char>(c)) || c == 'x' || c == 'y' || c == 'z' || c == '(';
    }

    Polynomial product() {
        Polynomial acc = power();
        while (true) {
            if (eat('*'))
                acc = acc * power();
            else if (at_factor_start())  // juxtaposition, e.g. 3x
                acc = acc * power();
            else
                return acc;
        }
    }

    Polynomial power() {
        Polynomial base = primary();
        if (eat('^')) {
            const std::uint64_t k = integer();
            if (k > 64) fail("exponent too large");
            base = base.pow(static_cast<unsigned>(k));
        }
        return base;
    }

    Polynomial primary() {
        skip();
        if (i_ >= s_.size()) fail("unexpected end of polynomial", "integer, variable or '('");
        const char c = s_[i_];
        if (std::isdigit(static_cast<unsigned char>(c))) return Polynomial::constant(static_cast<std::int64_t>(integer()));
        if (c == 'x' || c == 'y' || c == 'z') {
            ++i_;
            return Polynomial::variable(static_cast<unsigned>(c - 'x'));
        }
        if (c == '(') {
            ++i_;
            Polynomial p = sum();
            if (!eat(')')) fail("unbalanced parenthesis", "')'");
            return p;
        }
        fail(std::string("unexpected character '") + c + "'", "integer, variable or '('");
    }

    const std::string& s_;
    std::size_t offset_;
    std::size_t i_ = 0;
};

} // namespace detail

inline Polynomial Polynomial::parse(const std::string& text, std::size_t offset) {
    return detail::PolyParser(text, offset).parse();
}

} // namespace zhat
