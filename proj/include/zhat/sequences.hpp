#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace zhat {

/// Named integer sequences usable as seq(name) atoms.  Each generator yields
/// the strictly increasing positive terms that are <= limit.
class SequenceRegistry {
public:
    using Generator = std::function<std::vector<std::int64_t>(std::int64_t limit)>;

    static const SequenceRegistry& instance() {
        static const SequenceRegistry reg;
        return reg;
    }

    bool contains(const std::string& name) const { return gens_.count(name) != 0; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : gens_) out.push_back(k);
        return out;
    }

    std::vector<std::int64_t> terms_up_to(const std::string& name, std::int64_t limit) const {
        auto it = gens_.find(name);
        if (it == gens_.end()) throw DomainError("unknown sequence '" + name + "'");
        return it->second(limit);
    }

    /// The k-th term (k >= 1) in arbitrary precision.
    BigInt term(const std::string& name, std::size_t k) const {
        if (!contains(name)) throw DomainError("unknown sequence '" + name + "'");
        if (k < 1) throw DomainError("sequence index starts at 1");
        if (name == "factorial" || name == "factorial_shift") {
            BigInt f;
            mpz_fac_ui(f.get_mpz_t(), k);
            return name == "factorial" ? f : BigInt(f + static_cast<unsigned long>(k));
        }
        if (name == "squares") return BigInt(static_cast<unsigned long>(k)) * static_cast<unsigned long>(k);
        if (name == "powers_of_two") {
            BigInt v;
            mpz_ui_pow_ui(v.get_mpz_t(), 2, k - 1);
            return v;
        }
        BigInt a = 1, b = 2;  // fibonacci
        for (std::size_t i = 1; i < k; ++i) {
            BigInt c = a + b;
            a = b;
            b = c;
        }
        return a;
    }

private:
    SequenceRegistry() {
        constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
        gens_["factorial"] = [](std::int64_t lim) {
            std::vector<std::int64_t> out;
            std::int64_t f = 1;
            for (std::int64_t n = 1; f <= lim; ++n) {
                if (out.empty() || out.back() != f) out.push_back(f);
                if (f > kMax / (n + 1)) break;
                f *= n + 1;
            }
            return out;
        };
        gens_["factorial_shift"] = [](std::int64_t lim) {
            std::vector<std::int64_t> out;
            std::int64_t f = 1;
            for (std::int64_t n = 1; f + n <= lim; ++n) {
                out.push_back(f + n);
                if (f > (kMax - n - 2) / (n + 1)) break;
                f *= n + 1;
            }
            return out;
        };
        gens_["squares"] = [](std::int64_t lim) {
            std::vector<std::int64_t> out;
            for (std::int64_t n = 1; n <= 3037000499 && n * n <= lim; ++n) out.push_back(n * n);
            return out;
        };
        gens_["powers_of_two"] = [](std::int64_t lim) {
            std::vector<std::int64_t> out;
            for (std::int64_t v = 1; v <= lim; v *= 2) {
                out.push_back(v);
                if (v > kMax / 2) break;
            }
            return out;
        };
        gens_["fibonacci"] = [](std::int64_t lim) {
            std::vector<std::int64_t> out;
            std::int64_t a = 1, b = 2;
            while (a <= lim) {
                out.push_back(a);
                if (b > kMax - a) break;
                std::int64_t c = a + b;
                a = b;
                b = c;
            }
            return out;
        };
    }

    std::map<std::string, Generator> gens_;
};

} // namespace zhat
