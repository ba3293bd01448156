#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "primes.hpp"

namespace zhat {

class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::uint64_t n) : n_(n), words_((n + 63) / 64, 0) {}

    std::uint64_t size() const { return n_; }
    void set(std::uint64_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    bool test(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    std::uint64_t count() const {
        std::uint64_t c = 0;
        for (auto w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
        return c;
    }

    Bitset& operator|=(const Bitset& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }

    template <class Fn>
    void for_each_set(Fn&& fn) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const int b = std::countr_zero(bits);
                fn(static_cast<std::uint64_t>(w) * 64 + static_cast<std::uint64_t>(b));
                bits &= bits - 1;
            }
        }
    }

    friend bool operator==(const Bitset&, const Bitset&) = default;

private:
    std::uint64_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

enum class ImageMode { Exact, Truncated };

inline const char* to_string(ImageMode m) { return m == ImageMode::Exact ? "EXACT" : "TRUNCATED"; }

/**
 * The finite set pi_m(X) in (Z/m)^n.  Tuples are flattened with the first
 * coordinate most significant, so iteration order is lexicographic.
 *
 * EXACT images are the precise reduction of X; TRUNCATED ones reduce only
 * X n [-N, N]^n and are therefore subsets of the exact image.
 */
struct ResidueImage {
    std::uint64_t modulus = 1;
    unsigned dim = 1;
    ImageMode mode = ImageMode::Exact;
    std::int64_t truncation = 0;  // N, TRUNCATED only
    bool assumes_dirichlet = false;
    Bitset bits;

    ResidueImage() = default;
    ResidueImage(std::uint64_t m, unsigned n, ImageMode md) : modulus(m), dim(n), mode(md) {
        const std::uint64_t total = checked_pow(m, n);
        if (total == 0) throw ResourceError("level " + std::to_string(m) + "^" + std::to_string(n) + " overflows");
        bits = Bitset(total);
    }

    std::uint64_t tuples() const { return bits.size(); }
    std::uint64_t count() const { return bits.count(); }

    std::uint64_t flatten(std::span<const std::uint64_t> t) const {
        std::uint64_t idx = 0;
        for (unsigned i = 0; i < dim; ++i) idx = idx * modulus + t[i] % modulus;
        return idx;
    }

    std::vector<std::uint64_t> unflatten(std::uint64_t idx) const {
        std::vector<std::uint64_t> t(dim);
        for (unsigned i = dim; i-- > 0;) {
            t[i] = idx % modulus;
            idx /= modulus;
        }
        return t;
    }

    bool contains(std::span<const std::uint64_t> t) const { return bits.test(flatten(t)); }
    bool contains(std::uint64_t r) const { return bits.test(r % modulus); }

    std::vector<std::vector<std::uint64_t>> residues() const {
        std::vector<std::vector<std::uint64_t>> out;
        bits.for_each_set([&](std::uint64_t i) { out.push_back(unflatten(i)); });
        return out;
    }

    /// Residues of a one-dimensional image, ascending.
    std::vector<std::uint64_t> residues_1d() const {
        std::vector<std::uint64_t> out;
        bits.for_each_set([&](std::uint64_t i) { out.push_back(i); });
        return out;
    }

    /// |pi_m(X)| / m^n.
    Rational measure() const { return make_rational(BigInt(static_cast<unsigned long>(count())), big_pow(modulus, dim)); }

    /// Image of this one under (Z/m)^n -> (Z/d)^n for d | m.
    ResidueImage reduce(std::uint64_t d) const {
        if (d == 0 || modulus % d != 0) throw DomainError("reduce: " + std::to_string(d) + " does not divide " + std::to_string(modulus));
        ResidueImage out(d, dim, mode);
        out.truncation = truncation;
        out.assumes_dirichlet = assumes_dirichlet;
        bits.for_each_set([&](std::uint64_t i) {
            auto t = unflatten(i);
            for (auto& c : t) c %= d;
            out.bits.set(out.flatten(t));
        });
        return out;
    }
};

/// Projection of an EXACT image to each prime-power factor of its level.
struct CrtSplit {
    std::map<std::uint64_t, ResidueImage> factors;  // keyed by p^k exactly dividing m
    BigInt product_size;                            // size of the CRT product of the projections
    std::uint64_t image_size = 0;
    bool is_product = false;
};

inline CrtSplit crt_split(const ResidueImage& img) {
    if (img.mode != ImageMode::Exact) throw ModeError("crt_split needs an EXACT residue image");
    CrtSplit out;
    out.product_size = 1;
    for (auto [p, k] : factorize(img.modulus)) {
        const std::uint64_t q = checked_pow(p, k);
        ResidueImage proj = img.reduce(q);
        out.product_size *= static_cast<unsigned long>(proj.count());
        out.factors.emplace(q, std::move(proj));
    }
    out.image_size = img.count();
    // img always embeds in the product of its projections, so equal sizes
    // mean equal sets.
    out.is_product = out.product_size == BigInt(static_cast<unsigned long>(out.image_size));
    return out;
}

} // namespace zhat
