#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "zhat/measure.hpp"

using namespace zhat;

namespace {

Rational q(long n, long d) {
    Rational r(n, d);
    r.canonicalize();
    return r;
}

const double kSixOverPi2 = 6.0 / (std::numbers::pi * std::numbers::pi);

} // namespace

TEST(Measure, HaarIdealExamples) {
    EXPECT_EQ(haar_ideal(6, 1), q(1, 6));
    EXPECT_EQ(haar_ideal(1, 3), q(1, 1));
    EXPECT_EQ(haar_ideal(10, 2), q(1, 100));
    EXPECT_THROW(haar_ideal(0, 1), DomainError);
}

TEST(Measure, ChainParsing) {
    EXPECT_EQ(ModulusChain::primorial().levels(4), (std::vector<std::uint64_t>{2, 6, 30, 210}));
    EXPECT_EQ(ModulusChain::parse("primorial2").levels(4), (std::vector<std::uint64_t>{4, 36, 900, 44100}));
    EXPECT_EQ(ModulusChain::parse("primorial^3").levels(2), (std::vector<std::uint64_t>{8, 216}));
    EXPECT_EQ(ModulusChain::factorial().levels(4), (std::vector<std::uint64_t>{2, 6, 24, 120}));
    EXPECT_EQ(ModulusChain::parse("10,2310").levels(5), (std::vector<std::uint64_t>{10, 2310}));
    EXPECT_THROW(ModulusChain::parse("6,10"), DomainError);
    EXPECT_THROW(ModulusChain::parse("6,6"), DomainError);
    EXPECT_THROW(ModulusChain::parse("primorialx"), DomainError);
    // stops before overflowing 64 bits
    EXPECT_LT(ModulusChain::primorial_power(4).levels(100).size(), 20u);
}

TEST(Measure, TraceSquarefree) {
    const auto X = compile("kfree(2)");
    for (const auto& chain : {ModulusChain::explicit_list({4, 36, 900, 44100}), ModulusChain::primorial_power(2)}) {
        const auto t = closure_measure_trace(X, chain, 4);
        ASSERT_EQ(t.levels.size(), 4u);
        EXPECT_EQ(t.levels[0].measure, q(3, 4));
        EXPECT_EQ(t.levels[1].measure, q(2, 3));
        EXPECT_EQ(t.levels[2].measure, q(16, 25));
        EXPECT_EQ(t.levels[3].measure, q(768, 1225));
        EXPECT_TRUE(t.certified);
        EXPECT_TRUE(t.nonincreasing());
    }
    // oracle: residues mod 44100 of squarefree numbers up to 10^6 (sieved)
    const std::uint64_t M = 44100, B = 1'000'000;
    std::vector<std::uint8_t> sf(B + 1, 1);
    for (std::uint64_t p = 2; p * p <= B; ++p)
        for (std::uint64_t k = p * p; k <= B; k += p * p) sf[k] = 0;
    std::set<std::uint64_t> cls;
    for (std::uint64_t x = 1; x <= B; ++x)
        if (sf[x]) cls.insert(x % M);
    EXPECT_EQ(cls.size(), 27648u);
    EXPECT_EQ(X.residue_image(M).count(), 27648u);
}

TEST(Measure, TraceCosetAndComplement) {
    const auto t = closure_measure_trace(compile("cong(3,10)"), ModulusChain::explicit_list({10, 2310}), 2);
    ASSERT_EQ(t.levels.size(), 2u);
    EXPECT_EQ(t.levels[0].measure, q(1, 10));
    EXPECT_EQ(t.levels[1].measure, q(1, 10));

    const auto c = closure_measure_trace(compile("!multiples(4,6)"), ModulusChain::explicit_list({12}), 1, 1000);
    ASSERT_EQ(c.levels.size(), 1u);
    EXPECT_EQ(c.levels[0].measure, q(2, 3));
    EXPECT_EQ(c.levels[0].mode, ImageMode::Truncated);
    EXPECT_FALSE(c.certified);
    EXPECT_EQ(c.levels[0].measure, multiples_measure_ie({4, 6}));
}

TEST(Measure, TraceStopsAtBudget) {
    const auto t = closure_measure_trace(compile("kfree(2)"), ModulusChain::primorial_power(2), 6);
    EXPECT_EQ(t.levels.size(), 5u);
    EXPECT_FALSE(t.complete);
    ASSERT_FALSE(t.notes.empty());
    EXPECT_NE(t.notes.back().find("level 6"), std::string::npos);
    EXPECT_TRUE(t.nonincreasing());
}

TEST(Measure, TraceCsvColumns) {
    const auto t = closure_measure_trace(compile("kfree(2)"), ModulusChain::primorial_power(2), 2);
    const std::string csv = trace_csv(t);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "level_index,modulus,residue_count,measure_num,measure_den,measure_float,mode");
    EXPECT_NE(csv.find("\n1,4,3,3,4,0.75,EXACT\n"), std::string::npos);
    EXPECT_NE(csv.find("\n2,36,24,2,3,"), std::string::npos);
}

TEST(Measure, InclusionExclusionExamples) {
    EXPECT_EQ(multiples_measure_ie({4, 6}), q(2, 3));
    EXPECT_EQ(multiples_measure_ie({2}), q(1, 2));
    EXPECT_EQ(multiples_measure_ie({4, 9, 25}), q(16, 25));
    EXPECT_EQ(multiples_measure_ie({4, 9, 25}), q(3, 4) * q(8, 9) * q(24, 25));
    EXPECT_EQ(multiples_measure_ie({1}), q(0, 1));
    EXPECT_THROW(multiples_measure_ie({}), DomainError);
    std::vector<std::uint64_t> many(25);
    std::iota(many.begin(), many.end(), 2);
    EXPECT_THROW(multiples_measure_ie(many), ResourceError);
}

TEST(Measure, EulerProductExamples) {
    const auto b = euler_product(LocalFactor::parse("1-1/p^2"), 10'000);
    EXPECT_LT(b.width(), 1e-3);
    EXPECT_TRUE(b.contains(kSixOverPi2));
    // the partial product over p <= 7 bounds the full product from above
    EXPECT_LE(b.hi, to_double(multiples_measure_ie({4, 9, 25, 49})));

    const auto u = euler_product(LocalFactor::parse("1-1/p"), 1'000'000);
    EXPECT_LT(u.hi, 0.05);
    EXPECT_TRUE(u.has_flag("DIVERGENT-TAIL"));
    EXPECT_EQ(u.lo, 0.0);

    const auto one = euler_product(LocalFactor::parse("1"), 1000);
    EXPECT_EQ(one.lo, 1.0);
    EXPECT_EQ(one.hi, 1.0);

    EXPECT_THROW(LocalFactor::parse("1+1/p^2"), DomainError);
    EXPECT_THROW(LocalFactor::parse("1-x/p"), DomainError);
}

TEST(Measure, ZetaBracketExamples) {
    const double z2 = std::numbers::pi * std::numbers::pi / 6;
    const auto b = zeta_bracket(2, 1000);
    EXPECT_LT(b.width(), 1e-6);
    EXPECT_TRUE(b.contains(z2));
    const double z4 = std::pow(std::numbers::pi, 4) / 90;
    EXPECT_TRUE(zeta_bracket(4, 10).contains(z4));
    const auto c = zeta_bracket(1.5, 1'000'000);
    EXPECT_LE(c.lo, c.hi);
    const double N = 1e6;
    EXPECT_NEAR(c.width(), (std::pow(N, -0.5) - std::pow(N + 1, -0.5)) * 2, 1e-9);
    EXPECT_THROW(zeta_bracket(1, 10), DomainError);
    EXPECT_THROW(zeta_bracket(2, 1), DomainError);
    // oracle: direct summation to 10^7 for s = 2
    long double s = 0;
    for (std::uint64_t n = 10'000'000; n >= 1; --n) s += 1.0L / (static_cast<long double>(n) * n);
    EXPECT_TRUE(b.contains(static_cast<double>(s)));
}

TEST(MeasureProperty, BracketsContainDoubledCutoffValue) {
    for (double s : {1.3, 2.0, 3.5}) {
        for (std::uint64_t N : {100, 5000}) {
            const auto b = zeta_bracket(s, N), d = zeta_bracket(s, 2 * N);
            EXPECT_TRUE(b.contains(d.mid())) << s << " " << N;
            EXPECT_LE(d.width(), b.width());
        }
    }
    for (const char* f : {"1-1/p^2", "1-3/p^3", "1-1/p^4"}) {
        for (std::uint64_t P : {1000, 100'000}) {
            const auto b = euler_product(LocalFactor::parse(f), P), d = euler_product(LocalFactor::parse(f), 2 * P);
            EXPECT_TRUE(b.contains(d.mid())) << f << " " << P;
        }
    }
}

TEST(MeasureProperty, ChainMonotoneForExactAtoms) {
    const char* atoms[] = {"kfree(2)", "kfree(3)", "cong(1,3)", "multiples(4,6)", "image(x^2)", "image(x^2 + y^2)", "primes",
                           "finite(1,2,3)", "cong(0,4) | cong(0,6)"};
    for (const char* a : atoms) {
        const auto t = closure_measure_trace(compile(a), ModulusChain::primorial(), 6);
        EXPECT_TRUE(t.certified) << a;
        EXPECT_TRUE(t.nonincreasing()) << a;
        for (const auto& l : t.levels) EXPECT_TRUE(l.measure >= 0 && l.measure <= 1);
    }
    const auto c2 = closure_measure_trace(compile("coprime(2)"), ModulusChain::primorial(), 4);
    EXPECT_TRUE(c2.nonincreasing());
    EXPECT_EQ(c2.levels[3].measure, q(3, 4) * q(8, 9) * q(24, 25) * q(48, 49));
}

TEST(MeasureProperty, ScalingLaw) {
    // |pi_{am}(aX)| = |pi_m(X)|, with aX enumerated from X n [-N, N]
    SetOptions sym;
    sym.positive_only = false;
    for (const char* t : {"kfree(2)", "cong(1,3)"}) {
        const auto X = compile(t, sym);
        const auto members = X.members_1d(20'000);
        for (std::uint64_t a : {2, 3, 5})
            for (std::uint64_t m : {4, 12, 36}) {
                std::set<std::uint64_t> img;
                for (auto x : members) img.insert(mod_floor(static_cast<std::int64_t>(a) * x, a * m));
                const auto exact = X.residue_image(m);
                EXPECT_EQ(img.size(), exact.count()) << t << " a=" << a << " m=" << m;
                Rational scaled(img.size(), a * m);
                scaled.canonicalize();
                EXPECT_EQ(scaled, Rational(exact.measure() / a));
            }
    }
}

TEST(MeasureProperty, InclusionExclusionMatchesLevelMeasure) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::uint64_t> d(2, 40);
    for (int i = 0; i < 200; ++i) {
        std::vector<std::uint64_t> a(1 + rng() % 4);
        for (auto& x : a) x = d(rng);
        std::uint64_t L = 1;
        for (auto x : a) L = std::lcm(L, x);
        if (L > 200'000) continue;
        std::string list;
        for (auto x : a) list += (list.empty() ? "" : ",") + std::to_string(x);
        const auto img = compile("multiples(" + list + ")").residue_image(L);
        EXPECT_EQ(multiples_measure_ie(a), Rational(1) - img.measure()) << list;
    }
}
