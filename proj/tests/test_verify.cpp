#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "zhat/verify.hpp"

using namespace zhat;

namespace {

const double kSixOverPi2 = 6.0 / (std::numbers::pi * std::numbers::pi);

Rational q(long n, long d) {
    Rational r(n, d);
    r.canonicalize();
    return r;
}

Rational exact(const Json& j) { return Rational(j.get<std::string>()); }

// Residues x mod M (M = product of the primes) with at most k of them dividing x.
Rational omega_oracle(unsigned k, const std::vector<std::uint64_t>& primes) {
    std::uint64_t M = 1;
    for (auto p : primes) M *= p;
    std::uint64_t good = 0;
    for (std::uint64_t x = 0; x < M; ++x) {
        unsigned c = 0;
        for (auto p : primes) c += x % p == 0;
        good += c <= k;
    }
    Rational r(big_from_u64(good), big_from_u64(M));
    r.canonicalize();
    return r;
}

} // namespace

TEST(DavenportErdos, SquaresOfPrimes) {
    DavenportErdosInput in;
    in.moduli = {};
    in.power = 2;
    in.pmax = 31;
    const auto rep = davenport_erdos(in);
    const auto& qt = rep.quantities;
    EXPECT_TRUE(qt["ie_nonincreasing"].get<bool>());
    EXPECT_TRUE(qt["delta_increasing"].get<bool>());
    EXPECT_TRUE(qt["delta_at_1_equals_ie"].get<bool>());
    EXPECT_NEAR(qt["limit_bracket"]["lo"].get<double>(), kSixOverPi2, 5e-3);
    EXPECT_NEAR(qt["limit_bracket"]["hi"].get<double>(), kSixOverPi2, 5e-3);
    EXPECT_LE(qt["d_as"]["distance"].get<double>(), 5e-3);
    EXPECT_LE(qt["d_log"]["distance"].get<double>(), 5e-3);
    EXPECT_EQ(rep.verdict, Verdict::Pass);
}

TEST(DavenportErdos, FourAndSix) {
    DavenportErdosInput in;
    in.moduli = {4, 6};
    in.r_max = 1'000'000;
    const auto rep = davenport_erdos(in);
    EXPECT_EQ(exact(rep.quantities["ie_measures"].back()["measure"]), q(2, 3));
    EXPECT_EQ(exact(rep.quantities["delta_at_1"]), q(2, 3));
    EXPECT_NEAR(rep.quantities["d_as"]["lower"].get<double>(), 0.667, 1e-2);
    EXPECT_NEAR(rep.quantities["d_as"]["upper"].get<double>(), 0.667, 1e-2);
    EXPECT_EQ(rep.verdict, Verdict::Pass);
}

TEST(DavenportErdos, PrimesFamilyVanishes) {
    DavenportErdosInput in;
    in.power = 1;
    in.pmax = 31;
    in.r_max = 1'000'000;
    const auto rep = davenport_erdos(in);
    // Mertens-type product over p <= 31.
    Rational mertens = 1;
    for (auto p : primes_up_to(31)) mertens *= Rational(big_from_u64(p - 1), big_from_u64(p));
    mertens.canonicalize();
    EXPECT_EQ(exact(rep.quantities["ie_measures"].back()["measure"]), mertens);
    EXPECT_TRUE(rep.quantities["ie_nonincreasing"].get<bool>());
    EXPECT_EQ(rep.quantities["limit_bracket"]["lo"].get<double>(), 0.0);
    bool divergent = false;
    for (const auto& line : rep.narrative) divergent |= line.find("DIVERGENT-TAIL") != std::string::npos;
    EXPECT_TRUE(divergent);
    EXPECT_EQ(rep.verdict, Verdict::Pass);
}

TEST(Dirichlet, Coverage) {
    const auto rep = dirichlet_coverage(100, 100'000);
    EXPECT_EQ(rep.verdict, Verdict::Pass);
    EXPECT_TRUE(rep.quantities["missing"].empty());
    EXPECT_EQ(rep.quantities["images"]["12"], Json::parse("[1,2,3,5,7,11]"));
    EXPECT_EQ(rep.quantities["images"]["2"], Json::parse("[0,1]"));
}

TEST(Dirichlet, SmallBoundIsInconclusive) {
    const auto rep = dirichlet_coverage(30, 20);
    EXPECT_EQ(rep.verdict, Verdict::Inconclusive);
    EXPECT_FALSE(rep.quantities["missing"].empty());
    EXPECT_THROW(dirichlet_coverage(1, 100), DomainError);
}

TEST(OmegaBound, Examples) {
    const auto k0 = omega_bound_measure(0, {29});
    Rational phi = 1;
    for (auto p : primes_up_to(29)) phi *= Rational(big_from_u64(p - 1), big_from_u64(p));
    phi.canonicalize();
    EXPECT_EQ(exact(k0.quantities["trace"][0]["closed_form"]), phi);

    const auto k1 = omega_bound_measure(1, {13});
    EXPECT_EQ(k1.quantities["trace"][0]["modulus"], 30030);
    EXPECT_EQ(exact(k1.quantities["trace"][0]["direct"]), omega_oracle(1, primes_up_to(13)));
    EXPECT_EQ(exact(k1.quantities["trace"][0]["closed_form"]), omega_oracle(1, primes_up_to(13)));

    const auto k2 = omega_bound_measure(2, {7, 13, 19});
    EXPECT_TRUE(k2.quantities["strictly_decreasing"].get<bool>());
    EXPECT_TRUE(k2.quantities["closed_form_matches"].get<bool>());
    EXPECT_EQ(k2.verdict, Verdict::Pass);
}

TEST(Eulerian, Examples) {
    EXPECT_EQ(eulerian_check(compile("image(x^2)"), {12, 360}).verdict, Verdict::Pass);
    EXPECT_EQ(eulerian_check(compile("coprime(2)"), {12, 60}).verdict, Verdict::Pass);
    const auto pr = eulerian_check(compile("primes"), {12});
    EXPECT_FALSE(pr.quantities["product_at_all_levels"].get<bool>());
    EXPECT_EQ(pr.quantities["levels"][0]["image_size"], 6);
    EXPECT_EQ(pr.quantities["levels"][0]["product_size"], "9");
    EXPECT_EQ(pr.verdict, Verdict::Fail);
    EXPECT_EQ(eulerian_check(compile("leadingdigit(1,10)"), {12}, 1000).verdict, Verdict::Inconclusive);
}

// Squares mod 12 are {0,1,4,9}: 2 classes mod 4 times 2 mod 3.
TEST(Eulerian, SquaresOracle) {
    const auto rep = eulerian_check(compile("image(x^2)"), {12});
    EXPECT_EQ(rep.quantities["levels"][0]["image_size"], 4);
    EXPECT_EQ(rep.quantities["levels"][0]["product_size"], "4");
}

TEST(EulerianProperty, RandomPolynomials) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> deg(1, 4), coef(-9, 9);
    std::uniform_int_distribution<std::uint64_t> md(2, 10'000);
    for (int t = 0; t < 50; ++t) {
        const int d = deg(rng);
        std::string f;
        for (int e = d; e >= 0; --e) {
            int c = coef(rng);
            if (e == d && c == 0) c = 1;
            f += (e == d ? "" : " + ") + std::string("(") + std::to_string(c) + ")" + (e ? "*x^" + std::to_string(e) : "");
        }
        const std::uint64_t m = md(rng);
        const auto rep = eulerian_check(compile("image(" + f + ")"), {m});
        EXPECT_EQ(rep.verdict, Verdict::Pass) << f << " mod " << m;
    }
}

TEST(Asdmltp, FourNineTwentyFive) {
    AsdmltpInput in;
    in.moduli = {4, 9, 25};
    const auto rep = asdmltp_verify(in);
    EXPECT_EQ(exact(rep.quantities["target"]["exact"]), q(3, 4) * q(8, 9) * q(24, 25));
    EXPECT_EQ(exact(rep.quantities["target"]["exact"]), q(16, 25));
    EXPECT_TRUE(rep.quantities["ie_equals_target"].get<bool>());
    EXPECT_NEAR(rep.quantities["d_as"]["lower"].get<double>(), 0.64, 1e-2);
    EXPECT_NEAR(rep.quantities["d_as"]["upper"].get<double>(), 0.64, 1e-2);
    EXPECT_EQ(rep.quantities["level_check"]["m"], 900);
    EXPECT_TRUE(rep.quantities["level_check"]["equal"].get<bool>());
    EXPECT_EQ(rep.verdict, Verdict::Pass);
}

TEST(Asdmltp, OtherFamilies) {
    AsdmltpInput a;
    a.moduli = {4, 77};
    const auto ra = asdmltp_verify(a);
    EXPECT_EQ(exact(ra.quantities["ie"]["exact"]), q(3, 4) * q(76, 77));
    // Residues mod 308 avoiding 0 mod 4 and 0 mod 77: 308 - 77 - 4 + 1.
    EXPECT_EQ(ra.quantities["level_check"]["local_count"], 228);
    EXPECT_EQ(ra.verdict, Verdict::Pass);

    AsdmltpInput b;
    b.moduli = {6, 35, 143};
    const auto rb = asdmltp_verify(b);
    EXPECT_EQ(exact(rb.quantities["target"]["exact"]), q(5, 6) * q(34, 35) * q(142, 143));
    EXPECT_TRUE(rb.quantities["ie_equals_target"].get<bool>());
    EXPECT_EQ(rb.verdict, Verdict::Pass);
}

TEST(Asdmltp, RejectsBadInput) {
    AsdmltpInput in;
    in.moduli = {4, 6};
    EXPECT_THROW(asdmltp_verify(in), DomainError);
    in.moduli = {4, 7};
    EXPECT_THROW(asdmltp_verify(in), DomainError);
    in.moduli = {};
    EXPECT_THROW(asdmltp_verify(in), DomainError);
}

TEST(PoonenStoll, Presets) {
    const auto sf = poonen_stoll_tail(LocalSpec::preset("squarefree"), {10, 100, 1000, 10000});
    EXPECT_EQ(sf.verdict, Verdict::Pass);
    const auto& tb = sf.quantities["tail_bounds"];
    for (const auto& t : tb) EXPECT_LT(t["tail_bound"].get<double>(), 1.0 / t["cutoff"].get<double>() + 1e-12);
    EXPECT_LE(sf.quantities["product_bracket"]["lo"].get<double>(), kSixOverPi2);
    EXPECT_GE(sf.quantities["product_bracket"]["hi"].get<double>(), kSixOverPi2);

    EXPECT_EQ(poonen_stoll_tail(LocalSpec::preset("units"), {10, 100, 1000}).verdict, Verdict::Inconclusive);

    const auto triv = poonen_stoll_tail(LocalSpec::preset("trivial"), {10, 100});
    EXPECT_EQ(triv.verdict, Verdict::Pass);
    EXPECT_EQ(triv.quantities["tail_bounds"].back()["tail_bound"].get<double>(), 0.0);
    EXPECT_EQ(triv.quantities["product_bracket"]["lo"].get<double>(), 1.0);

    EXPECT_THROW(LocalSpec::preset("nope"), DomainError);
}

TEST(MtCriterion, Examples) {
    const auto c5 = mt_criterion(compile("cong(0,5)"), ModulusChain::primorial(), 4, 100'000);
    for (const auto& l : c5.quantities["trace"])
        if (l["m"].get<std::uint64_t>() % 5 == 0) EXPECT_EQ(l["gap_upper"].get<double>(), 0.0);
    EXPECT_EQ(c5.verdict, Verdict::Pass);

    const auto sf = mt_criterion(compile("kfree(2)"), ModulusChain::primorial_power(2), 4, 1'000'000);
    const auto& tr = sf.quantities["trace"];
    ASSERT_EQ(tr.size(), 4u);
    for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_LT(tr[i]["gap_upper"].get<double>(), tr[i - 1]["gap_upper"].get<double>());
    EXPECT_LT(tr.back()["gap_upper"].get<double>(), 0.03);

    // Primes: the gap tracks the unit density at each level and does not vanish.
    const auto pr = mt_criterion(compile("primes"), ModulusChain::primorial(), 4, 1'000'000);
    EXPECT_EQ(pr.verdict, Verdict::Inconclusive);
    EXPECT_GT(pr.quantities["trace"].back()["gap_upper"].get<double>(), 0.15);
}

TEST(Counterexample, Bounds) {
    const auto a4 = counterexample_cover(4, 10);
    EXPECT_TRUE(a4.quantities["all_enumerated_covered"].get<bool>());
    const Rational b4 = 1 - q(1, 3) * (1 - Rational(BigInt(1), big_pow(4, 10)));
    EXPECT_EQ(exact(a4.quantities["bound"]["exact"]), b4);
    EXPECT_GE(exact(a4.quantities["complement_level_measure"]["exact"]), b4);
    EXPECT_GT(a4.quantities["complement_level_measure"]["float"].get<double>(), 0.666);
    EXPECT_EQ(a4.verdict, Verdict::Pass);

    const auto a3 = counterexample_cover(3, 8);
    EXPECT_GT(a3.quantities["bound"]["float"].get<double>(), 0.5);
    const auto a10 = counterexample_cover(10, 5);
    EXPECT_GT(a10.quantities["bound"]["float"].get<double>(), 0.888);
    EXPECT_EQ(a10.quantities["enumerated"], Json::parse("[0,1,-1,2,-2]"));
    EXPECT_TRUE(a10.quantities["all_enumerated_covered"].get<bool>());

    EXPECT_THROW(counterexample_cover(2, 5), DomainError);
}

TEST(UnionDense, Cases) {
    const auto fam = union_dense_check({{2}, {3}, {5}, {7}, {11}}, true);
    EXPECT_TRUE(fam.quantities["dense"].get<bool>());

    const auto seven = union_dense_check({{7, 2}, {7}, {3, 7, 11}}, false);
    EXPECT_FALSE(seven.quantities["dense"].get<bool>());
    EXPECT_EQ(seven.quantities["hitting_set"], Json::parse("[7]"));

    const auto tri = union_dense_check({{2, 3}, {3, 5}, {2, 5}}, false);
    EXPECT_FALSE(tri.quantities["dense"].get<bool>());
    std::set<std::uint64_t> hs;
    for (const auto& p : tri.quantities["hitting_set"]) hs.insert(p.get<std::uint64_t>());
    for (const std::set<std::uint64_t> s : {std::set<std::uint64_t>{2, 3}, {3, 5}, {2, 5}}) {
        bool hit = false;
        for (auto p : s) hit |= hs.count(p) > 0;
        EXPECT_TRUE(hit);
    }
    EXPECT_THROW(union_dense_check({}, false), DomainError);
    EXPECT_THROW(union_dense_check({{2, 3}, {3}}, true), DomainError);
}

TEST(VerifyAxioms, Report) {
    const auto rep = verify_axioms(100, 42, 1);
    EXPECT_EQ(rep.verdict, Verdict::Pass);
    bool dn7 = false;
    for (const auto& a : rep.quantities["deformed"]) {
        if (a["axiom"] == "Dn7") {
            dn7 = true;
            EXPECT_GT(a["failures"].get<int>(), 0);
        } else {
            EXPECT_EQ(a["failures"].get<int>(), 0) << a["axiom"];
        }
    }
    EXPECT_TRUE(dn7);
}

TEST(VerifyProperty, Reproducible) {
    AsdmltpInput in;
    in.moduli = {4, 9, 25};
    in.r_max = 100'000;
    in.N = 100'000;
    EXPECT_EQ(asdmltp_verify(in).quantities.dump(), asdmltp_verify(in).quantities.dump());
    EXPECT_EQ(verify_axioms(30, 7, 0).quantities.dump(), verify_axioms(30, 7, 0).quantities.dump());
}
