#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "zhat/compiled_set.hpp"
#include "zhat/primes.hpp"

using namespace zhat;

namespace {

std::set<std::uint64_t> as_set(const ResidueImage& img) {
    auto v = img.residues_1d();
    return {v.begin(), v.end()};
}

bool squarefree_like(std::int64_t x, unsigned k) {
    if (x == 0) return false;
    std::uint64_t n = static_cast<std::uint64_t>(x < 0 ? -x : x);
    for (std::uint64_t p = 2; p * p <= n || p <= n; ++p) {
        std::uint64_t pk = 1;
        for (unsigned i = 0; i < k; ++i) pk *= p;
        if (pk > n) break;
        if (n % pk == 0) return false;
    }
    return true;
}

/// pi_m of {x in [-B, B] : pred(x)} by enumeration.
template <class Pred>
std::set<std::uint64_t> brute_image(std::uint64_t m, std::int64_t B, Pred pred) {
    std::set<std::uint64_t> out;
    for (std::int64_t x = -B; x <= B; ++x)
        if (pred(x)) out.insert(mod_floor(x, m));
    return out;
}

Expr random_atom(std::mt19937_64& rng, unsigned dim) {
    std::uniform_int_distribution<int> pick(0, dim == 1 ? 9 : 2);
    std::uniform_int_distribution<std::int64_t> small(-20, 20);
    std::uniform_int_distribution<std::uint64_t> mod(1, 30);
    switch (pick(rng)) {
    case 0: return make_node(Cong{small(rng), mod(rng)});
    case 1: {
        Multiples m;
        const int c = 1 + static_cast<int>(mod(rng) % 3);
        for (int i = 0; i < c; ++i) m.moduli.push_back(mod(rng));
        return make_node(m);
    }
    case 2: return dim == 1 ? make_node(KFree{static_cast<unsigned>(2 + mod(rng) % 3)}) : make_node(Coprime{dim});
    case 3: return make_node(Primes{});
    case 4: {
        Polynomial f = Polynomial::constant(small(rng));
        const unsigned vars = 1 + static_cast<unsigned>(mod(rng) % 2);
        for (unsigned v = 0; v < vars; ++v) {
            auto t = Polynomial::variable(v).pow(1 + static_cast<unsigned>(mod(rng) % 3));
            f = f + t * Polynomial::constant(small(rng) == 0 ? 1 : small(rng));
        }
        if (f.is_zero()) f = Polynomial::variable(0);
        return make_node(PolyImage{f});
    }
    case 5: return make_node(LeadingDigit{static_cast<unsigned>(1 + mod(rng) % 9), 10});
    case 6: return make_node(Seq{"factorial_shift"});
    case 7: {
        FiniteSet f;
        const int c = 1 + static_cast<int>(mod(rng) % 4);
        for (int i = 0; i < c; ++i) f.values.push_back(small(rng));
        return make_node(f);
    }
    case 8: return make_node(LeadingDigit{1, static_cast<unsigned>(2 + mod(rng) % 15)});
    default: return make_node(KFree{2});
    }
}

Expr random_tree(std::mt19937_64& rng, unsigned dim, int depth) {
    std::uniform_int_distribution<int> pick(0, 5);
    const int c = depth <= 0 ? 0 : pick(rng);
    if (c <= 2) return random_atom(rng, dim);
    if (c == 3) return make_node(Complement{random_tree(rng, dim, depth - 1)});
    static const BinaryOp ops[] = {BinaryOp::Union, BinaryOp::Intersection, BinaryOp::Difference};
    return make_node(Binary{ops[rng() % 3], random_tree(rng, dim, depth - 1), random_tree(rng, dim, depth - 1)});
}

} // namespace

TEST(SetDsl, ParseExamples) {
    const auto a = parse_set("kfree(2)");
    EXPECT_EQ(a.dim, 1u);
    ASSERT_TRUE(std::holds_alternative<KFree>(a.root->v));
    EXPECT_EQ(std::get<KFree>(a.root->v).k, 2u);

    const auto b = parse_set("cong(1,4) | cong(3,4)");
    ASSERT_TRUE(std::holds_alternative<Binary>(b.root->v));
    const auto& u = std::get<Binary>(b.root->v);
    EXPECT_EQ(u.op, BinaryOp::Union);
    EXPECT_TRUE(std::holds_alternative<Cong>(u.lhs->v));
    EXPECT_TRUE(std::holds_alternative<Cong>(u.rhs->v));

    const auto c = parse_set("coprime(2) & !multiples(9)");
    EXPECT_EQ(c.dim, 2u);
    EXPECT_EQ(compile(c).mode(), ImageMode::Truncated);
}

TEST(SetDsl, ParseErrors) {
    try {
        parse_set("kfree(2) | cong(1,");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_GE(e.position(), 17u);
        EXPECT_FALSE(e.expected().empty());
    }
    EXPECT_THROW(parse_set("kfree(1)"), ParseError);
    EXPECT_THROW(parse_set("leadingdigit(10,10)"), ParseError);
    EXPECT_THROW(parse_set("leadingdigit(0,10)"), ParseError);
    EXPECT_THROW(parse_set("cong(1,0)"), ParseError);
    EXPECT_THROW(parse_set("coprime(2) | kfree(2)"), ParseError);
    EXPECT_THROW(parse_set("multiples()"), ParseError);
    EXPECT_THROW(parse_set("bogus"), ParseError);
    EXPECT_THROW(parse_set("(kfree(2)"), ParseError);
    EXPECT_THROW(parse_set("image(x^)"), ParseError);
}

TEST(SetDsl, PrecedenceIsLeftAssociativeAndBangBindsTightest) {
    const auto e = parse_set("cong(0,2) | cong(0,3) & !cong(0,5)");
    EXPECT_EQ(print(e), "cong(0,2) | cong(0,3) & !cong(0,5)");
    const auto& top = std::get<Binary>(e.root->v);
    EXPECT_EQ(top.op, BinaryOp::Intersection);
    EXPECT_TRUE(std::holds_alternative<Binary>(top.lhs->v));
    EXPECT_TRUE(std::holds_alternative<Complement>(top.rhs->v));
    const auto g = parse_set("cong(0,2) \\ (cong(0,3) | cong(0,5))");
    EXPECT_EQ(print(g), "cong(0,2) \\ (cong(0,3) | cong(0,5))");
}

TEST(SetDsl, CompileModes) {
    EXPECT_EQ(compile("kfree(2)").mode(), ImageMode::Exact);
    EXPECT_EQ(compile("leadingdigit(1,10)").mode(), ImageMode::Truncated);
    EXPECT_EQ(compile("cong(0,4) | cong(0,6)").mode(), ImageMode::Exact);
    EXPECT_EQ(compile("seq(factorial)").mode(), ImageMode::Truncated);
    EXPECT_EQ(compile("cong(0,2) & cong(0,3)").mode(), ImageMode::Truncated);
    EXPECT_EQ(compile("!multiples(4)").mode(), ImageMode::Truncated);
    EXPECT_TRUE(compile("primes").assumes_dirichlet());
    EXPECT_FALSE(compile("kfree(2)").assumes_dirichlet());
}

TEST(SetDsl, UnknownSequenceListsRegistered) {
    try {
        compile("seq(nope)");
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("factorial"), std::string::npos);
        EXPECT_NE(msg.find("squares"), std::string::npos);
    }
}

TEST(SetDsl, ResidueImageExamples) {
    EXPECT_EQ(as_set(compile("kfree(2)").residue_image(8)), (std::set<std::uint64_t>{1, 2, 3, 5, 6, 7}));
    EXPECT_EQ(as_set(compile("cong(2,6)").residue_image(4)), (std::set<std::uint64_t>{0, 2}));
    EXPECT_EQ(as_set(compile("primes").residue_image(12)), (std::set<std::uint64_t>{1, 2, 3, 5, 7, 11}));

    // oracles: squarefree numbers to 10^4, x = 2 mod 6 to 100, primes below 10^3
    std::set<std::uint64_t> sq, c26, pr;
    for (std::int64_t x = 1; x <= 10'000; ++x)
        if (squarefree_like(x, 2)) sq.insert(x % 8);
    for (std::int64_t x = 2; x <= 100; x += 6) c26.insert(x % 4);
    for (auto p : primes_up_to(1000)) pr.insert(p % 12);
    EXPECT_EQ(as_set(compile("kfree(2)").residue_image(8)), sq);
    EXPECT_EQ(as_set(compile("cong(2,6)").residue_image(4)), c26);
    EXPECT_EQ(as_set(compile("primes").residue_image(12)), pr);
}

TEST(SetDsl, ResidueImageBudget) {
    SetOptions o;
    o.budget = 1000;
    EXPECT_THROW(compile("kfree(2)", o).residue_image(1001), ResourceError);
    EXPECT_THROW(compile("coprime(2)", o).residue_image(40), ResourceError);
    EXPECT_NO_THROW(compile("coprime(2)", o).residue_image(31));
    EXPECT_THROW(compile("leadingdigit(1,10)").truncated_image(100, 50), DomainError);
}

TEST(SetDsl, ExactRulesMatchBruteForce) {
    for (std::uint64_t m = 1; m <= 72; ++m) {
        const std::int64_t B = 20'000;
        EXPECT_EQ(as_set(compile("kfree(2)").residue_image(m)), brute_image(m, B, [](std::int64_t x) { return squarefree_like(x, 2); }))
            << m;
        EXPECT_EQ(as_set(compile("kfree(3)").residue_image(m)), brute_image(m, B, [](std::int64_t x) { return squarefree_like(x, 3); }))
            << m;
        EXPECT_EQ(as_set(compile("cong(5,14)").residue_image(m)), brute_image(m, 500, [](std::int64_t x) { return mod_floor(x, 14) == 5; }))
            << m;
        EXPECT_EQ(as_set(compile("multiples(4,6,9)").residue_image(m)),
                  brute_image(m, 500, [](std::int64_t x) { return x % 4 == 0 || x % 6 == 0 || x % 9 == 0; }))
            << m;
        std::set<std::uint64_t> cubic;
        for (std::int64_t x = -300; x <= 300; ++x) cubic.insert(mod_floor(x * x * x - 2 * x, m));
        EXPECT_EQ(as_set(compile("image(x^3 - 2*x)").residue_image(m)), cubic) << m;
        const auto pr = primes_up_to(100'000);
        std::set<std::uint64_t> ps;
        for (auto p : pr) ps.insert(p % m);
        EXPECT_EQ(as_set(compile("primes").residue_image(m)), ps) << m;
    }
}

TEST(SetDsl, CoprimePairRuleMatchesBruteForce) {
    const auto X = compile("coprime(2)");
    for (std::uint64_t m : {1, 2, 4, 6, 12, 30}) {
        const auto img = X.residue_image(m);
        std::set<std::pair<std::uint64_t, std::uint64_t>> brute;
        for (std::int64_t a = -60; a <= 60; ++a)
            for (std::int64_t b = -60; b <= 60; ++b)
                if (std::gcd(a, b) == 1) brute.insert({mod_floor(a, m), mod_floor(b, m)});
        std::set<std::pair<std::uint64_t, std::uint64_t>> got;
        for (const auto& t : img.residues()) got.insert({t[0], t[1]});
        EXPECT_EQ(got, brute) << m;
    }
}

TEST(SetDsl, MultivariatePolynomialImage) {
    const auto X = compile("image(x^2 + y^2)");
    EXPECT_EQ(X.dim(), 1u);
    EXPECT_TRUE(X.contains(25));
    EXPECT_TRUE(X.contains(0));
    EXPECT_FALSE(X.contains(3));
    EXPECT_FALSE(X.contains(-1));
    EXPECT_EQ(as_set(X.residue_image(4)), (std::set<std::uint64_t>{0, 1, 2}));
    EXPECT_EQ(X.members_1d(10), (std::vector<std::int64_t>{1, 2, 4, 5, 8, 9, 10}));
}

TEST(SetDsl, UnivariatePolynomialMembershipIsExact) {
    const auto X = compile("image(x^2 - 10)");
    EXPECT_TRUE(X.contains(-10));
    EXPECT_TRUE(X.contains(-9));
    EXPECT_FALSE(X.contains(-8));
    EXPECT_TRUE(X.contains(999'999'999'990));
    EXPECT_FALSE(X.contains(999'999'999'991));
    // value reached only on the negative tail
    EXPECT_TRUE(compile("image(9*x - 13)").contains(-292));
    EXPECT_FALSE(compile("image(9*x - 13)").contains(-291));
}

TEST(SetDsl, CrtSplitExamples) {
    const auto sq = crt_split(compile("image(x^2)").residue_image(12));
    EXPECT_TRUE(sq.is_product);
    EXPECT_EQ(sq.image_size, 4u);
    EXPECT_EQ(as_set(sq.factors.at(4)), (std::set<std::uint64_t>{0, 1}));
    EXPECT_EQ(as_set(sq.factors.at(3)), (std::set<std::uint64_t>{0, 1}));

    const auto pr = crt_split(compile("primes").residue_image(12));
    EXPECT_FALSE(pr.is_product);
    EXPECT_EQ(pr.image_size, 6u);
    EXPECT_EQ(pr.product_size, 9);
    EXPECT_EQ(as_set(pr.factors.at(4)), (std::set<std::uint64_t>{1, 2, 3}));
    EXPECT_EQ(as_set(pr.factors.at(3)), (std::set<std::uint64_t>{0, 1, 2}));

    for (std::uint64_t q : {8, 9, 25, 49}) EXPECT_TRUE(crt_split(compile("primes").residue_image(q)).is_product) << q;
    EXPECT_THROW(crt_split(compile("leadingdigit(1,10)").residue_image(10, 100)), ModeError);
}

TEST(SetDsl, MembersInBoxExamples) {
    EXPECT_EQ(compile("kfree(2)").members_1d(10), (std::vector<std::int64_t>{1, 2, 3, 5, 6, 7, 10}));
    EXPECT_EQ(compile("seq(factorial_shift)").members_1d(30), (std::vector<std::int64_t>{2, 4, 9, 28}));
    SetOptions pos;
    pos.positive_only = true;
    EXPECT_EQ(compile("coprime(2)", pos).members_in_box(2), (std::vector<Point>{{1, 1}, {1, 2}, {2, 1}}));
    SetOptions sym;
    sym.positive_only = false;
    EXPECT_EQ(compile("finite(-3,0,3,7)", sym).members_1d(5), (std::vector<std::int64_t>{-3, 0, 3}));
    EXPECT_EQ(compile("leadingdigit(1,10)").members_1d(200).size(), 111u);
}

TEST(SetDslProperty, MonotoneRefinement) {
    const char* exact[] = {"kfree(2)", "cong(3,10)", "multiples(4,6)", "image(x^2)", "primes", "finite(1,2,3)", "cong(1,4) | kfree(3)"};
    for (const char* t : exact) {
        const auto X = compile(t);
        for (auto [m, M] : {std::pair<std::uint64_t, std::uint64_t>{6, 36}, {4, 120}, {10, 900}, {12, 360}}) {
            EXPECT_EQ(as_set(X.residue_image(M).reduce(m)), as_set(X.residue_image(m))) << t << " " << m << "|" << M;
        }
    }
    const auto L = compile("leadingdigit(1,10) & !cong(0,3)");
    for (auto [m, M] : {std::pair<std::uint64_t, std::uint64_t>{6, 36}, {10, 100}}) {
        const auto a = as_set(L.residue_image(M, 10'000).reduce(m)), b = as_set(L.residue_image(m, 10'000));
        EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
}

TEST(SetDslProperty, TruncatedStabilizesToExact) {
    for (const char* t : {"kfree(2)", "cong(7,12)", "multiples(4,6,10)", "kfree(3)", "image(x^2+1)"}) {
        const auto X = compile(t);
        for (std::uint64_t m : {8, 12, 30, 72}) {
            std::size_t prev = 0;
            for (std::int64_t N : {static_cast<std::int64_t>(m), 4 * static_cast<std::int64_t>(m), 1000L, 20'000L}) {
                const auto tr = X.truncated_image(m, N);
                EXPECT_GE(tr.count(), prev);
                prev = tr.count();
                const auto ex = as_set(X.residue_image(m)), ts = as_set(tr);
                EXPECT_TRUE(std::includes(ex.begin(), ex.end(), ts.begin(), ts.end()));
            }
            EXPECT_EQ(as_set(X.truncated_image(m, 20'000)), as_set(X.residue_image(m))) << t << " mod " << m;
        }
    }
}

TEST(SetDslProperty, UnionAndIntersectionImageLaws) {
    const char* atoms[] = {"cong(0,2)", "cong(1,2)", "kfree(2)", "multiples(3,5)", "image(x^2)", "cong(2,9)"};
    for (const char* a : atoms)
        for (const char* b : atoms) {
            const auto A = compile(a), B = compile(b);
            const auto U = compile(std::string(a) + " | " + b), I = compile(std::string(a) + " & " + b);
            for (std::uint64_t m : {1, 4, 6, 18}) {
                auto ia = as_set(A.residue_image(m)), ib = as_set(B.residue_image(m));
                std::set<std::uint64_t> uni = ia;
                uni.insert(ib.begin(), ib.end());
                EXPECT_EQ(as_set(U.residue_image(m)), uni);
                const auto ii = as_set(I.residue_image(m, 5000));
                for (auto r : ii) EXPECT_TRUE(ia.count(r) && ib.count(r));
            }
        }
    // strict instance: evens and odds both reach the single class mod 1
    const auto I = compile("cong(0,2) & cong(1,2)");
    EXPECT_EQ(I.residue_image(1, 10).count(), 0u);
    EXPECT_EQ(compile("cong(0,2)").residue_image(1).count(), 1u);
    EXPECT_EQ(compile("cong(1,2)").residue_image(1).count(), 1u);
}

TEST(SetDslProperty, MembershipAgreesWithBoxIndicator) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 60; ++i) {
        SetExpr e{random_tree(rng, 1, 3), 1};
        SetOptions o;
        o.positive_only = false;
        const auto X = compile(e, o);
        const auto flags = X.indicator(Box{1, -300, 300});
        for (std::int64_t x = -300; x <= 300; ++x) ASSERT_EQ(flags[static_cast<std::size_t>(x + 300)] != 0, X.contains(x)) << X.text() << " at " << x;
    }
}

TEST(SetDslProperty, ParsePrintRoundTrip) {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 1000; ++i) {
        const unsigned dim = i % 4 == 0 ? 2 : 1;
        const SetExpr e{random_tree(rng, dim, 4), dim};
        const std::string text = print(e);
        const SetExpr back = parse_set(text);
        ASSERT_TRUE(back == e || (back.dim != e.dim && equal(back.root, e.root) && fixed_dim(e.root) == 0)) << text;
        EXPECT_EQ(print(back), text);
    }
}
