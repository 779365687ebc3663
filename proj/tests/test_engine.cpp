#include "freecum/checker.hpp"
#include "freecum/engine.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace freecum;

namespace {

FreeModel two_poisson(const Rational& lambda, const Rational& kappa)
{
    FreeModel m;
    m.add_family(free_poisson_family("X", FreePoissonParams(lambda, 1)));
    m.add_family(free_poisson_family("Y", FreePoissonParams(kappa, 1)));
    return m;
}

Word word(const FreeModel& m, const std::string& text)
{
    Expr e = parse_expr(text, m);
    EXPECT_EQ(e.terms().size(), 1u);
    return e.terms().begin()->first;
}

Rational random_rational(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
    return Rational(num(rng)) / den(rng);
}

}  // namespace

TEST(Words, RotateCanonical)
{
    FreeModel m = two_poisson(2, 3);
    EXPECT_EQ(rotate_canonical(word(m, "X*Xi")), word(m, "Xi*X"));
    EXPECT_EQ(rotate_canonical(word(m, "Y*Xi*Y")), word(m, "Xi*Y*Y"));
    EXPECT_EQ(rotate_canonical(word(m, "Y")), word(m, "Y"));
    EXPECT_TRUE(Word(std::vector<Letter>{kIdentity, kIdentity}).empty());
}

TEST(Expressions, Grammar)
{
    FreeModel m = two_poisson(2, 3);
    const Letter x = m.letter("X"), xi = m.letter("X", -1), y = m.letter("Y");
    EXPECT_EQ(parse_expr("I + Xi*Y", m), Expr::identity() + Expr(Word{xi, y}));
    EXPECT_EQ(parse_expr("X+Y", m), Expr(Word{x}) + Expr(Word{y}));
    EXPECT_EQ(parse_expr("3/2*X*Y - 1/2*Y", m), Expr(Word{x, y}, Rational(3, 2)) + Expr(Word{y}, Rational(-1, 2)));
    EXPECT_EQ(parse_expr("-X + X", m), Expr());
    EXPECT_EQ(parse_expr("X*I*Xi", m), Expr(Word{x, xi}));
    EXPECT_EQ(m.expr_name(parse_expr("I + Xi*Y", m)), "I + Xi*Y");
    EXPECT_THROW(parse_expr("X + Z", m), std::invalid_argument);
    EXPECT_THROW(parse_expr("X +", m), std::invalid_argument);
    EXPECT_THROW(parse_expr("1.5*X", m), std::invalid_argument);

    FreeModel nonInv = two_poisson(Rational(1, 2), 3);
    EXPECT_THROW(parse_expr("Xi", nonInv), std::invalid_argument);
}

TEST(Engine, MomentExamples)
{
    Engine e(two_poisson(2, 3));
    const auto& m = e.model();
    EXPECT_EQ(e.word_moment(word(m, "X")), 2);
    EXPECT_EQ(e.word_moment(word(m, "Xi*X")), 1);
    // phi(a^2) phi(b)^2 + phi(a)^2 phi(b^2) - phi(a)^2 phi(b)^2 = 6*9 + 4*12 - 4*9.
    EXPECT_EQ(e.word_moment(word(m, "X*Y*X*Y")), 66);
    EXPECT_EQ(e.word_moment_reference(word(m, "X*Y*X*Y")), 66);
}

TEST(Engine, FastMomentMatchesPartitionSum)
{
    Engine e(two_poisson(Rational(5, 2), Rational(3, 2)));
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pick(0, 3), len(1, 8);
    const std::vector<Letter> alphabet{e.model().letter("X"), e.model().letter("X", -1), e.model().letter("Y"),
                                       e.model().letter("Y", -1)};
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<Letter> letters;
        int n = len(rng);
        for (int i = 0; i < n; ++i)
            letters.push_back(alphabet[static_cast<std::size_t>(pick(rng))]);
        Word w(letters);
        EXPECT_EQ(e.word_moment(w), e.word_moment_reference(w)) << e.model().word_name(w);
    }
}

TEST(Engine, JointCumulantExamples)
{
    Engine e(two_poisson(2, 3));
    const auto& m = e.model();
    EXPECT_EQ(e.joint_cumulant(word(m, "Xi*X")), -1);
    EXPECT_EQ(e.joint_cumulant(word(m, "X*Y")), 0);
    EXPECT_EQ(e.joint_cumulant(word(m, "Xi*X*Xi")), -1);
    EXPECT_THROW(e.joint_cumulant(Word{}), std::domain_error);
    std::vector<Letter> longWord(kMaxWordLength + 1, m.letter("X"));
    EXPECT_THROW(e.word_moment(Word(longWord)), std::length_error);
}

TEST(Engine, ClosedFormForInverseRuns)
{
    EXPECT_EQ(prop31_closed_form({2}, 2, 1), 0);
    EXPECT_EQ(prop31_closed_form({1}, 2, 1), -1);
    EXPECT_EQ(prop31_closed_form({1, 1, 0}, 2, 1), 2);
    EXPECT_THROW(prop31_closed_form({1}, 1, 1), NonInvertibleError);
    for (Rational lambda : {Rational(2), Rational(3), Rational(7, 2)}) {
        FreeModel m;
        m.add_family(free_poisson_family("X", FreePoissonParams(lambda, 1)));
        Engine e(m);
        EXPECT_EQ(e.joint_cumulant(prop31_word({1})), -1 / (lambda - 1));
        for (const auto& runs : run_length_patterns(8))
            ASSERT_EQ(e.joint_cumulant(prop31_word(runs)), prop31_closed_form(runs, lambda, 1)) << runs_query(runs);
    }
}

TEST(Engine, AlphaCovariance)
{
    // A word with p letters X and q letters X^{-1} scales as alpha^{p-q}.
    for (Rational alpha : {Rational(2), Rational(1, 3)}) {
        FreeModel unit, scaled;
        unit.add_family(free_poisson_family("X", FreePoissonParams(3, 1)));
        scaled.add_family(free_poisson_family("X", FreePoissonParams(3, alpha)));
        Engine eu(unit), es(scaled);
        for (const auto& runs : run_length_patterns(6)) {
            Word w = prop31_word(runs);
            long p = 0, q = 0;
            for (const auto& l : w)
                (l.power > 0 ? p : q) += 1;
            EXPECT_EQ(es.joint_cumulant(w), eu.joint_cumulant(w) * pow(alpha, p - q));
            EXPECT_EQ(es.joint_cumulant(w), prop31_closed_form(runs, 3, alpha));
        }
    }
}

TEST(Engine, MomentCumulantRoundTrip)
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Rational> kappa(9);
        for (int k = 1; k <= 8; ++k)
            kappa[static_cast<std::size_t>(k)] = random_rational(rng);
        auto moments = moments_from_cumulants([&](int k) { return kappa[static_cast<std::size_t>(k)]; }, 8);
        auto back = cumulants_from_moments(moments);
        for (int k = 1; k <= 8; ++k)
            ASSERT_EQ(back[static_cast<std::size_t>(k - 1)], kappa[static_cast<std::size_t>(k)]) << trial;
        // The single-family engine recovers the same cumulants from its moment table.
        FreeModel viaMoments;
        Family f;
        f.symbol = "A";
        f.moment = [moments](int k) { return moments.at(static_cast<std::size_t>(k)); };
        viaMoments.add_family(f);
        Engine e(viaMoments);
        Word a8(std::vector<Letter>(8, viaMoments.letter("A")));
        ASSERT_EQ(e.joint_cumulant(a8), kappa[8]);
    }
}

TEST(Engine, SemicircleMomentsAreCatalan)
{
    FreeModel m;
    m.add_family(semicircle_family("S"));
    Engine e(m);
    for (int n = 1; n <= 24; ++n) {
        Word w(std::vector<Letter>(static_cast<std::size_t>(n), m.letter("S")));
        Rational expected = n % 2 ? Rational(0) : Rational(catalan(static_cast<unsigned>(n / 2)));
        EXPECT_EQ(e.word_moment(w), expected) << n;
    }
}

TEST(Engine, MixedCumulantExamples)
{
    Engine e(two_poisson(2, 3));
    const auto& m = e.model();
    auto ex = [&](const std::string& s) { return parse_expr(s, m); };
    EXPECT_EQ(e.expr_mixed_cumulant({ex("X+Y")}), 5);
    EXPECT_EQ(e.expr_mixed_cumulant({ex("X+Y"), ex("X+Y")}), 5);
    EXPECT_EQ(e.expr_mixed_cumulant({ex("I"), ex("X")}), 0);
    EXPECT_EQ(e.product_expand(ex("Xi"), ex("X"), {}), 1);
    EXPECT_EQ(e.product_expand(ex("X"), ex("I"), {}), 2);
    EXPECT_EQ(e.product_expand(ex("Xi"), ex("X"), {ex("Xi")}), 0);
    EXPECT_EQ(e.cumulant_of_products({ex("X")}, {ex("Y")}), 6);
    EXPECT_EQ(e.cumulant_of_products({ex("X"), ex("X")}, {ex("I"), ex("I")}), e.expr_mixed_cumulant({ex("X"), ex("X")}));
    EXPECT_EQ(e.cumulant_of_products({ex("X"), ex("X")}, {ex("Y"), ex("Y")}),
              e.expr_mixed_cumulant({ex("X*Y"), ex("X*Y")}));
    EXPECT_THROW(e.cumulant_of_products({ex("X")}, {ex("X")}), std::domain_error);
}

// The three-term expansion, the NC-join sum and the direct cumulant of the
// product must agree.
TEST(Engine, ProductExpansionAgreesThreeWays)
{
    Engine e(two_poisson(3, Rational(5, 2)));
    const auto& m = e.model();
    const std::vector<std::string> pool{"X", "Xi", "Y", "Yi", "X+Y", "I + Xi*Y", "2*X - Y", "Xi*Y", "I", "Y*Xi - 1/2*X"};
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_int_distribution<int> rest_len(0, 2);
    int cases = 0;
    for (int trial = 0; trial < 60; ++trial) {
        Expr a = parse_expr(pool[pick(rng)], m), b = parse_expr(pool[pick(rng)], m);
        std::vector<Expr> rest;
        for (int i = rest_len(rng); i > 0; --i)
            rest.push_back(parse_expr(pool[pick(rng)], m));
        std::vector<Expr> direct{a * b};
        direct.insert(direct.end(), rest.begin(), rest.end());
        Rational expected = e.expr_mixed_cumulant(direct);
        EXPECT_EQ(e.product_expand(a, b, rest), expected) << trial;
        EXPECT_EQ(e.product_expand_by_join(a, b, rest), expected) << trial;
        ++cases;
    }
    EXPECT_GE(cases, 50);
}

TEST(Engine, CumulantOfProductsUpToFour)
{
    Engine e(two_poisson(Rational(7, 2), 2));
    const auto& m = e.model();
    const std::vector<std::string> xs_pool{"X", "Xi", "I + X", "2*X - Xi"};
    const std::vector<std::string> ys_pool{"Y", "Yi", "I", "Y - 1/3*I"};
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, 3);
    for (int n = 1; n <= 4; ++n)
        for (int trial = 0; trial < 6; ++trial) {
            std::vector<Expr> xs, ys, prods;
            for (int i = 0; i < n; ++i) {
                xs.push_back(parse_expr(xs_pool[pick(rng)], m));
                ys.push_back(parse_expr(ys_pool[pick(rng)], m));
                prods.push_back(xs.back() * ys.back());
            }
            EXPECT_EQ(e.cumulant_of_products(xs, ys), e.expr_mixed_cumulant(prods)) << "n=" << n;
        }
}

TEST(Engine, TracialityWithoutRotationCanonicalization)
{
    EngineOptions raw;
    raw.canonical_rotation = false;
    Engine e(lukacs_model(Rational(5, 2), Rational(3, 2), 1), raw);
    const auto& m = e.model();
    for (const std::string& text : {"Xi*Y*X*X*Yi", "X*Y*Xi*Y*Y*Xi"}) {
        Word w = word(m, text);
        std::vector<Letter> letters(w.begin(), w.end());
        Rational first = e.word_moment(w);
        for (std::size_t r = 1; r < letters.size(); ++r) {
            std::rotate(letters.begin(), letters.begin() + 1, letters.end());
            EXPECT_EQ(e.word_moment(Word(letters)), first) << text << " rotation " << r;
        }
    }
    auto slots = lukacs_slots(m, "UUVV");
    Rational base = e.expr_mixed_cumulant(slots);
    for (int r = 1; r < 4; ++r) {
        std::rotate(slots.begin(), slots.begin() + 1, slots.end());
        EXPECT_EQ(e.expr_mixed_cumulant(slots), base);
    }
}

TEST(Engine, InverseCumulantsFromFirstCumulant)
{
    EXPECT_EQ(remark32_derive(2, 1)[0], 1);
    EXPECT_EQ(remark32_derive(2, 3)[2], 2);
    EXPECT_EQ(remark32_derive(3, 2)[1], Rational(1, 8));
    EXPECT_EQ(remark32_derive(3, 1)[0], Rational(1, 2));
    EXPECT_THROW(remark32_derive(1, 3), std::domain_error);
}
