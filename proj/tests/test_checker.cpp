#include "freecum/checker.hpp"

#include <gtest/gtest.h>

using namespace freecum;

namespace {

void expect_all_zero(const VerificationReport& r)
{
    for (const auto& e : r.entries)
        if (e.expected != kNonzero)
            EXPECT_EQ(e.value, "0/1") << r.check_name << " " << parameter_line(r) << " " << e.query;
}

bool control_nonzero(const VerificationReport& r)
{
    for (const auto& e : r.entries)
        if (e.expected == kNonzero && e.pass)
            return true;
    return false;
}

}  // namespace

TEST(Patterns, NecklacesOverTwoLetters)
{
    EXPECT_EQ(mixed_patterns(2), (std::vector<SlotPattern>{"UV"}));
    EXPECT_EQ(mixed_patterns(3), (std::vector<SlotPattern>{"UUV", "UVV"}));
    EXPECT_EQ(mixed_patterns(4).size(), 4u);  // UUUV UUVV UVUV UVVV
    EXPECT_EQ(mixed_patterns(4, false).size(), 14u);
    EXPECT_EQ(run_length_patterns(8).size(), 255u);
}

TEST(Lukacs, DefaultGridUpToOrderFour)
{
    auto reports = lukacs_grid(default_lambda_grid(), default_kappa_grid(), 1, 4);
    ASSERT_EQ(reports.size(), 15u);
    for (const auto& r : reports) {
        EXPECT_TRUE(r.pass()) << parameter_line(r);
        expect_all_zero(r);
        EXPECT_TRUE(control_nonzero(r)) << parameter_line(r);
    }
}

TEST(Lukacs, HigherOrdersAtTwoPoints)
{
    LukacsOptions opts;
    opts.jobs = 2;
    for (auto [lambda, kappa] : {std::pair{Rational(2), Rational(1)}, std::pair{Rational(3), Rational(2)}})
        for (int order : {5, 6}) {
            auto r = lukacs_check(lambda, kappa, 1, order, opts);
            EXPECT_TRUE(r.pass()) << parameter_line(r);
            expect_all_zero(r);
        }
}

TEST(Lukacs, NonUnitAlpha)
{
    auto r = lukacs_check(Rational(5, 2), 2, Rational(3, 2), 4);
    EXPECT_TRUE(r.pass());
}

TEST(Lukacs, ParallelRunIsIdentical)
{
    LukacsOptions serial, parallel;
    parallel.jobs = 4;
    auto a = lukacs_check(3, Rational(3, 2), 1, 5, serial);
    auto b = lukacs_check(3, Rational(3, 2), 1, 5, parallel);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Lukacs, RejectsNonInvertibleAndLargeOrders)
{
    try {
        lukacs_check(Rational(1, 2), 1, 1, 3);
        FAIL();
    } catch (const ExactPathUnavailable& e) {
        EXPECT_NE(std::string(e.what()).find("oracle"), std::string::npos);
    }
    EXPECT_THROW(lukacs_check(2, 1, 1, kLukacsOrderCap + 1), std::length_error);
}

TEST(Gamma, ComponentsAndTotal)
{
    auto r = gamma_counterexample(2);
    EXPECT_TRUE(r.pass());
    bool saw_total = false;
    for (const auto& e : r.entries) {
        if (e.query.find("[direct]") != std::string::npos) {
            EXPECT_EQ(e.value, "22/1");
            saw_total = true;
        }
        if (e.query == "R_3(I+Y*Xi, I+Xi*Y, X+Y)")
            EXPECT_EQ(e.value, "16/1");
        if (e.query.rfind("R_2(I+", 0) == 0)
            EXPECT_EQ(e.value, "3/1");
    }
    EXPECT_TRUE(saw_total);
    for (Rational lambda : {Rational(3), Rational(7, 2)})
        EXPECT_TRUE(gamma_counterexample(lambda).pass()) << lambda;
    EXPECT_THROW(gamma_counterexample(1), NonInvertibleError);
}

TEST(InverseRuns, Sweep)
{
    for (Rational lambda : {Rational(2), Rational(3), Rational(7, 2)}) {
        auto r = prop31_sweep(lambda, 8);
        EXPECT_EQ(r.entries.size(), 255u);
        EXPECT_TRUE(r.pass()) << lambda;
    }
    EXPECT_TRUE(prop31_sweep(3, 6, 2).pass());
}

TEST(FirstCumulantDerivation, ThreeValues)
{
    for (Rational r1x : {Rational(2), Rational(3), Rational(3, 2)})
        EXPECT_TRUE(remark32_check(r1x, 10).pass()) << r1x;
    auto r = remark32_check(Rational(3, 2), 2);
    EXPECT_EQ(r.entries[1].value, "8/1");
    EXPECT_EQ(remark32_check(3, 1).entries[0].value, "1/2");
}

TEST(Report, JsonRoundTrip)
{
    auto r = gamma_counterexample(3);
    auto back = report_from_json(to_json(r));
    EXPECT_EQ(to_json(back), to_json(r));
    EXPECT_EQ(back.entries.size(), r.entries.size());
    EXPECT_FALSE(to_json(r).contains("elapsed_ms"));
    EXPECT_TRUE(to_json(r, true).contains("elapsed_ms"));
}
