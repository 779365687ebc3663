#include "freecum/distributions.hpp"
#include "freecum/matrix_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace freecum;
using namespace freecum::oracle;

namespace {

EnsembleSpec standard_spec()
{
    EnsembleSpec s;
    s.dim = 200;
    s.lambda = 2.0;
    s.kappa = 1.0;
    s.alpha = 1.0;
    s.samples = 50;
    s.seed = 12345;
    return s;
}

}  // namespace

TEST(Oracle, Reproducible)
{
    EnsembleSpec s = standard_spec();
    s.dim = 20;
    auto [x1, y1] = sample_pair(s, 3);
    auto [x2, y2] = sample_pair(s, 3);
    EXPECT_TRUE(x1 == x2);
    EXPECT_TRUE(y1 == y2);
    auto [x3, y3] = sample_pair(s, 4);
    EXPECT_FALSE(x1 == x3);
    EXPECT_EQ(x1.cols(), 20);
    EXPECT_TRUE(x1.isApprox(x1.adjoint()));
}

TEST(Oracle, RejectsInvalidSpecs)
{
    EnsembleSpec s = standard_spec();
    s.dim = 1;
    EXPECT_THROW(s.validate(), std::domain_error);
    s = standard_spec();
    s.samples = 0;
    EXPECT_THROW(s.validate(), std::domain_error);
    s = standard_spec();
    s.lambda = 0.5;
    EXPECT_THROW(empirical_mixed_cumulant(s, "UV", false), std::domain_error);
    EXPECT_THROW(empirical_mixed_cumulant(standard_spec(), "UVUVU", true), std::domain_error);
}

TEST(Oracle, MomentsWithinTolerance)
{
    EnsembleSpec s = standard_spec();
    auto est = empirical_moments(s, 4);
    FreePoissonParams p(2, 1);
    EXPECT_NEAR(est[0].mean, 2.0, 0.05);
    EXPECT_NEAR(est[1].mean, 6.0, 0.15);
    for (int m = 1; m <= 4; ++m)
        EXPECT_NE(soft_bound_status(est[static_cast<std::size_t>(m - 1)].mean, fp_moment(m, p).get_d(), s),
                  BoundStatus::exceeded)
            << m;
}

TEST(Oracle, MinimumEigenvalueNearEdge)
{
    auto e = empirical_min_eigenvalue(standard_spec());
    EXPECT_NEAR(e.mean, support(FreePoissonParams(2, 1)).lower(), 0.1);
}

TEST(Oracle, OrderTwoMixedCumulantBothRoutes)
{
    EnsembleSpec s = standard_spec();
    auto sq = empirical_mixed_cumulant(s, "UV", true);
    auto w = empirical_mixed_cumulant(s, "UV", false);
    EXPECT_LE(std::abs(sq.estimate), 3 * sq.stderr_);
    EXPECT_LT(std::abs(sq.estimate), 0.05);
    EXPECT_LE(std::abs(w.estimate), 3 * w.stderr_);
    EXPECT_LE(std::abs(sq.estimate - w.estimate), 3 * std::hypot(sq.stderr_, w.stderr_));
}

TEST(Oracle, ContinuationRegime)
{
    EnsembleSpec s = standard_spec();
    s.lambda = 0.5;
    auto e = empirical_mixed_cumulant(s, "UV", true);
    EXPECT_LE(std::abs(e.estimate), 3 * e.stderr_);
}

TEST(Oracle, ShrinksWithDimension)
{
    EnsembleSpec small = standard_spec(), large = standard_spec();
    small.dim = 100;
    large.dim = 400;
    small.samples = large.samples = 12;
    int shrinking = 0;
    for (const char* pattern : {"UV", "UUV", "UVV", "UVUV"}) {
        double a = std::abs(empirical_mixed_cumulant(small, pattern, false).estimate);
        double b = std::abs(empirical_mixed_cumulant(large, pattern, false).estimate);
        shrinking += b <= a ? 1 : 0;
    }
    EXPECT_GE(shrinking, 3);
}

TEST(Oracle, PairwiseSum)
{
    std::vector<double> xs(1000, 0.1);
    EXPECT_NEAR(pairwise_sum(xs.data(), xs.size()), 100.0, 1e-12);
    auto e = summarize({1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(e.mean, 2.0);
    EXPECT_NEAR(e.stderr_, 1.0 / std::sqrt(3.0), 1e-12);
}
