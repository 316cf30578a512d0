#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "randpoly/measures.hpp"

using namespace randpoly;

namespace {

Eigen::MatrixXd draws(Family f, int n, std::size_t m, std::uint64_t seed)
{
    Stream rng(seed);
    return sample(Distribution::make(f, n), m, rng);
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) { return (x.transpose() * x) / static_cast<double>(x.rows()); }

} // namespace

TEST(Distribution, GaussianVariance)
{
    const auto x = draws(Family::gaussian, 2, 1000000, 1);
    const auto c = covariance(x);
    EXPECT_NEAR(c(0, 0), 1.0, 0.01);
    EXPECT_NEAR(c(1, 1), 1.0, 0.01);
}

TEST(Distribution, CubeSupport)
{
    const auto x = draws(Family::cube, 3, 100000, 2);
    EXPECT_LE(x.cwiseAbs().maxCoeff(), std::sqrt(3.0));
}

TEST(Distribution, WhitenedFamiliesAreIsotropic)
{
    for (Family f : {Family::l1ball, Family::ball}) {
        const auto c = covariance(draws(f, 4, 1000000, 3));
        EXPECT_LE((c - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.02) << family_name(f);
    }
}

TEST(Distribution, ParseAndName)
{
    for (Family f : {Family::gaussian, Family::cube, Family::ball, Family::l1ball})
        EXPECT_EQ(parse_family(family_name(f)), f);
    EXPECT_THROW(parse_family("cauchy"), std::invalid_argument);
}

TEST(Distribution, IsotropicConstants)
{
    EXPECT_NEAR(isotropic_constant(Distribution::make(Family::gaussian, 5)), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(isotropic_constant(Distribution::make(Family::cube, 5)), 1.0 / std::sqrt(12.0), 1e-15);
    // In R^1 every family here is an interval or a Gaussian.
    EXPECT_NEAR(isotropic_constant(Distribution::make(Family::ball, 1)), 1.0 / std::sqrt(12.0), 1e-12);
    EXPECT_NEAR(isotropic_constant(Distribution::make(Family::l1ball, 1)), 1.0 / std::sqrt(12.0), 1e-12);
}

TEST(Distribution, SameSeedSameDraws)
{
    EXPECT_TRUE(draws(Family::l1ball, 3, 100, 9) == draws(Family::l1ball, 3, 100, 9));
}

TEST(CentroidBody, GaussianClosedForm)
{
    const auto d = Distribution::make(Family::gaussian, 3);
    const Eigen::Vector3d th = Eigen::Vector3d(1, 2, 2) / 3.0;
    EXPECT_NEAR(zq_support(CentroidBody::closed_form(d, 2.0), th).value, 1.0, 1e-12);
    EXPECT_NEAR(zq_support(CentroidBody::closed_form(d, 1.0), th).value, 0.79788, 1e-5);
    EXPECT_NEAR(zq_support(CentroidBody::closed_form(d, 4.0), th).value, 1.31607, 1e-5);
    EXPECT_THROW(CentroidBody::closed_form(Distribution::make(Family::cube, 3), 2.0), std::invalid_argument);
}

TEST(CentroidBody, SecondMomentIsTheBall)
{
    SampleCache cache;
    for (Family f : {Family::gaussian, Family::cube, Family::ball, Family::l1ball}) {
        const auto d = Distribution::make(f, 5);
        const auto body = CentroidBody::monte_carlo(d, 2.0, cache.get(d, 200000, 4));
        Stream rng(5);
        for (int i = 0; i < 5; ++i) {
            const auto e = zq_support(body, sample_sphere(5, rng));
            EXPECT_NEAR(e.value, 1.0, std::max(0.01, 4 * e.standard_error)) << family_name(f);
        }
    }
}

TEST(CentroidBody, MonteCarloMatchesGaussianClosedForm)
{
    SampleCache cache;
    const auto d = Distribution::make(Family::gaussian, 4);
    const Eigen::VectorXd th = Eigen::VectorXd::Unit(4, 2);
    for (double q : {1.0, 3.0, 6.0}) {
        const auto mc = zq_support(CentroidBody::monte_carlo(d, q, cache.get(d, 400000, 6)), th);
        EXPECT_NEAR(mc.value, gaussian_abs_moment_root(q), 4 * mc.standard_error + 1e-3) << q;
    }
}

// l1 marginals have Z_q growing linearly in q; the fitted ratio at q = 16 is about 0.18.
TEST(CentroidBody, L1BallLinearGrowth)
{
    SampleCache cache;
    const auto d = Distribution::make(Family::l1ball, 8);
    const auto body = CentroidBody::monte_carlo(d, 16.0, cache.get(d, 200000, 5));
    const auto e = zq_support(body, Eigen::VectorXd::Unit(8, 0));
    const double c = e.value / 16.0;
    EXPECT_GT(c, 0.1);
    EXPECT_LE(c, 0.25);
    const auto e2 = zq_support(body.with_order(2.0), Eigen::VectorXd::Unit(8, 0));
    EXPECT_LT(e2.value, e.value);
}

TEST(CentroidBody, RefusesOrdersBeyondTheSample)
{
    SampleCache cache;
    const auto d = Distribution::make(Family::cube, 2);
    const auto body = CentroidBody::monte_carlo(d, 30.0, cache.get(d, 1000, 1));
    EXPECT_THROW(zq_support(body, Eigen::Vector2d(1, 0)), NotEnoughSamples);
}

TEST(CentroidBody, BatchAgreesWithSingle)
{
    SampleCache cache;
    const auto d = Distribution::make(Family::cube, 3);
    const auto body = CentroidBody::monte_carlo(d, 3.0, cache.get(d, 50000, 2));
    Stream rng(8);
    Eigen::MatrixXd th(3, 4);
    for (int j = 0; j < 4; ++j)
        th.col(j) = sample_sphere(3, rng);
    const auto batch = zq_support_batch(body, th);
    for (int j = 0; j < 4; ++j)
        EXPECT_NEAR(batch[static_cast<std::size_t>(j)].value, zq_support(body, th.col(j)).value, 1e-12);
}

TEST(SampleCache, SharesDraws)
{
    SampleCache cache;
    const auto d = Distribution::make(Family::cube, 3);
    EXPECT_EQ(cache.get(d, 100, 1).get(), cache.get(d, 100, 1).get());
    EXPECT_NE(cache.get(d, 100, 1).get(), cache.get(d, 100, 2).get());
}

// E exp(g^2/t^2) = (1 - 2/t^2)^{-1/2} = 2 gives t^2 = 8/3. The summand has
// infinite variance at the root, so the tolerance is loose.
TEST(PsiNorm, GaussianPsi2)
{
    Stream rng(10);
    std::vector<double> g(1000000);
    for (auto& v : g)
        v = rng.normal();
    EXPECT_NEAR(psi_alpha_norm(g, 2).value, std::sqrt(8.0 / 3.0), 0.03);
}

TEST(PsiNorm, Psi1FiniteForEveryFamily)
{
    for (Family f : {Family::gaussian, Family::cube, Family::ball, Family::l1ball}) {
        const auto x = draws(f, 3, 100000, 11);
        const auto e = psi_alpha_norm(x, Eigen::Vector3d(1, 0, 0), 1);
        EXPECT_TRUE(std::isfinite(e.value));
        EXPECT_GT(e.value, 0.0);
    }
}

TEST(PsiNorm, Homogeneous)
{
    Stream rng(12);
    std::vector<double> y(20000), y2(20000);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = rng.normal();
        y2[i] = 2 * y[i];
    }
    EXPECT_NEAR(psi_alpha_norm(y2, 1).value, 2 * psi_alpha_norm(y, 1).value, 1e-6);
}

TEST(PsiNorm, RejectsSmallSamples)
{
    std::vector<double> y(100, 1.0);
    EXPECT_THROW(psi_alpha_norm(y, 2), std::invalid_argument);
}

TEST(IqMoment, SecondMomentIsRootN)
{
    for (Family f : {Family::gaussian, Family::cube, Family::ball, Family::l1ball}) {
        const auto e = iq_moment(draws(f, 16, 100000, 13), 2.0);
        EXPECT_NEAR(e.value, 4.0, 0.04) << family_name(f);
    }
    EXPECT_NEAR(iq_moment(draws(Family::gaussian, 1, 100000, 14), 2.0).value, 1.0, 0.01);
}

// For the Gaussian, E|x|^{-2} = 1/(n-2), so I_{-2} = sqrt(n-2).
TEST(IqMoment, NegativeOrderGaussian)
{
    const auto e = iq_moment(draws(Family::gaussian, 16, 1000000, 15), -2.0);
    EXPECT_NEAR(e.value, std::sqrt(14.0), 0.01 * std::sqrt(14.0));
    EXPECT_THROW(iq_moment(draws(Family::gaussian, 3, 20000, 1), -3.0), std::invalid_argument);
    EXPECT_THROW(iq_moment(draws(Family::gaussian, 3, 20000, 1), 0.0), std::invalid_argument);
}

TEST(Tails, GaussianTwoSigma)
{
    const auto x = draws(Family::gaussian, 1, 1000000, 16);
    TailSpec spec{{2.0}, {}, 1.0, 1.0};
    const auto rows = tail_probabilities(x, spec);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0].probability, std::erfc(2.0 / std::sqrt(2.0)), 0.002);
    EXPECT_NEAR(rows[0].probability, 0.0455, 0.002);
}

TEST(Tails, ZeroThresholdIsCertain)
{
    const auto x = draws(Family::cube, 4, 100000, 17);
    const auto rows = tail_probabilities(x, TailSpec{{0.0}, {}, 1.0, 1.0});
    EXPECT_EQ(rows[0].probability, 1.0);
}

TEST(Tails, CubeSmallBall)
{
    const auto x = draws(Family::cube, 25, 100000, 18);
    const auto rows = tail_probabilities(x, TailSpec{{}, {0.1}, 1.0, 1.0});
    EXPECT_LE(rows[0].probability, 1e-4);
    EXPECT_GE(rows[0].ci.hi, rows[0].probability);
    EXPECT_LT(rows[0].ci.hi, 1e-3);
}

TEST(Tails, FittedConstantsBoundTheSample)
{
    const auto x = draws(Family::gaussian, 16, 200000, 19);
    const std::vector<double> t{1.0, 1.5, 2.0};
    const std::vector<double> eps{0.1, 0.3, 0.5};
    TailSpec spec{t, eps, fit_deviation_constant(x, t), fit_small_ball_constant(x, eps)};
    EXPECT_GT(spec.c3, 0.0);
    EXPECT_GT(spec.c4, 0.0);
    for (const auto& r : tail_probabilities(x, spec))
        EXPECT_LE(r.ci.hi, r.envelope * (1 + 1e-9));
    const double lat = fit_latala_constant(x, std::vector<double>{0.05, 0.2, 0.5, 1.0});
    EXPECT_GT(lat, 0.0);
    EXPECT_LE(lat, 10.0);
}

TEST(Tails, RejectsSmallSamples)
{
    EXPECT_THROW(tail_probabilities(draws(Family::gaussian, 2, 1000, 1), TailSpec{{1.0}, {}, 1.0, 1.0}),
                 std::invalid_argument);
}
