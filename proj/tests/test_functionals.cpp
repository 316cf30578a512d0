#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "randpoly/functionals.hpp"

using namespace randpoly;

namespace {

constexpr double pi = std::numbers::pi;

VertexPolytope random_body(Family f, int n, int N, std::uint64_t seed)
{
    Stream rng(seed);
    return VertexPolytope(sample(Distribution::make(f, n), static_cast<std::size_t>(N), rng));
}

Frame coordinate_frame(int n, std::initializer_list<int> axes)
{
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(axes.size()));
    int j = 0;
    for (int a : axes)
        b(a, j++) = 1.0;
    return Frame(b);
}

} // namespace

// w = E max(|cos|, |sin|) = 2 sqrt2 / pi and M = E(|cos| + |sin|) = 4 / pi.
TEST(MeanWidth, CrossPolytopePlane)
{
    const auto k = VertexPolytope::cross_polytope(2);
    Stream rng(1);
    const auto w = mean_width(k, 100000, rng);
    EXPECT_NEAR(w.value, 2 * std::sqrt(2.0) / pi, 4 * w.standard_error);
    const auto m = M_value(k, 20000, rng);
    EXPECT_NEAR(m.value, 4 / pi, 4 * m.standard_error);
}

// h of the cube [-1,1]^3 is the l1 norm, and E|theta_1| = 1/2 on S^2.
TEST(MeanWidth, Cube)
{
    Stream rng(2);
    const auto w = mean_width(VertexPolytope::cube(3), 100000, rng);
    EXPECT_NEAR(w.value, 1.5, 4 * w.standard_error);
}

TEST(MeanWidth, PowerMeans)
{
    const auto k = random_body(Family::gaussian, 6, 40, 3);
    Stream a(4), b(4);
    EXPECT_NEAR(p_mean_width(k, 1.0, 5000, a).value, mean_width(k, 5000, b).value, 1e-12);
    Stream c(5);
    const double w1 = p_mean_width(k, 1.0, 5000, c).value;
    Stream d(5);
    EXPECT_GE(p_mean_width(k, 2.0, 5000, d).value, w1);
    EXPECT_THROW(p_mean_width(k, 0.0, 5000, c), std::invalid_argument);
    EXPECT_THROW(p_mean_width(k, -5.0, 5000, c), std::invalid_argument);
    EXPECT_THROW(mean_width(k, 10, c), std::invalid_argument);
}

TEST(Projection, CoordinatePlaneOfCrossPolytope)
{
    const auto k = VertexPolytope::cross_polytope(4);
    EXPECT_NEAR(projected_volume(k, coordinate_frame(4, {0, 2})), 2.0, 1e-12);
    EXPECT_NEAR(projected_volume(k, Frame::identity(4)), 16.0 / 24.0, 1e-12);
    EXPECT_NEAR(proj_volume_radius(k, coordinate_frame(4, {1})), 1.0, 1e-12);
}

TEST(Projection, RandomBodyGolden)
{
    Stream rng(7);
    const VertexPolytope k(sample(Distribution::make(Family::cube, 20), 2000, rng));
    const Frame f = sample_frame(20, 2, rng);
    EXPECT_NEAR(proj_volume_radius(k, f), 3.5234449717791985, 1e-9);
}

TEST(Projection, CapIsEnforced)
{
    EXPECT_THROW(projected_volume(VertexPolytope::cross_polytope(10), Frame::identity(10)), CapExceeded);
}

TEST(Quermass, FullRankIsVolumeRadius)
{
    Stream rng(8);
    const auto q = quermass_Qk(VertexPolytope::cross_polytope(3), 3, 20, rng);
    EXPECT_NEAR(q.value, std::cbrt(1.0 / pi), 1e-12);
    EXPECT_EQ(q.standard_error, 0.0);
}

// |P_theta K| = 2 h(theta), so Q_1 is the mean width.
TEST(Quermass, FirstIsMeanWidth)
{
    const auto k = random_body(Family::gaussian, 8, 64, 9);
    Stream a(10), b(11);
    const auto q1 = quermass_Qk(k, 1, 4000, a);
    const auto w = mean_width(k, 4000, b);
    EXPECT_NEAR(q1.value, w.value, 4 * std::hypot(q1.standard_error, w.standard_error));
}

TEST(Quermass, ProfileSharesFrames)
{
    const auto k = random_body(Family::cube, 6, 48, 12);
    Stream a(13);
    const auto prof = quermass_profile(k, 3, 30, a);
    ASSERT_EQ(prof.size(), 3u);
    Stream b(13);
    const auto q1 = quermass_Qk(k, 1, 30, b);
    // With kmax = 1 the profile and Q_1 consume the stream identically.
    Stream c(13);
    EXPECT_NEAR(quermass_profile(k, 1, 30, c)[0].value, q1.value, 1e-12);
    for (const auto& e : prof)
        EXPECT_GT(e.value, 0.0);
    EXPECT_THROW(quermass_profile(k, 7, 30, a), std::invalid_argument);
    EXPECT_THROW(quermass_Qk(k, 2, 5, a), std::invalid_argument);
}

// For the ball surrogate every Q_k is close to 1 and Q_k is nonincreasing in k.
TEST(Quermass, DecreasingForRandomBody)
{
    const auto k = random_body(Family::gaussian, 6, 200, 14);
    Stream rng(15);
    const auto prof = quermass_profile(k, 4, 60, rng);
    for (std::size_t j = 1; j < prof.size(); ++j)
        EXPECT_LE(prof[j].value, prof[j - 1].value + 3 * std::hypot(prof[j].standard_error, prof[j - 1].standard_error));
}

TEST(Radii, OuterRadius)
{
    const auto k = random_body(Family::l1ball, 5, 30, 16);
    Stream rng(17);
    EXPECT_DOUBLE_EQ(outer_radius_Rk(k, 5, 10, rng).value, radius(k));
    for (double r : projection_radii(k, 2, 50, rng))
        EXPECT_LE(r, radius(k) + 1e-12);
    // R of a 1-dimensional projection is h(theta), so R~_1 = w.
    Stream a(18), b(19);
    const auto r1 = outer_radius_Rk(k, 1, 4000, a);
    const auto w = mean_width(k, 4000, b);
    EXPECT_NEAR(r1.value, w.value, 4 * std::hypot(r1.standard_error, w.standard_error));
}

TEST(Radii, SectionOfCrossPolytope)
{
    const auto k = VertexPolytope::cross_polytope(3);
    Stream rng(20);
    const auto s = section_radius(k, coordinate_frame(3, {0, 1}), 50, rng);
    EXPECT_NEAR(s.estimate.value, 1.0, 1e-9);
    EXPECT_NEAR(s.direction.norm(), 1.0, 1e-12);
    EXPECT_NEAR(s.direction(2), 0.0, 1e-12);
    EXPECT_THROW(section_radius(k, coordinate_frame(3, {0}), 10, rng), std::invalid_argument);
}

TEST(Radii, FullSectionIsOuterRadius)
{
    const auto k = random_body(Family::gaussian, 4, 20, 21);
    Stream rng(22);
    EXPECT_NEAR(inner_mean_Dk(k, 4, 3, 50, rng).value, radius(k), 1e-7 * radius(k));
    for (double r : section_radii(k, 2, 10, 50, rng))
        EXPECT_LE(r, radius(k) * (1 + 1e-9));
}

TEST(Gauge, BOfSimpleBodies)
{
    for (int n = 2; n <= 5; ++n)
        EXPECT_NEAR(b_exact(VertexPolytope::cross_polytope(n)), std::sqrt(n), 1e-12);
    EXPECT_NEAR(b_exact(VertexPolytope::cube(3, 0.5)), 2.0, 1e-12);
    const auto k = random_body(Family::cube, 4, 30, 23);
    Stream rng(24);
    const double lower = b_value(k, 2000, rng);
    EXPECT_LE(lower, b_exact(k) * (1 + 1e-9));
    EXPECT_GT(lower, 0.8 * b_exact(k));
    Stream r2(25);
    EXPECT_LE(M_value(k, 500, r2).value, b_exact(k));
}

// For the Gaussian, Z_q = gamma_q B_2; the cube has h = |.|_1 in [1, sqrt n].
TEST(Inclusion, CubeAgainstGaussianCentroidBody)
{
    const int n = 5;
    const auto body = CentroidBody::closed_form(Distribution::make(Family::gaussian, n), 3.0);
    Stream rng(26);
    const auto c = inclusion_constant(VertexPolytope::cube(n), body, 500, rng);
    const double g = gaussian_abs_moment_root(3.0);
    EXPECT_GE(c.value * g, 1.0);
    EXPECT_LE(c.value * g, std::sqrt(n));
    Stream r2(26);
    EXPECT_GE(moment_ratio(VertexPolytope::cube(n), body, 500, r2).value, c.value);
    EXPECT_THROW(inclusion_constant(VertexPolytope::cube(3), body, 10, rng), DimensionMismatch);
}

TEST(Inclusion, RandomBodyContainsSmallMultiple)
{
    const auto d = Distribution::make(Family::gaussian, 10);
    const auto k = random_body(Family::gaussian, 10, 200, 27);
    Stream rng(28);
    const auto c = inclusion_constant(k, CentroidBody::closed_form(d, std::log(20.0)), 1000, rng);
    EXPECT_GT(c.value, 0.3);
}
