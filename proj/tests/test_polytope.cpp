#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "randpoly/measures.hpp"
#include "randpoly/polytope.hpp"

using namespace randpoly;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

VertexPolytope random_body(Family f, int n, int N, std::uint64_t seed)
{
    Stream rng(seed);
    return VertexPolytope(sample(Distribution::make(f, n), static_cast<std::size_t>(N), rng));
}

} // namespace

TEST(VertexPolytope, RejectsBadInput)
{
    EXPECT_THROW(VertexPolytope(Eigen::MatrixXd(0, 3)), std::invalid_argument);
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2);
    g(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(VertexPolytope{g}, std::invalid_argument);
}

TEST(VertexPolytope, SignedPoints)
{
    const auto k = VertexPolytope::cross_polytope(3);
    EXPECT_EQ(k.signed_points().rows(), 6);
    EXPECT_TRUE(k.signed_point(4).isApprox(-Eigen::Vector3d::UnitY()));
    EXPECT_EQ(VertexPolytope::cube(4).size(), 8);
}

TEST(Support, CrossPolytopeIsMaxAbs)
{
    const auto k = VertexPolytope::cross_polytope(4);
    const Eigen::Vector4d th(0.1, -0.7, 0.5, 0.5);
    EXPECT_DOUBLE_EQ(support(k, th), 0.7);
    EXPECT_DOUBLE_EQ(support(k, -th), support(k, th));
    EXPECT_THROW(support(k, Eigen::Vector3d(1, 0, 0)), DimensionMismatch);
}

TEST(Support, LinearImage)
{
    const auto k = random_body(Family::gaussian, 3, 20, 1);
    Eigen::Matrix3d m;
    m << 2, 1, 0, 0, 1, 0, 1, 0, 3;
    const Eigen::Vector3d th = Eigen::Vector3d(1, -2, 0.5).normalized();
    EXPECT_NEAR(support(k.transformed(m), th), support(k, m.transpose() * th), 1e-12);
}

TEST(Gauge, CrossPolytopeIsL1)
{
    const auto k = VertexPolytope::cross_polytope(3);
    const Eigen::Vector3d y(0.3, -0.2, 0.6);
    EXPECT_NEAR(gauge(k, y), 1.1, 1e-9);
    EXPECT_NEAR(radial(k, y.normalized()), y.norm() / 1.1, 1e-9);
    EXPECT_TRUE(contains(k, y / 1.2));
    EXPECT_FALSE(contains(k, y));
    EXPECT_EQ(gauge(k, Eigen::Vector3d::Zero()), 0.0);
}

TEST(Gauge, CubeIsScaledMax)
{
    const auto k = VertexPolytope::cube(3, 0.5);
    const Eigen::Vector3d y(0.2, -0.9, 0.4);
    EXPECT_NEAR(gauge(k, y), 1.8, 1e-9);
}

TEST(Gauge, OutsideTheSpanIsInfinite)
{
    Eigen::MatrixXd g(2, 3);
    g << 1, 0, 0, 0, 1, 0;
    EXPECT_TRUE(std::isinf(gauge(VertexPolytope(g), Eigen::Vector3d(0, 0, 1))));
}

TEST(Gauge, RadialRequiresUnitDirection)
{
    EXPECT_THROW(radial(VertexPolytope::cross_polytope(2), Eigen::Vector2d(1, 1)), std::invalid_argument);
}

TEST(Gauge, Homogeneity)
{
    const auto k = random_body(Family::cube, 5, 30, 2);
    Stream rng(3);
    GaugeOracle oracle(k);
    for (int i = 0; i < 10; ++i) {
        const Eigen::VectorXd y = sample_sphere(5, rng) * 2.0;
        EXPECT_NEAR(oracle.gauge(3.0 * y), 3.0 * oracle.gauge(y), 1e-9);
        EXPECT_NEAR(oracle.gauge(-y), oracle.gauge(y), 1e-9);
        // Support and gauge are dual: <y, x> <= h(x) ||y|| for any x.
        const Eigen::VectorXd x = sample_sphere(5, rng);
        EXPECT_LE(x.dot(y), support(k, x) * oracle.gauge(y) + 1e-9);
    }
}

TEST(Facets, CrossPolytope)
{
    for (int n = 2; n <= 5; ++n) {
        const auto fl = facets(VertexPolytope::cross_polytope(n));
        EXPECT_EQ(fl.facets.size(), static_cast<std::size_t>(1 << n)) << n;
        for (const auto& f : fl.facets) {
            EXPECT_NEAR(f.offset, 1.0 / std::sqrt(n), 1e-12);
            EXPECT_EQ(f.vertices.size(), static_cast<std::size_t>(n));
        }
    }
}

TEST(Facets, CubeIsTriangulated)
{
    const auto fl = facets(VertexPolytope::cube(3));
    EXPECT_TRUE(fl.coplanar_input);
    EXPECT_EQ(fl.facets.size(), 12u);
    double area = 0.0;
    for (const auto& f : fl.facets)
        area += f.area(VertexPolytope::cube(3));
    EXPECT_NEAR(area, 24.0, 1e-9);
}

TEST(Facets, NormalsSupportTheBody)
{
    const auto k = random_body(Family::gaussian, 4, 25, 4);
    for (const auto& f : facets(k).facets) {
        EXPECT_NEAR(f.normal.norm(), 1.0, 1e-12);
        EXPECT_NEAR(support(k, f.normal), f.offset, 1e-9);
        EXPECT_TRUE(((f.vertex_matrix(k).transpose() * f.normal).array() - f.offset).abs().maxCoeff() < 1e-9);
    }
}

TEST(Facets, OneDimensional)
{
    Eigen::MatrixXd g(3, 1);
    g << 0.5, -2.0, 1.0;
    const VertexPolytope k(g);
    const auto fl = facets(k);
    ASSERT_EQ(fl.facets.size(), 2u);
    EXPECT_DOUBLE_EQ(fl.facets[0].offset, 2.0);
    EXPECT_DOUBLE_EQ(volume_exact(k), 4.0);
}

TEST(Facets, Caps)
{
    FacetOptions opt;
    opt.dimension_cap = 3;
    EXPECT_THROW(facets(VertexPolytope::cross_polytope(4), opt), CapExceeded);
}

TEST(Facets, FlatInputIsDegenerate)
{
    Eigen::MatrixXd g(3, 3);
    g << 1, 0, 0, 0, 1, 0, 1, 1, 0;
    EXPECT_THROW(facets(VertexPolytope(g)), DegenerateInput);
}

TEST(Volume, ClosedForms)
{
    for (int n = 2; n <= 6; ++n) {
        EXPECT_NEAR(volume_exact(VertexPolytope::cross_polytope(n)), std::pow(2.0, n) / factorial(n), 1e-10) << n;
        EXPECT_NEAR(volume_exact(VertexPolytope::cube(n, 0.5)), 1.0, 1e-10) << n;
    }
}

TEST(Volume, LinearImageScalesByDeterminant)
{
    const auto k = random_body(Family::l1ball, 4, 16, 5);
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(0, 1) = 0.7;
    m(2, 2) = 3.0;
    m(3, 0) = -1.0;
    EXPECT_NEAR(volume_exact(k.transformed(m)), std::abs(m.determinant()) * volume_exact(k), 1e-9 * volume_exact(k));
}

TEST(Volume, RedundantGeneratorLeavesVolume)
{
    const auto k = VertexPolytope::cross_polytope(3);
    EXPECT_NEAR(volume_exact(k.with_generator(Eigen::Vector3d(0.2, 0.2, 0.2))), 4.0 / 3.0, 1e-12);
}

TEST(Volume, MonteCarloAgreesWithExact)
{
    const auto k = random_body(Family::gaussian, 3, 12, 6);
    Stream rng(7);
    const Estimate e = volume_mc(k, 100000, rng);
    EXPECT_NEAR(e.value, volume_exact(k), 4 * e.standard_error);
    EXPECT_GT(e.standard_error, 0.0);
}

TEST(Volume, MonteCarloRefusesThinBodies)
{
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(6, 6) * 1e-3;
    g(0, 0) = 1.0;
    Stream rng(8);
    EXPECT_THROW(volume_mc(VertexPolytope(g), 10000, rng), LowAcceptance);
    EXPECT_THROW(volume_mc(VertexPolytope::cross_polytope(2), 10, rng), std::invalid_argument);
}
