#include <gtest/gtest.h>

#include "randpoly/lp.hpp"

using randpoly::lp::Options;
using randpoly::lp::solve;
using randpoly::lp::StandardFormLP;
using randpoly::lp::Status;

namespace {

StandardFormLP make(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c) { return {std::move(a), std::move(b), std::move(c)}; }

} // namespace

// t e1 written as a convex combination of the cross-polytope vertices.
TEST(Lp, CrossPolytopeReachesVertex)
{
    Eigen::MatrixXd a(3, 5);
    a << 1, -1, 0, 0, -1,
         0, 0, 1, -1, 0,
         1, 1, 1, 1, 0;
    Eigen::VectorXd b(3);
    b << 0, 0, 1;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(5);
    c(4) = 1;
    const auto r = solve(make(a, b, c));
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
    EXPECT_NEAR(r.solution(0), 1.0, 1e-12);
}

TEST(Lp, PinnedVariable)
{
    const auto r = solve(make(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)));
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_DOUBLE_EQ(r.value, 0.0);
}

TEST(Lp, Unbounded)
{
    Eigen::MatrixXd a(1, 2);
    a << 0, 1;
    Eigen::VectorXd c(2);
    c << 1, 0;
    EXPECT_EQ(solve(make(a, Eigen::VectorXd::Ones(1), c)).status, Status::Unbounded);
}

TEST(Lp, InfeasibleHasPositiveCertificate)
{
    Eigen::MatrixXd a(1, 2);
    a << 1, 1;
    const auto r = solve(make(a, -Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(2)));
    EXPECT_EQ(r.status, Status::Infeasible);
    EXPECT_GT(r.phase_one_objective, 1e-9);
}

// Beale's example cycles under textbook Dantzig pivoting.
TEST(Lp, BealeCyclingExample)
{
    Eigen::MatrixXd a(3, 7);
    a << 0.25, -8, -1, 9, 1, 0, 0,
         0.5, -12, -0.5, 3, 0, 1, 0,
         0, 0, 1, 0, 0, 0, 1;
    Eigen::VectorXd b(3);
    b << 0, 0, 1;
    Eigen::VectorXd c(7);
    c << 0.75, -20, 0.5, -6, 0, 0, 0;
    Options opt;
    opt.bland_after = 1000000;   // plain Dantzig as long as the cap allows
    const auto r = solve(make(a, b, c), opt);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.value, 1.25, 1e-10);
}

TEST(Lp, RedundantEqualityRows)
{
    Eigen::MatrixXd a(2, 2);
    a << 1, 1,
         2, 2;
    Eigen::VectorXd b(2);
    b << 1, 2;
    Eigen::VectorXd c(2);
    c << 1, 2;
    const auto r = solve(make(a, b, c));
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.value, 2.0, 1e-12);
}

TEST(Lp, DeterministicOutput)
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(4, 9).cwiseAbs();
    Eigen::VectorXd b = Eigen::VectorXd::Ones(4);
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(9, -1, 1);
    const auto r1 = solve(make(a, b, c));
    const auto r2 = solve(make(a, b, c));
    ASSERT_EQ(r1.status, r2.status);
    EXPECT_EQ(r1.value, r2.value);
    EXPECT_EQ(r1.pivots, r2.pivots);
    EXPECT_TRUE(r1.solution == r2.solution);
}

TEST(Lp, RejectsMalformedInput)
{
    EXPECT_THROW(solve(make(Eigen::MatrixXd::Ones(2, 2), Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(2))),
                 std::invalid_argument);
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(1, 1);
    a(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(solve(make(a, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1))), std::invalid_argument);
    Options bad;
    bad.tol = 0;
    EXPECT_THROW(solve(make(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)), bad),
                 std::invalid_argument);
}

// Random bounded problems: max c.x over the probability simplex is max_i c_i.
TEST(Lp, SimplexOverProbabilityVectors)
{
    std::srand(3);
    for (int rep = 0; rep < 50; ++rep) {
        const int d = 2 + rep % 10;
        Eigen::VectorXd c = Eigen::VectorXd::Random(d);
        const auto r = solve(make(Eigen::MatrixXd::Ones(1, d), Eigen::VectorXd::Ones(1), c));
        ASSERT_EQ(r.status, Status::Optimal);
        EXPECT_NEAR(r.value, c.maxCoeff(), 1e-12);
    }
}
