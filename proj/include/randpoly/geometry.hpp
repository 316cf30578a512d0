#ifndef RANDPOLY_GEOMETRY_HPP
#define RANDPOLY_GEOMETRY_HPP

#include "randpoly/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace randpoly {

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Orthonormal k-frame in R^n; its column span is a point of G_{n,k}.
class Frame {
public:
    Frame() = default;

    /// Takes ownership of an n x k matrix with orthonormal columns.
    explicit Frame(Eigen::MatrixXd columns) : basis_(std::move(columns))
    {
        if (basis_.cols() < 1 || basis_.cols() > basis_.rows())
            throw std::invalid_argument("Frame: need 1 <= k <= n");
        if (gram_residual() > 1e-10)
            throw std::invalid_argument("Frame: columns are not orthonormal");
    }

    static Frame identity(int n) { return Frame(Eigen::MatrixXd::Identity(n, n)); }

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(basis_.rows()); }
    [[nodiscard]] int rank() const noexcept { return static_cast<int>(basis_.cols()); }
    [[nodiscard]] const Eigen::MatrixXd& basis() const noexcept { return basis_; }

    /// Leading j columns (a Haar j-frame when this frame is Haar).
    [[nodiscard]] Frame leading(int j) const { return Frame(basis_.leftCols(j)); }

    /// Maps frame-internal coordinates back to R^n.
    [[nodiscard]] Eigen::VectorXd embed(const Eigen::VectorXd& coords) const
    {
        if (coords.size() != basis_.cols())
            throw DimensionMismatch("Frame::embed: coordinate length != rank");
        return basis_ * coords;
    }

    [[nodiscard]] double gram_residual() const
    {
        const Eigen::MatrixXd g = basis_.transpose() * basis_;
        return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    }

private:
    Eigen::MatrixXd basis_;
};

/// Uniform point of S^{n-1} (normalized standard Gaussian).
inline Eigen::VectorXd sample_sphere(int n, Stream& rng)
{
    if (n < 1)
        throw std::invalid_argument("sample_sphere: n must be >= 1");
    Eigen::VectorXd g(n);
    for (;;) {
        for (int i = 0; i < n; ++i)
            g(i) = rng.normal();
        const double r = g.norm();
        if (r > 0.0)
            return g / r;
    }
}

/// Haar-distributed k-frame: Gram-Schmidt, applied twice, on k Gaussian vectors.
inline Frame sample_frame(int n, int k, Stream& rng)
{
    if (k < 1 || k > n)
        throw std::invalid_argument("sample_frame: need 1 <= k <= n");
    Eigen::MatrixXd q(n, k);
    for (int j = 0; j < k; ++j) {
        for (;;) {
            Eigen::VectorXd v(n);
            for (int i = 0; i < n; ++i)
                v(i) = rng.normal();
            const double len0 = v.norm();
            for (int pass = 0; pass < 2; ++pass)
                for (int p = 0; p < j; ++p)
                    v -= q.col(p).dot(v) * q.col(p);
            const double len = v.norm();
            if (len > 1e-8 * len0) {
                q.col(j) = v / len;
                break;
            }
        }
    }
    return Frame(std::move(q));
}

/// Coordinates of P_F x for each row x of `points` (rows in, rows out).
inline Eigen::MatrixXd project(const Eigen::MatrixXd& points, const Frame& frame)
{
    if (points.cols() != frame.dim())
        throw DimensionMismatch("project: point dimension " + std::to_string(points.cols()) +
                                " != frame dimension " + std::to_string(frame.dim()));
    return points * frame.basis();
}

inline Eigen::VectorXd project(const Eigen::VectorXd& x, const Frame& frame)
{
    if (x.size() != frame.dim())
        throw DimensionMismatch("project: point dimension != frame dimension");
    return frame.basis().transpose() * x;
}

/// log of the volume of the unit Euclidean ball in R^k.
inline double log_unit_ball_volume(int k)
{
    if (k < 0)
        throw std::invalid_argument("unit_ball_volume: k must be >= 0");
    const double h = 0.5 * k;
    return h * std::log(std::numbers::pi) - std::lgamma(h + 1.0);
}

/// omega_k = pi^{k/2} / Gamma(k/2 + 1).
inline double unit_ball_volume(int k) { return std::exp(log_unit_ball_volume(k)); }

} // namespace randpoly

#endif // RANDPOLY_GEOMETRY_HPP
