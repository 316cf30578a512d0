#ifndef RANDPOLY_POLYTOPE_HPP
#define RANDPOLY_POLYTOPE_HPP

#include "randpoly/estimate.hpp"
#include "randpoly/geometry.hpp"
#include "randpoly/hull.hpp"
#include "randpoly/lp.hpp"
#include "randpoly/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace randpoly {

class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LowAcceptance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// conv{+-x_1, ..., +-x_N} stored through the generators x_j only (rows of an
/// N x n matrix). The reflected copies are implicit, so h(theta) = h(-theta)
/// holds exactly.
class VertexPolytope {
public:
    VertexPolytope() = default;

    explicit VertexPolytope(Eigen::MatrixXd generators) : gen_(std::move(generators))
    {
        if (gen_.rows() < 1 || gen_.cols() < 1)
            throw std::invalid_argument("VertexPolytope: need N >= 1 generators of dimension >= 1");
        if (!gen_.allFinite())
            throw std::invalid_argument("VertexPolytope: non-finite generator");
    }

    /// The cross-polytope conv{+-e_i} in R^n.
    static VertexPolytope cross_polytope(int n) { return VertexPolytope(Eigen::MatrixXd::Identity(n, n)); }

    /// The cube [-a, a]^n, generated by the 2^{n-1} vertices with first coordinate +a.
    static VertexPolytope cube(int n, double a = 1.0)
    {
        const int count = 1 << (n - 1);
        Eigen::MatrixXd g(count, n);
        for (int m = 0; m < count; ++m) {
            g(m, 0) = a;
            for (int i = 1; i < n; ++i)
                g(m, i) = ((m >> (i - 1)) & 1) ? a : -a;
        }
        return VertexPolytope(std::move(g));
    }

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(gen_.cols()); }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(gen_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& generators() const noexcept { return gen_; }

    /// All 2N signed points; row j < N is +x_j, row N + j is -x_j.
    [[nodiscard]] Eigen::MatrixXd signed_points() const
    {
        Eigen::MatrixXd s(2 * gen_.rows(), gen_.cols());
        s.topRows(gen_.rows()) = gen_;
        s.bottomRows(gen_.rows()) = -gen_;
        return s;
    }

    [[nodiscard]] Eigen::VectorXd signed_point(int signed_index) const
    {
        const int n = size();
        return signed_index < n ? Eigen::VectorXd(gen_.row(signed_index).transpose())
                                : Eigen::VectorXd(-gen_.row(signed_index - n).transpose());
    }

    [[nodiscard]] VertexPolytope scaled(double a) const { return VertexPolytope(gen_ * a); }

    /// Image under x -> M x.
    [[nodiscard]] VertexPolytope transformed(const Eigen::MatrixXd& m) const
    {
        return VertexPolytope(gen_ * m.transpose());
    }

    [[nodiscard]] VertexPolytope with_generator(const Eigen::VectorXd& x) const
    {
        if (x.size() != dim())
            throw DimensionMismatch("with_generator: dimension mismatch");
        Eigen::MatrixXd g(gen_.rows() + 1, gen_.cols());
        g.topRows(gen_.rows()) = gen_;
        g.row(gen_.rows()) = x.transpose();
        return VertexPolytope(std::move(g));
    }

    [[nodiscard]] double max_generator_norm() const { return gen_.rowwise().norm().maxCoeff(); }

private:
    Eigen::MatrixXd gen_;
};

/// h_K(theta) = max_j |<x_j, theta>|.
inline double support(const VertexPolytope& k, const Eigen::VectorXd& theta)
{
    if (theta.size() != k.dim())
        throw DimensionMismatch("support: dimension mismatch");
    return (k.generators() * theta).cwiseAbs().maxCoeff();
}

/// LP-backed radial/gauge queries against one polytope. Holds a reusable
/// constraint matrix scaled so that the largest generator has norm 1; not
/// safe for concurrent use (make one per task).
class GaugeOracle {
public:
    explicit GaugeOracle(const VertexPolytope& k, double tol = 1e-9) : n_(k.dim()), tol_(tol)
    {
        scale_ = k.max_generator_norm();
        if (!(scale_ > 0.0))
            throw std::invalid_argument("GaugeOracle: all generators are zero");
        const int m = k.size();
        lp_.A = Eigen::MatrixXd::Zero(n_ + 1, 2 * m + 1);
        const Eigen::MatrixXd g = k.generators().transpose() / scale_;
        lp_.A.block(0, 0, n_, m) = g;
        lp_.A.block(0, m, n_, m) = -g;
        lp_.A.row(n_).head(2 * m).setOnes();
        lp_.b = Eigen::VectorXd::Zero(n_ + 1);
        lp_.b(n_) = 1.0;
        lp_.c = Eigen::VectorXd::Zero(2 * m + 1);
        lp_.c(2 * m) = 1.0;
        opt_.tol = tol;
    }

    /// Largest s >= 0 with x + s*dir in K (x must lie in K).
    double ray_extent(const Eigen::VectorXd& x, const Eigen::VectorXd& dir)
    {
        if (x.size() != n_ || dir.size() != n_)
            throw DimensionMismatch("ray_extent: dimension mismatch");
        const double len = dir.norm();
        if (len == 0.0)
            return std::numeric_limits<double>::infinity();
        const auto t_col = lp_.A.cols() - 1;
        lp_.A.col(t_col).head(n_) = -dir / len;
        lp_.b.head(n_) = x / scale_;
        const lp::Result r = lp::solve(lp_, opt_);
        if (r.status == lp::Status::Infeasible)
            throw std::domain_error("ray_extent: base point lies outside the polytope");
        if (r.status == lp::Status::Unbounded)
            return std::numeric_limits<double>::infinity();
        return r.value * scale_ / len;
    }

    /// r_K(theta) = max{ r >= 0 : r theta in K } for theta != 0 (scaled by |theta|).
    double radial(const Eigen::VectorXd& theta) { return ray_extent(Eigen::VectorXd::Zero(n_), theta); }

    /// ||y||_K; +infinity when y is outside the span of the generators.
    double gauge(const Eigen::VectorXd& y)
    {
        if (y.size() != n_)
            throw DimensionMismatch("gauge: dimension mismatch");
        const double len = y.norm();
        if (len == 0.0)
            return 0.0;
        const double r = radial(y / len);
        if (r <= tol_ * scale_)
            return std::numeric_limits<double>::infinity();
        return len / r;
    }

    [[nodiscard]] int dim() const noexcept { return n_; }

private:
    int n_;
    double tol_;
    double scale_ = 1.0;
    lp::StandardFormLP lp_;
    lp::Options opt_;
};

inline double gauge(const VertexPolytope& k, const Eigen::VectorXd& y, double tol = 1e-9)
{
    return GaugeOracle(k, tol).gauge(y);
}

inline double radial(const VertexPolytope& k, const Eigen::VectorXd& theta, double tol = 1e-9)
{
    if (std::abs(theta.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("radial: direction must be a unit vector");
    return GaugeOracle(k, tol).radial(theta);
}

inline bool contains(const VertexPolytope& k, const Eigen::VectorXd& y, double tol = 1e-9)
{
    return GaugeOracle(k, tol).gauge(y) <= 1.0 + tol;
}

/// A simplicial facet of K, named by signed generator indices.
struct FacetSimplex {
    struct Vertex {
        int generator = 0;
        int sign = 1;   // +1 or -1
    };
    std::vector<Vertex> vertices;
    Eigen::VectorXd normal;
    double offset = 0.0;

    /// n x n matrix whose columns are the signed vertices y_1, ..., y_n.
    [[nodiscard]] Eigen::MatrixXd vertex_matrix(const VertexPolytope& k) const
    {
        Eigen::MatrixXd t(k.dim(), static_cast<Eigen::Index>(vertices.size()));
        for (std::size_t j = 0; j < vertices.size(); ++j)
            t.col(static_cast<Eigen::Index>(j)) = vertices[j].sign * k.generators().row(vertices[j].generator).transpose();
        return t;
    }

    /// (n-1)-dimensional area via the Gram determinant of the edge vectors.
    [[nodiscard]] double area(const VertexPolytope& k) const
    {
        const Eigen::MatrixXd t = vertex_matrix(k);
        const auto n = t.cols();
        if (n == 1)
            return 1.0;
        Eigen::MatrixXd e(t.rows(), n - 1);
        for (Eigen::Index j = 1; j < n; ++j)
            e.col(j - 1) = t.col(j) - t.col(0);
        double fact = 1.0;
        for (Eigen::Index j = 2; j < n; ++j)
            fact *= static_cast<double>(j);
        const double g = (e.transpose() * e).determinant();
        return std::sqrt(std::max(0.0, g)) / fact;
    }
};

struct FacetList {
    std::vector<FacetSimplex> facets;
    /// True when the input was not in general position; coplanar faces were
    /// triangulated rather than perturbed.
    bool coplanar_input = false;
};

struct FacetOptions {
    int dimension_cap = 8;
};

/// Every facet of K (simplicial, coplanar faces triangulated).
inline FacetList facets(const VertexPolytope& k, const FacetOptions& opt = {})
{
    if (k.dim() > opt.dimension_cap)
        throw CapExceeded("facets: dimension " + std::to_string(k.dim()) + " exceeds cap " +
                          std::to_string(opt.dimension_cap));
    const int n = k.dim();
    const int m = k.size();
    FacetList out;
    if (n == 1) {
        const Eigen::Index j = [&] {
            Eigen::Index idx;
            k.generators().col(0).cwiseAbs().maxCoeff(&idx);
            return idx;
        }();
        const double x = k.generators()(j, 0);
        if (x == 0.0)
            throw DegenerateInput("facets: polytope is the origin");
        const int s = x > 0 ? 1 : -1;
        out.facets.push_back({{{static_cast<int>(j), s}}, Eigen::VectorXd::Constant(1, 1.0), std::abs(x)});
        out.facets.push_back({{{static_cast<int>(j), -s}}, Eigen::VectorXd::Constant(1, -1.0), std::abs(x)});
        return out;
    }
    const HullResult hull = convex_hull(k.signed_points());
    out.coplanar_input = hull.coplanar_encountered;
    out.facets.reserve(hull.facets.size());
    for (const HullFacet& hf : hull.facets) {
        FacetSimplex f;
        for (int v : hf.vertices)
            f.vertices.push_back(v < m ? FacetSimplex::Vertex{v, 1} : FacetSimplex::Vertex{v - m, -1});
        f.normal = hf.normal;
        f.offset = hf.offset;
        out.facets.push_back(std::move(f));
    }
    return out;
}

/// Exact volume: sum over facets of offset * area / n.
inline double volume_exact(const VertexPolytope& k, const FacetOptions& opt = {})
{
    if (k.dim() == 1)
        return 2.0 * k.generators().cwiseAbs().maxCoeff();
    const FacetList fl = facets(k, opt);
    double v = 0.0;
    for (const auto& f : fl.facets)
        v += f.offset * f.area(k);
    return v / k.dim();
}

inline Eigen::VectorXd sample_ball(int n, double radius, Stream& rng)
{
    const Eigen::VectorXd u = sample_sphere(n, rng);
    return u * (radius * std::pow(rng.uniform(), 1.0 / n));
}

/// Rejection estimate of |K| from uniform draws in R(K) B_2^n. A 200-direction
/// radial pilot estimates the acceptance rate E[(r(u)/R)^n] and the call is
/// refused when it is below 1e-6.
inline Estimate volume_mc(const VertexPolytope& k, std::size_t samples, Stream& rng)
{
    if (samples < 1000)
        throw std::invalid_argument("volume_mc: need at least 1000 samples");
    const int n = k.dim();
    const double big_r = k.max_generator_norm();
    GaugeOracle oracle(k);
    double pilot = 0.0;
    for (int i = 0; i < 200; ++i)
        pilot += std::pow(oracle.radial(sample_sphere(n, rng)) / big_r, n);
    pilot /= 200.0;
    if (pilot < 1e-6)
        throw LowAcceptance("volume_mc: expected acceptance " + std::to_string(pilot) + " < 1e-6");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i)
        if (oracle.gauge(sample_ball(n, big_r, rng)) <= 1.0)
            ++hits;
    const double ball = unit_ball_volume(n) * std::pow(big_r, n);
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    return {ball * p, ball * std::sqrt(p * (1.0 - p) / static_cast<double>(samples)), samples, rng.key()};
}

} // namespace randpoly

#endif // RANDPOLY_POLYTOPE_HPP
