#ifndef RANDPOLY_FUNCTIONALS_HPP
#define RANDPOLY_FUNCTIONALS_HPP

// Monte Carlo estimators of the geometric functionals of a vertex polytope:
// mean widths, quermassintegrals via Kubota, projection and section radii,
// M(K) and b(K).

#include "randpoly/estimate.hpp"
#include "randpoly/geometry.hpp"
#include "randpoly/hull.hpp"
#include "randpoly/measures.hpp"
#include "randpoly/polytope.hpp"
#include "randpoly/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace randpoly {

struct FunctionalReport {
    std::string functional;
    int k = 0;
    double p = 0.0;
    double q = 0.0;
    Estimate estimate;
    std::size_t sphere_draws = 0;
    std::size_t subspace_draws = 0;
    std::size_t per_subspace = 0;
};

/// Largest projection rank for which the exact hull is used.
inline constexpr int exact_hull_cap = 8;

/// h_K at `draws` uniform directions.
inline std::vector<double> support_samples(const VertexPolytope& k, std::size_t draws, Stream& rng)
{
    std::vector<double> h(draws);
    for (auto& v : h)
        v = support(k, sample_sphere(k.dim(), rng));
    return h;
}

/// w(K) = integral of h_K over the sphere (no factor 2).
inline Estimate mean_width(const VertexPolytope& k, std::size_t sphere_draws, Stream& rng)
{
    if (sphere_draws < 100)
        throw std::invalid_argument("mean_width: need at least 100 sphere draws");
    const std::uint64_t key = rng.key();
    return mean_estimate(support_samples(k, sphere_draws, rng), key);
}

/// w_p(K) = (integral of h_K^p)^{1/p}.
inline Estimate p_mean_width(const VertexPolytope& k, double p, std::size_t sphere_draws, Stream& rng)
{
    if (p == 0.0 || !(p > -(k.dim() - 1.0)))
        throw std::invalid_argument("p_mean_width: need p != 0 and p > -(n-1)");
    if (sphere_draws < 100)
        throw std::invalid_argument("p_mean_width: need at least 100 sphere draws");
    const std::uint64_t key = rng.key();
    std::vector<double> h = support_samples(k, sphere_draws, rng);
    for (auto& v : h)
        v = std::pow(v, p);
    return power_mean_estimate(h, p, key);
}

/// |P_F K| for the projection onto the span of `frame`.
inline double projected_volume(const VertexPolytope& k, const Frame& frame)
{
    if (frame.rank() > exact_hull_cap)
        throw CapExceeded("projected_volume: rank " + std::to_string(frame.rank()) + " exceeds the exact-hull cap of " +
                          std::to_string(exact_hull_cap));
    return symmetric_hull_volume(project(k.generators(), frame));
}

/// v.rad(P_F K) = (|P_F K| / omega_k)^{1/k}.
inline double proj_volume_radius(const VertexPolytope& k, const Frame& frame)
{
    const int r = frame.rank();
    return std::exp((std::log(projected_volume(k, frame)) - log_unit_ball_volume(r)) / r);
}

/// Q_1 .. Q_kmax from common frames: each draw takes one Haar n x kmax frame
/// and uses its leading k columns for Q_k.
inline std::vector<Estimate> quermass_profile(const VertexPolytope& k, int kmax, std::size_t subspace_draws, Stream& rng)
{
    if (kmax < 1 || kmax > k.dim())
        throw std::invalid_argument("quermass_profile: need 1 <= k <= n");
    if (kmax > exact_hull_cap)
        throw CapExceeded("quermass_profile: k beyond the exact-hull cap");
    if (subspace_draws < 20)
        throw std::invalid_argument("quermass_profile: need at least 20 subspace draws");
    const std::uint64_t key = rng.key();
    std::vector<std::vector<double>> vols(static_cast<std::size_t>(kmax), std::vector<double>(subspace_draws));
    for (std::size_t d = 0; d < subspace_draws; ++d) {
        const Frame f = sample_frame(k.dim(), kmax, rng);
        const Eigen::MatrixXd y = project(k.generators(), f);
        for (int j = 1; j <= kmax; ++j)
            vols[static_cast<std::size_t>(j - 1)][d] = symmetric_hull_volume(y.leftCols(j)) / unit_ball_volume(j);
    }
    std::vector<Estimate> out;
    for (int j = 1; j <= kmax; ++j) {
        Estimate e = power_mean_estimate(vols[static_cast<std::size_t>(j - 1)], j, key);
        out.push_back(e);
    }
    return out;
}

/// Q_k(K) = ((1/omega_k) E|P_F K|)^{1/k} over Haar F in G_{n,k}.
inline Estimate quermass_Qk(const VertexPolytope& k, int rank, std::size_t subspace_draws, Stream& rng)
{
    if (rank < 1 || rank > k.dim())
        throw std::invalid_argument("quermass_Qk: need 1 <= k <= n");
    if (rank > exact_hull_cap)
        throw CapExceeded("quermass_Qk: k beyond the exact-hull cap");
    if (subspace_draws < 20)
        throw std::invalid_argument("quermass_Qk: need at least 20 subspace draws");
    const std::uint64_t key = rng.key();
    if (rank == k.dim()) {
        // A single frame suffices: every F equals R^n.
        const double v = projected_volume(k, Frame::identity(k.dim())) / unit_ball_volume(rank);
        return {std::pow(v, 1.0 / rank), 0.0, 1, key};
    }
    std::vector<double> vols(subspace_draws);
    for (auto& v : vols)
        v = projected_volume(k, sample_frame(k.dim(), rank, rng)) / unit_ball_volume(rank);
    return power_mean_estimate(vols, rank, key);
}

/// R(K) = max_j |x_j|.
inline double radius(const VertexPolytope& k) { return k.max_generator_norm(); }

/// R(P_F K) for `subspace_draws` Haar frames.
inline std::vector<double> projection_radii(const VertexPolytope& k, int rank, std::size_t subspace_draws, Stream& rng)
{
    if (rank < 1 || rank > k.dim())
        throw std::invalid_argument("projection_radii: need 1 <= k <= n");
    std::vector<double> r(subspace_draws);
    for (auto& v : r)
        v = project(k.generators(), sample_frame(k.dim(), rank, rng)).rowwise().norm().maxCoeff();
    return r;
}

/// R~_k(K): mean outer radius of k-dimensional projections.
inline Estimate outer_radius_Rk(const VertexPolytope& k, int rank, std::size_t subspace_draws, Stream& rng)
{
    if (subspace_draws < 1)
        throw std::invalid_argument("outer_radius_Rk: need at least one subspace draw");
    const std::uint64_t key = rng.key();
    if (rank == k.dim())
        return {radius(k), 0.0, 1, key};
    return mean_estimate(projection_radii(k, rank, subspace_draws, rng), key);
}

struct SectionRadius {
    Estimate estimate;          // lower bound on R(K cap F)
    Eigen::VectorXd direction;  // unit vector in R^n attaining it
};

/// Lower bound on R(K cap F): the largest radial value over random unit
/// directions of F plus the directions of the longest projected generators.
inline SectionRadius section_radius(const VertexPolytope& k, const Frame& frame, std::size_t directions, Stream& rng,
                                    GaugeOracle* oracle = nullptr)
{
    if (directions < 50)
        throw std::invalid_argument("section_radius: need at least 50 directions");
    if (frame.dim() != k.dim())
        throw DimensionMismatch("section_radius: frame dimension mismatch");
    std::optional<GaugeOracle> own;
    if (!oracle)
        oracle = &own.emplace(k);
    SectionRadius best{{-1.0, 0.0, directions, rng.key()}, {}};
    auto consider = [&](const Eigen::VectorXd& u) {
        const double r = oracle->radial(u);
        if (r > best.estimate.value) {
            best.estimate.value = r;
            best.direction = u;
        }
    };
    for (std::size_t i = 0; i < directions; ++i)
        consider(frame.embed(sample_sphere(frame.rank(), rng)));

    const Eigen::MatrixXd y = project(k.generators(), frame);
    const Eigen::VectorXd len = y.rowwise().norm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(y.rows()));
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<Eigen::Index>(i);
    const std::size_t seeds = std::min(order.size(), std::max<std::size_t>(1, directions / 5));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(seeds), order.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return len(a) > len(b) || (len(a) == len(b) && a < b); });
    for (std::size_t i = 0; i < seeds; ++i) {
        const Eigen::Index j = order[i];
        if (len(j) > 0.0)
            consider(frame.embed(y.row(j).transpose() / len(j)));
    }
    return best;
}

/// D~_k(K): mean over Haar F of the section radius estimate.
inline Estimate inner_mean_Dk(const VertexPolytope& k, int rank, std::size_t subspace_draws, std::size_t directions,
                              Stream& rng)
{
    if (rank < 1 || rank > k.dim())
        throw std::invalid_argument("inner_mean_Dk: need 1 <= k <= n");
    if (subspace_draws < 1)
        throw std::invalid_argument("inner_mean_Dk: need at least one subspace draw");
    const std::uint64_t key = rng.key();
    GaugeOracle oracle(k);
    std::vector<double> r(subspace_draws);
    for (auto& v : r)
        v = section_radius(k, sample_frame(k.dim(), rank, rng), directions, rng, &oracle).estimate.value;
    return mean_estimate(r, key);
}

/// Section radii R(K cap F) for Haar frames (for k-means of section radii).
inline std::vector<double> section_radii(const VertexPolytope& k, int rank, std::size_t subspace_draws,
                                         std::size_t directions, Stream& rng)
{
    GaugeOracle oracle(k);
    std::vector<double> r(subspace_draws);
    for (auto& v : r)
        v = section_radius(k, sample_frame(k.dim(), rank, rng), directions, rng, &oracle).estimate.value;
    return r;
}

/// M(K) = integral of the gauge over the sphere.
inline Estimate M_value(const VertexPolytope& k, std::size_t sphere_draws, Stream& rng)
{
    if (sphere_draws < 1)
        throw std::invalid_argument("M_value: need at least one sphere draw");
    const std::uint64_t key = rng.key();
    GaugeOracle oracle(k);
    std::vector<double> g(sphere_draws);
    for (auto& v : g)
        v = oracle.gauge(sample_sphere(k.dim(), rng));
    return mean_estimate(g, key);
}

/// Largest sampled gauge value on the sphere: a lower bound on b(K).
inline double b_value(const VertexPolytope& k, std::size_t directions, Stream& rng)
{
    GaugeOracle oracle(k);
    double b = 0.0;
    for (std::size_t i = 0; i < directions; ++i)
        b = std::max(b, oracle.gauge(sample_sphere(k.dim(), rng)));
    return b;
}

/// b(K) = 1 / (smallest facet offset), from the facet list.
inline double b_exact(const VertexPolytope& k, const FacetOptions& opt = {})
{
    if (k.dim() == 1)
        return 1.0 / radius(k);
    double h = std::numeric_limits<double>::infinity();
    for (const auto& f : facets(k, opt).facets)
        h = std::min(h, f.offset);
    return 1.0 / h;
}

/// Unit directions as the columns of an n x count matrix.
inline Eigen::MatrixXd sphere_directions(int n, std::size_t count, Stream& rng)
{
    Eigen::MatrixXd th(n, static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i)
        th.col(static_cast<Eigen::Index>(i)) = sample_sphere(n, rng);
    return th;
}

/// min over directions of h_K / h_{Z_q}: the largest c with c Z_q inside K
/// along the sampled directions.
inline Estimate inclusion_constant(const VertexPolytope& k, const CentroidBody& body, std::size_t directions, Stream& rng)
{
    if (body.dist.dim != k.dim())
        throw DimensionMismatch("inclusion_constant: dimension mismatch");
    const std::uint64_t key = rng.key();
    const Eigen::MatrixXd th = sphere_directions(k.dim(), directions, rng);
    const std::vector<Estimate> z = zq_support_batch(body, th);
    const Eigen::MatrixXd h = (k.generators() * th).cwiseAbs().colwise().maxCoeff();
    double c = std::numeric_limits<double>::infinity();
    double se = 0.0;
    for (std::size_t i = 0; i < directions; ++i) {
        const double r = h(0, static_cast<Eigen::Index>(i)) / z[i].value;
        if (r < c) {
            c = r;
            se = r * z[i].standard_error / z[i].value;
        }
    }
    return {c, se, directions, key};
}

/// (integral of (h_K / h_{Z_q})^q dsigma)^{1/q} over sampled directions.
inline Estimate moment_ratio(const VertexPolytope& k, const CentroidBody& body, std::size_t directions, Stream& rng)
{
    if (body.dist.dim != k.dim())
        throw DimensionMismatch("moment_ratio: dimension mismatch");
    const std::uint64_t key = rng.key();
    const Eigen::MatrixXd th = sphere_directions(k.dim(), directions, rng);
    const std::vector<Estimate> z = zq_support_batch(body, th);
    const Eigen::MatrixXd h = (k.generators() * th).cwiseAbs().colwise().maxCoeff();
    std::vector<double> r(directions);
    for (std::size_t i = 0; i < directions; ++i)
        r[i] = h(0, static_cast<Eigen::Index>(i)) / z[i].value;
    return lq_norm_estimate(r, body.q, key);
}

} // namespace randpoly

#endif // RANDPOLY_FUNCTIONALS_HPP
