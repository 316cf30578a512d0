#ifndef RANDPOLY_MEASURES_HPP
#define RANDPOLY_MEASURES_HPP

// Isotropic log-concave laws and estimators of their moment functionals:
// L_q-centroid support functions, psi_alpha norms, moments of the Euclidean
// norm and norm tail probabilities.

#include "randpoly/estimate.hpp"
#include "randpoly/geometry.hpp"
#include "randpoly/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace randpoly {

enum class Family { gaussian, cube, ball, l1ball };

inline std::string_view family_name(Family f)
{
    switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::cube: return "cube";
    case Family::ball: return "ball";
    case Family::l1ball: return "l1ball";
    }
    return "unknown";
}

inline Family parse_family(std::string_view s)
{
    if (s == "gaussian") return Family::gaussian;
    if (s == "cube") return Family::cube;
    if (s == "ball") return Family::ball;
    if (s == "l1ball") return Family::l1ball;
    throw std::invalid_argument("unknown distribution '" + std::string(s) +
                                "' (expected gaussian | cube | ball | l1ball)");
}

class NotEnoughSamples : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BracketFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A named isotropic log-concave law on R^n. ball and l1ball carry a
/// whitening matrix estimated once from a fixed-seed pilot sample.
struct Distribution {
    Family family = Family::gaussian;
    int dim = 1;
    std::optional<Eigen::MatrixXd> whitening;
    Eigen::VectorXd shift;   // subtracted before whitening; zero for the symmetric families

    static constexpr std::size_t whitening_pilot = 200000;

    static Distribution make(Family family, int n);
};

namespace detail {

inline void draw_raw(Family family, int n, Stream& rng, double* out)
{
    switch (family) {
    case Family::gaussian:
        for (int i = 0; i < n; ++i)
            out[i] = rng.normal();
        break;
    case Family::cube: {
        const double a = std::sqrt(3.0);
        for (int i = 0; i < n; ++i)
            out[i] = a * (2.0 * rng.uniform() - 1.0);
        break;
    }
    case Family::ball: {
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) {
            out[i] = rng.normal();
            r2 += out[i] * out[i];
        }
        const double s = std::pow(rng.uniform(), 1.0 / n) / std::sqrt(r2);
        for (int i = 0; i < n; ++i)
            out[i] *= s;
        break;
    }
    case Family::l1ball: {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            out[i] = rng.exponential();
            total += out[i];
        }
        total += rng.exponential();
        for (int i = 0; i < n; ++i)
            out[i] = rng.sign() * out[i] / total;
        break;
    }
    }
}

inline Eigen::MatrixXd draw_raw(Family family, int n, std::size_t count, Stream& rng)
{
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(static_cast<Eigen::Index>(count), n);
    for (std::size_t i = 0; i < count; ++i)
        draw_raw(family, n, rng, x.row(static_cast<Eigen::Index>(i)).data());
    return x;
}

} // namespace detail

inline Distribution Distribution::make(Family family, int n)
{
    if (n < 1)
        throw std::invalid_argument("Distribution: dimension must be >= 1");
    Distribution d;
    d.family = family;
    d.dim = n;
    d.shift = Eigen::VectorXd::Zero(n);
    if (family == Family::ball || family == Family::l1ball) {
        Stream rng = Stream(0x5eed).substream("whitening").substream(family_name(family)).substream(static_cast<std::uint64_t>(n));
        const Eigen::MatrixXd x = detail::draw_raw(family, n, whitening_pilot, rng);
        const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(x.rows());
        const Eigen::LLT<Eigen::MatrixXd> llt(cov);
        const Eigen::MatrixXd l = llt.matrixL();
        d.whitening = l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    }
    return d;
}

/// count i.i.d. draws (rows).
inline Eigen::MatrixXd sample(const Distribution& dist, std::size_t count, Stream& rng)
{
    if (count < 1)
        throw std::invalid_argument("sample: count must be >= 1");
    Eigen::MatrixXd x = detail::draw_raw(dist.family, dist.dim, count, rng);
    if (dist.whitening)
        x = (x.rowwise() - dist.shift.transpose()) * dist.whitening->transpose();
    return x;
}

/// L_mu for the four families, from sup f, the volume and the covariance.
inline double isotropic_constant(const Distribution& dist)
{
    const double n = dist.dim;
    switch (dist.family) {
    case Family::gaussian:
        return 1.0 / std::sqrt(2.0 * std::numbers::pi);
    case Family::cube:
        return 1.0 / std::sqrt(12.0);
    case Family::ball:
        return std::exp(-log_unit_ball_volume(dist.dim) / n) / std::sqrt(n + 2.0);
    case Family::l1ball:
        return std::exp((std::lgamma(n + 1.0) - n * std::log(2.0)) / n) * std::sqrt(2.0 / ((n + 1.0) * (n + 2.0)));
    }
    return 0.0;
}

/// gamma_q = (E|g|^q)^{1/q} for a standard Gaussian g.
inline double gaussian_abs_moment_root(double q)
{
    const double log_m = 0.5 * q * std::log(2.0) + std::lgamma(0.5 * (q + 1.0)) - 0.5 * std::log(std::numbers::pi);
    return std::exp(log_m / q);
}

/// Write-once store of samples keyed by (family, n, seed, size), so that
/// functionals of different order see the same draws.
class SampleCache {
public:
    std::shared_ptr<const Eigen::MatrixXd> get(const Distribution& dist, std::size_t size, std::uint64_t seed)
    {
        const auto key = std::make_tuple(static_cast<int>(dist.family), dist.dim, seed, size);
        std::lock_guard lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end())
            return it->second;
        Stream rng = Stream(seed).substream("sample-cache");
        auto ptr = std::make_shared<const Eigen::MatrixXd>(sample(dist, size, rng));
        cache_.emplace(key, ptr);
        return ptr;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, std::uint64_t, std::size_t>, std::shared_ptr<const Eigen::MatrixXd>> cache_;
};

/// Z_q(mu), evaluated either in closed form (Gaussian only) or by Monte
/// Carlo over a shared sample.
struct CentroidBody {
    enum class Mode { closed_form, monte_carlo };

    Distribution dist;
    double q = 2.0;
    Mode mode = Mode::monte_carlo;
    std::shared_ptr<const Eigen::MatrixXd> draws;

    static CentroidBody closed_form(Distribution d, double q)
    {
        if (d.family != Family::gaussian)
            throw std::invalid_argument("CentroidBody: closed form is available for the Gaussian only");
        return {std::move(d), q, Mode::closed_form, nullptr};
    }

    static CentroidBody monte_carlo(Distribution d, double q, std::shared_ptr<const Eigen::MatrixXd> draws)
    {
        if (!draws || draws->cols() != d.dim)
            throw std::invalid_argument("CentroidBody: sample missing or of wrong dimension");
        return {std::move(d), q, Mode::monte_carlo, std::move(draws)};
    }

    [[nodiscard]] CentroidBody with_order(double order) const
    {
        CentroidBody c = *this;
        c.q = order;
        return c;
    }
};

/// MC estimate of (mean |y_i|^q)^{1/q} with a delta-method standard error.
inline Estimate lq_norm_estimate(std::span<const double> y, double q, std::uint64_t provenance = 0)
{
    std::vector<double> pw(y.size());
    double ymax = 0.0;
    for (double v : y)
        ymax = std::max(ymax, std::abs(v));
    if (ymax == 0.0)
        return {0.0, 0.0, y.size(), provenance};
    // Normalize by the largest value so that large q cannot overflow.
    for (std::size_t i = 0; i < y.size(); ++i)
        pw[i] = std::pow(std::abs(y[i]) / ymax, q);
    Estimate e = power_mean_estimate(pw, q, provenance);
    e.value *= ymax;
    e.standard_error *= ymax;
    return e;
}

/// h_{Z_q(mu)}(theta).
inline Estimate zq_support(const CentroidBody& body, const Eigen::VectorXd& theta)
{
    if (!(body.q >= 1.0))
        throw std::invalid_argument("zq_support: q must be >= 1");
    if (theta.size() != body.dist.dim)
        throw DimensionMismatch("zq_support: dimension mismatch");
    if (body.mode == CentroidBody::Mode::closed_form)
        return {gaussian_abs_moment_root(body.q) * theta.norm(), 0.0, 1, 0};
    const auto m = static_cast<double>(body.draws->rows());
    if (body.q > 2.0 * std::log(m))
        throw NotEnoughSamples("zq_support: q = " + std::to_string(body.q) + " exceeds 2 ln M = " +
                               std::to_string(2.0 * std::log(m)) + "; raise the sample size");
    const Eigen::VectorXd y = (*body.draws) * theta;
    return lq_norm_estimate(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), body.q);
}

/// h_{Z_q}(theta_i) for the columns theta_i of `thetas`, with one matrix
/// product over the cached sample.
inline std::vector<Estimate> zq_support_batch(const CentroidBody& body, const Eigen::MatrixXd& thetas)
{
    if (!(body.q >= 1.0))
        throw std::invalid_argument("zq_support: q must be >= 1");
    if (thetas.rows() != body.dist.dim)
        throw DimensionMismatch("zq_support: dimension mismatch");
    std::vector<Estimate> out;
    out.reserve(static_cast<std::size_t>(thetas.cols()));
    if (body.mode == CentroidBody::Mode::closed_form) {
        const double g = gaussian_abs_moment_root(body.q);
        for (Eigen::Index j = 0; j < thetas.cols(); ++j)
            out.push_back({g * thetas.col(j).norm(), 0.0, 1, 0});
        return out;
    }
    const auto m = static_cast<double>(body.draws->rows());
    if (body.q > 2.0 * std::log(m))
        throw NotEnoughSamples("zq_support: q = " + std::to_string(body.q) + " exceeds 2 ln M = " +
                               std::to_string(2.0 * std::log(m)) + "; raise the sample size");
    const Eigen::MatrixXd y = (*body.draws) * thetas;
    for (Eigen::Index j = 0; j < y.cols(); ++j)
        out.push_back(lq_norm_estimate(std::span<const double>(y.col(j).data(), static_cast<std::size_t>(y.rows())), body.q));
    return out;
}

/// Largest h_{Z_q} over sampled directions: a lower bound on R(Z_q(mu)).
inline Estimate zq_radius(const CentroidBody& body, int directions, Stream& rng)
{
    if (directions < 1)
        throw std::invalid_argument("zq_radius: need at least one direction");
    Estimate best{-1.0, 0.0, 0, rng.key()};
    for (int i = 0; i < directions; ++i) {
        const Estimate e = zq_support(body, sample_sphere(body.dist.dim, rng));
        if (e.value > best.value) {
            best.value = e.value;
            best.standard_error = e.standard_error;
        }
    }
    best.sample_count = static_cast<std::size_t>(directions);
    return best;
}

/// psi_alpha norm of a scalar sample: root in t of mean(exp((|y|/t)^alpha)) = 2,
/// bracketed in [0.1 sigma, 50 sigma] with sigma the empirical L2 norm.
inline Estimate psi_alpha_norm(std::span<const double> y, int alpha)
{
    if (alpha != 1 && alpha != 2)
        throw std::invalid_argument("psi_alpha_norm: alpha must be 1 or 2");
    if (y.size() < 10000)
        throw std::invalid_argument("psi_alpha_norm: need a sample of at least 1e4 values");
    double s2 = 0.0;
    for (double v : y)
        s2 += v * v;
    const double sigma = std::sqrt(s2 / static_cast<double>(y.size()));
    auto f = [&](double t) {
        std::vector<double> e(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            e[i] = std::exp(std::pow(std::abs(y[i]) / t, alpha));
        return pairwise_sum(e) / static_cast<double>(y.size()) - 2.0;
    };
    double lo = 0.1 * sigma, hi = 50.0 * sigma;
    const double flo = f(lo), fhi = f(hi);
    if (!(flo > 0.0) || !(fhi < 0.0))
        throw BracketFailure("psi_alpha_norm: no sign change on [0.1 sigma, 50 sigma]; raise the sample size");
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    std::vector<double> e(y.size()), de(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double z = std::pow(std::abs(y[i]) / t, alpha);
        e[i] = std::exp(z);
        de[i] = -e[i] * z * alpha / t;
    }
    const auto se_stats = sample_stats(e);
    const double slope = std::abs(pairwise_sum(de) / static_cast<double>(y.size()));
    return {t, slope > 0 ? se_stats.se / slope : 0.0, y.size(), 0};
}

inline Estimate psi_alpha_norm(const Eigen::MatrixXd& draws, const Eigen::VectorXd& theta, int alpha)
{
    if (theta.size() != draws.cols())
        throw DimensionMismatch("psi_alpha_norm: dimension mismatch");
    const Eigen::VectorXd y = draws * theta;
    return psi_alpha_norm(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), alpha);
}

/// I_q(mu) = (E |x|_2^q)^{1/q}, q in (-n, inf) \ {0}.
inline Estimate iq_moment(const Eigen::MatrixXd& draws, double q)
{
    if (draws.rows() < 10000)
        throw std::invalid_argument("iq_moment: need a sample of at least 1e4 points");
    if (q == 0.0 || !(q > -static_cast<double>(draws.cols())))
        throw std::invalid_argument("iq_moment: need q in (-n, inf) without 0");
    const Eigen::VectorXd r = draws.rowwise().norm();
    std::vector<double> pw(static_cast<std::size_t>(r.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i)
        pw[static_cast<std::size_t>(i)] = std::pow(r(i), q);
    return power_mean_estimate(pw, q);
}

struct TailRow {
    enum class Kind { deviation, small_ball };
    Kind kind = Kind::deviation;
    double parameter = 0.0;   // t for deviation, epsilon for small ball
    double radius = 0.0;      // c3 t sqrt(n) or epsilon sqrt(n)
    std::size_t count = 0;
    double probability = 0.0;
    Interval ci;
    double envelope = 0.0;    // exp(-t sqrt n) or epsilon^{c4 sqrt n}
};

struct TailSpec {
    std::vector<double> t_grid;
    std::vector<double> eps_grid;
    double c3 = 1.0;
    double c4 = 1.0;
};

/// Empirical P(|x| >= c3 t sqrt n) and P(|x| < eps sqrt n) with Wilson intervals.
inline std::vector<TailRow> tail_probabilities(const Eigen::MatrixXd& draws, const TailSpec& spec)
{
    if (draws.rows() < 100000)
        throw std::invalid_argument("tail_probabilities: need a sample of at least 1e5 points");
    const double n = static_cast<double>(draws.cols());
    const double rn = std::sqrt(n);
    const Eigen::VectorXd r = draws.rowwise().norm();
    const auto m = static_cast<std::size_t>(r.size());
    std::vector<TailRow> rows;
    for (double t : spec.t_grid) {
        TailRow row;
        row.kind = TailRow::Kind::deviation;
        row.parameter = t;
        row.radius = spec.c3 * t * rn;
        row.count = static_cast<std::size_t>((r.array() >= row.radius).count());
        row.probability = static_cast<double>(row.count) / static_cast<double>(m);
        row.ci = wilson_interval(row.count, m);
        row.envelope = std::exp(-t * rn);
        rows.push_back(row);
    }
    for (double eps : spec.eps_grid) {
        TailRow row;
        row.kind = TailRow::Kind::small_ball;
        row.parameter = eps;
        row.radius = eps * rn;
        row.count = static_cast<std::size_t>((r.array() < row.radius).count());
        row.probability = static_cast<double>(row.count) / static_cast<double>(m);
        row.ci = wilson_interval(row.count, m);
        row.envelope = std::pow(eps, spec.c4 * rn);
        rows.push_back(row);
    }
    return rows;
}

/// Smallest c3 with P_upper(|x| >= c3 t sqrt n) <= exp(-t sqrt n) on the
/// sample for every t in the grid, P_upper the Wilson upper bound. Where the
/// envelope is below the sample resolution the largest observed norm is used.
inline double fit_deviation_constant(const Eigen::MatrixXd& draws, std::span<const double> t_grid)
{
    const double rn = std::sqrt(static_cast<double>(draws.cols()));
    Eigen::VectorXd r = draws.rowwise().norm();
    std::vector<double> sorted(r.data(), r.data() + r.size());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    double c3 = 0.0;
    for (double t : t_grid) {
        const double env = std::exp(-t * rn);
        // Largest count k of points at or beyond the radius that the envelope allows.
        std::size_t lo = 0, hi = m;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (wilson_interval(mid, m).hi <= env)
                lo = mid;
            else
                hi = mid - 1;
        }
        const std::size_t k = lo;
        const double radius = k >= m ? 0.0 : sorted[m - 1 - k] * (1.0 + 1e-12);
        c3 = std::max(c3, radius / (t * rn));
    }
    return c3;
}

/// Largest c4 with P_upper(|x| < eps sqrt n) <= eps^{c4 sqrt n} for all eps in the
/// grid, where P_upper is the Wilson upper confidence bound.
inline double fit_small_ball_constant(const Eigen::MatrixXd& draws, std::span<const double> eps_grid)
{
    const double rn = std::sqrt(static_cast<double>(draws.cols()));
    const Eigen::VectorXd r = draws.rowwise().norm();
    const auto m = static_cast<std::size_t>(r.size());
    double c4 = std::numeric_limits<double>::infinity();
    for (double eps : eps_grid) {
        const auto cnt = static_cast<std::size_t>((r.array() < eps * rn).count());
        const double p_up = wilson_interval(cnt, m).hi;
        c4 = std::min(c4, std::log(p_up) / (rn * std::log(eps)));
    }
    return c4;
}

/// Smallest C with F(t * E|x|) <= C t for every t in the grid, F the empirical
/// CDF of |x|_2.
inline double fit_latala_constant(const Eigen::MatrixXd& draws, std::span<const double> t_grid)
{
    const Eigen::VectorXd r = draws.rowwise().norm();
    const double mean = r.mean();
    double c = 0.0;
    for (double t : t_grid) {
        const double cdf = static_cast<double>((r.array() <= t * mean).count()) / static_cast<double>(r.size());
        c = std::max(c, cdf / t);
    }
    return c;
}

} // namespace randpoly

#endif // RANDPOLY_MEASURES_HPP
