#ifndef RANDPOLY_ISOCONST_HPP
#define RANDPOLY_ISOCONST_HPP

// Isotropic constants of vertex polytopes: exact moments by coning the facets
// to the origin, Monte Carlo moments (rejection or hit-and-run), the facet
// second-moment bounds and a Bernstein tail check.

#include "randpoly/estimate.hpp"
#include "randpoly/geometry.hpp"
#include "randpoly/measures.hpp"
#include "randpoly/polytope.hpp"
#include "randpoly/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace randpoly {

class SingularFacet : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BodyMoments {
    enum class Provenance { exact, rejection, hit_and_run };

    double volume = 0.0;
    double volume_se = 0.0;
    Eigen::VectorXd centroid;
    Eigen::MatrixXd second;   // (1/|K|) int x x^T dx
    double second_trace_se = 0.0;
    Provenance provenance = Provenance::exact;
    std::size_t samples = 0;
    double rhat = 1.0;
    bool nonconvergence = false;

    [[nodiscard]] Eigen::MatrixXd covariance() const { return second - centroid * centroid.transpose(); }
    [[nodiscard]] double mean_square_norm() const { return second.trace(); }
};

inline std::string_view provenance_name(BodyMoments::Provenance p)
{
    switch (p) {
    case BodyMoments::Provenance::exact: return "exact";
    case BodyMoments::Provenance::rejection: return "rejection";
    case BodyMoments::Provenance::hit_and_run: return "hit-and-run";
    }
    return "unknown";
}

/// Mean of x x^T over the solid simplex conv{0, v_1, ..., v_n}, v_j the columns.
inline Eigen::MatrixXd solid_simplex_second_moment(const Eigen::MatrixXd& v)
{
    const double n = static_cast<double>(v.cols());
    const Eigen::VectorXd s = v.rowwise().sum();
    return (v * v.transpose() + s * s.transpose()) / ((n + 1.0) * (n + 2.0));
}

inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

/// Exact moments of the uniform measure on K: the facets are coned to the
/// origin and each cone is integrated in closed form.
inline BodyMoments body_moments_exact(const VertexPolytope& k, const FacetList& fl)
{
    const int n = k.dim();
    BodyMoments m;
    m.provenance = BodyMoments::Provenance::exact;
    m.centroid = Eigen::VectorXd::Zero(n);
    m.second = Eigen::MatrixXd::Zero(n, n);
    const double inv_fact = std::exp(-log_factorial(n));
    for (const auto& f : fl.facets) {
        const Eigen::MatrixXd v = f.vertex_matrix(k);
        const double vol = std::abs(v.determinant()) * inv_fact;
        m.volume += vol;
        m.centroid += vol * v.rowwise().sum() / (n + 1.0);
        m.second += vol * solid_simplex_second_moment(v);
    }
    m.centroid /= m.volume;
    m.second /= m.volume;
    m.samples = fl.facets.size();
    return m;
}

inline BodyMoments body_moments_exact(const VertexPolytope& k, const FacetOptions& opt = {})
{
    if (k.dim() == 1) {
        const double a = k.generators().cwiseAbs().maxCoeff();
        BodyMoments m;
        m.volume = 2.0 * a;
        m.centroid = Eigen::VectorXd::Zero(1);
        m.second = Eigen::MatrixXd::Constant(1, 1, a * a / 3.0);
        m.samples = 1;
        return m;
    }
    return body_moments_exact(k, facets(k, opt));
}

struct HitAndRunOptions {
    int chains = 8;
    std::size_t burn_in = 0;    // 0 = 10 n^2
    std::size_t thinning = 0;   // 0 = n
};

namespace detail {

/// Gelman-Rubin statistic over chains split in halves.
inline double split_rhat(const std::vector<std::vector<double>>& chains)
{
    std::vector<std::vector<double>> halves;
    for (const auto& c : chains) {
        const std::size_t h = c.size() / 2;
        if (h < 2)
            return std::numeric_limits<double>::infinity();
        halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(h));
        halves.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(h), c.begin() + static_cast<std::ptrdiff_t>(2 * h));
    }
    const double len = static_cast<double>(halves.front().size());
    std::vector<double> means, vars;
    for (const auto& h : halves) {
        const auto s = sample_stats(h);
        means.push_back(s.mean);
        vars.push_back(s.sd * s.sd);
    }
    const auto ms = sample_stats(means);
    const double b = len * ms.sd * ms.sd;
    const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(vars.size());
    if (w == 0.0)
        return 1.0;
    const double var_plus = (len - 1.0) / len * w + b / len;
    return std::sqrt(var_plus / w);
}

/// Standard error of the mean by non-overlapping batch means.
inline double batch_means_se(const std::vector<double>& xs)
{
    const std::size_t b = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(xs.size()))));
    const std::size_t nb = xs.size() / b;
    if (nb < 2)
        return sample_stats(xs).se;
    std::vector<double> means(nb);
    for (std::size_t i = 0; i < nb; ++i)
        means[i] = std::accumulate(xs.begin() + static_cast<std::ptrdiff_t>(i * b),
                                   xs.begin() + static_cast<std::ptrdiff_t>((i + 1) * b), 0.0) /
                   static_cast<double>(b);
    return sample_stats(means).se;
}

inline void accumulate_moments(BodyMoments& m, const std::vector<Eigen::VectorXd>& pts)
{
    const auto n = m.centroid.size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(pts.size()), n);
    for (std::size_t i = 0; i < pts.size(); ++i)
        x.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    const double cnt = static_cast<double>(pts.size());
    m.centroid = x.colwise().sum().transpose() / cnt;
    m.second = x.transpose() * x / cnt;
    m.samples = pts.size();
}

} // namespace detail

/// Moments of the uniform measure on K by rejection from R(K) B_2^n.
inline BodyMoments body_moments_rejection(const VertexPolytope& k, std::size_t samples, Stream& rng)
{
    const int n = k.dim();
    const double big_r = k.max_generator_norm();
    GaugeOracle oracle(k);
    double pilot = 0.0;
    for (int i = 0; i < 200; ++i)
        pilot += std::pow(oracle.radial(sample_sphere(n, rng)) / big_r, n);
    pilot /= 200.0;
    if (pilot < 1e-6)
        throw LowAcceptance("body_moments: expected acceptance " + std::to_string(pilot) + " < 1e-6");
    std::vector<Eigen::VectorXd> pts;
    std::size_t tried = 0;
    while (pts.size() < samples) {
        const Eigen::VectorXd x = sample_ball(n, big_r, rng);
        ++tried;
        if (oracle.gauge(x) <= 1.0)
            pts.push_back(x);
    }
    BodyMoments m;
    m.provenance = BodyMoments::Provenance::rejection;
    m.centroid = Eigen::VectorXd::Zero(n);
    detail::accumulate_moments(m, pts);
    const double ball = unit_ball_volume(n) * std::pow(big_r, n);
    const double p = static_cast<double>(samples) / static_cast<double>(tried);
    m.volume = ball * p;
    m.volume_se = ball * std::sqrt(p * (1.0 - p) / static_cast<double>(tried));
    std::vector<double> sq(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        sq[i] = pts[i].squaredNorm();
    m.second_trace_se = sample_stats(sq).se;
    return m;
}

/// Moments by hit-and-run over chords found with the LP oracle. Volume is
/// taken from the exact path when n is within the facet cap and is NaN
/// otherwise.
inline BodyMoments body_moments_hit_and_run(const VertexPolytope& k, std::size_t samples, Stream& rng,
                                            const HitAndRunOptions& opt = {})
{
    const int n = k.dim();
    const std::size_t burn = opt.burn_in ? opt.burn_in : static_cast<std::size_t>(10 * n * n);
    const std::size_t thin = opt.thinning ? opt.thinning : static_cast<std::size_t>(n);
    const int chains = std::max(1, opt.chains);
    const std::size_t per_chain = std::max<std::size_t>(4, (samples + chains - 1) / chains);
    GaugeOracle oracle(k);
    std::vector<Eigen::VectorXd> pts;
    std::vector<std::vector<double>> traces(static_cast<std::size_t>(chains));
    for (int c = 0; c < chains; ++c) {
        Stream cr = rng.substream(static_cast<std::uint64_t>(c));
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        const std::size_t steps = burn + per_chain * thin;
        for (std::size_t s = 1; s <= steps; ++s) {
            const Eigen::VectorXd u = sample_sphere(n, cr);
            const double fwd = oracle.ray_extent(x, u);
            const double back = oracle.ray_extent(x, -u);
            x += (-back + (fwd + back) * cr.uniform()) * u;
            if (s > burn && (s - burn) % thin == 0) {
                pts.push_back(x);
                traces[static_cast<std::size_t>(c)].push_back(x.squaredNorm());
            }
        }
    }
    BodyMoments m;
    m.provenance = BodyMoments::Provenance::hit_and_run;
    m.centroid = Eigen::VectorXd::Zero(n);
    detail::accumulate_moments(m, pts);
    m.rhat = detail::split_rhat(traces);
    m.nonconvergence = !(m.rhat <= 1.1);
    // Chains are independent, so the pooled se combines per-chain batch means.
    double var = 0.0;
    for (const auto& t : traces) {
        const double se = detail::batch_means_se(t);
        var += se * se;
    }
    m.second_trace_se = std::sqrt(var) / chains;
    m.volume = n <= FacetOptions{}.dimension_cap ? volume_exact(k) : std::numeric_limits<double>::quiet_NaN();
    return m;
}

enum class MomentMode { exact, rejection, hit_and_run };

inline BodyMoments body_moments(const VertexPolytope& k, MomentMode mode, std::size_t samples, Stream& rng)
{
    switch (mode) {
    case MomentMode::exact: return body_moments_exact(k);
    case MomentMode::rejection: return body_moments_rejection(k, samples, rng);
    case MomentMode::hit_and_run: return body_moments_hit_and_run(k, samples, rng);
    }
    throw std::invalid_argument("body_moments: unknown mode");
}

/// L_K = |K|^{-1/n} det(Cov)^{1/(2n)}.
inline double isotropic_constant(const BodyMoments& m)
{
    const double n = static_cast<double>(m.centroid.size());
    const Eigen::MatrixXd cov = m.covariance();
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::domain_error("isotropic_constant: covariance is not positive definite");
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < cov.rows(); ++i)
        log_det += 2.0 * std::log(llt.matrixL()(i, i));
    return std::exp(-std::log(m.volume) / n + log_det / (2.0 * n));
}

inline double isotropic_constant(const VertexPolytope& k) { return isotropic_constant(body_moments_exact(k)); }

/// (1/|F|) int_F |u|^2 du for F = conv of the columns of t.
inline double facet_second_moment(const Eigen::MatrixXd& t)
{
    if (t.rows() != t.cols())
        throw DimensionMismatch("facet_second_moment: vertex matrix must be square");
    const double n = static_cast<double>(t.cols());
    double scale = 1.0;
    for (Eigen::Index j = 0; j < t.cols(); ++j)
        scale *= t.col(j).norm();
    if (!(std::abs(t.determinant()) > 1e-12 * scale))
        throw SingularFacet("facet_second_moment: vertex matrix is singular");
    return (t.colwise().squaredNorm().sum() + t.rowwise().sum().squaredNorm()) / (n * (n + 1.0));
}

inline double facet_second_moment(const FacetSimplex& f, const VertexPolytope& k)
{
    return facet_second_moment(f.vertex_matrix(k));
}

/// (n/(n+2)) max over facets of the facet second moment.
inline double max_facet_bound(const VertexPolytope& k, const FacetList& fl)
{
    const double n = k.dim();
    double best = 0.0;
    for (const auto& f : fl.facets)
        best = std::max(best, facet_second_moment(f, k));
    return n / (n + 2.0) * best;
}

inline double max_facet_bound(const VertexPolytope& k) { return max_facet_bound(k, facets(k)); }

struct SignMax {
    double value = 0.0;   // (2/(n(n+1))) max |sum eps_j y_j|^2
    double max_norm_sq = 0.0;
    bool exact = true;    // false: greedy lower bound on the maximum
};

/// Exact enumeration up to `exact_limit` columns, otherwise 64 restarts of
/// greedy single-sign-flip ascent.
inline SignMax sign_max_bound(const Eigen::MatrixXd& t, Stream* rng = nullptr, int exact_limit = 20)
{
    const auto n = t.cols();
    const double nn = static_cast<double>(n);
    SignMax out;
    if (n <= exact_limit) {
        // Gray code over the signs of columns 1..n-1; column 0 fixed at +1.
        Eigen::VectorXd s = t.rowwise().sum();
        std::vector<int> eps(static_cast<std::size_t>(n), 1);
        double best = s.squaredNorm();
        const std::uint64_t total = std::uint64_t{1} << (n - 1);
        for (std::uint64_t g = 1; g < total; ++g) {
            const int bit = __builtin_ctzll(g);
            const auto j = static_cast<Eigen::Index>(bit + 1);
            s -= 2.0 * eps[static_cast<std::size_t>(j)] * t.col(j);
            eps[static_cast<std::size_t>(j)] = -eps[static_cast<std::size_t>(j)];
            best = std::max(best, s.squaredNorm());
        }
        out.max_norm_sq = best;
    } else {
        Stream local(0x51a9);
        Stream& r = rng ? *rng : local;
        const Eigen::MatrixXd g = t.transpose() * t;
        double best = 0.0;
        for (int restart = 0; restart < 64; ++restart) {
            Eigen::VectorXd e(n);
            for (Eigen::Index j = 0; j < n; ++j)
                e(j) = r.sign();
            Eigen::VectorXd ge = g * e;
            for (;;) {
                // Flipping e_j changes |T e|^2 by -4 e_j (G e)_j + 4 G_jj.
                Eigen::Index arg = -1;
                double gain = 1e-12;
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double d = -4.0 * e(j) * ge(j) + 4.0 * g(j, j);
                    if (d > gain) {
                        gain = d;
                        arg = j;
                    }
                }
                if (arg < 0)
                    break;
                ge -= 2.0 * e(arg) * g.col(arg);
                e(arg) = -e(arg);
            }
            best = std::max(best, e.dot(ge));
        }
        out.max_norm_sq = best;
        out.exact = false;
    }
    out.value = 2.0 / (nn * (nn + 1.0)) * out.max_norm_sq;
    return out;
}

/// Mean of u u^T for u uniform on the simplex conv{e_1, ..., e_n}.
inline Eigen::MatrixXd simplex_moment_mc(int n, std::size_t samples, Stream& rng)
{
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd u(n);
    for (std::size_t s = 0; s < samples; ++s) {
        double tot = 0.0;
        for (int j = 0; j < n; ++j) {
            u(j) = rng.exponential();
            tot += u(j);
        }
        u /= tot;
        acc.noalias() += u * u.transpose();
    }
    return acc / static_cast<double>(samples);
}

/// MC estimate of (1/|F|) int_F |u|^2 du with F = conv of the columns of t.
inline Estimate facet_second_moment_mc(const Eigen::MatrixXd& t, std::size_t samples, Stream& rng)
{
    const auto n = t.cols();
    std::vector<double> v(samples);
    Eigen::VectorXd u(n);
    for (auto& x : v) {
        double tot = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            u(j) = rng.exponential();
            tot += u(j);
        }
        x = (t * (u / tot)).squaredNorm();
    }
    return mean_estimate(v, rng.key());
}

struct BernsteinRow {
    double t = 0.0;
    std::size_t count = 0;
    double probability = 0.0;
    Interval ci;
    double envelope = 0.0;   // 2 exp(-c min{t^2/(A^2|a|_2^2), t/(A|a|_inf)}) with c = 1/4
};

struct BernsteinReport {
    double A = 0.0;
    std::vector<BernsteinRow> rows;
    double fitted_c = 0.0;   // largest c with empirical <= envelope on the grid
};

/// Empirical P(|sum a_j g_j| >= t) for independent one-dimensional marginals
/// g_j = <x_j, e_1> of dist. A <= 0 means: use the empirical psi_1 norm.
inline BernsteinReport bernstein_check(const Distribution& dist, const std::vector<double>& a, double A,
                                       const std::vector<double>& t_grid, std::size_t samples, Stream& rng)
{
    if (a.empty())
        throw std::invalid_argument("bernstein_check: empty weight vector");
    const std::size_t m = a.size();
    std::vector<double> g1;
    std::vector<double> sums(samples);
    {
        Stream sr = rng.substream("draws");
        for (std::size_t s = 0; s < samples; ++s) {
            const Eigen::MatrixXd x = sample(dist, m, sr);
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                acc += a[j] * x(static_cast<Eigen::Index>(j), 0);
                if (g1.size() < samples)
                    g1.push_back(x(static_cast<Eigen::Index>(j), 0));
            }
            sums[s] = std::abs(acc);
        }
    }
    BernsteinReport rep;
    rep.A = A > 0.0 ? A : psi_alpha_norm(g1, 1).value;
    double a2 = 0.0, ainf = 0.0;
    for (double v : a) {
        a2 += v * v;
        ainf = std::max(ainf, std::abs(v));
    }
    rep.fitted_c = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        BernsteinRow row;
        row.t = t;
        row.count = static_cast<std::size_t>(std::count_if(sums.begin(), sums.end(), [&](double s) { return s >= t; }));
        row.probability = static_cast<double>(row.count) / static_cast<double>(samples);
        row.ci = wilson_interval(row.count, samples);
        const double expo = std::min(t * t / (rep.A * rep.A * a2), t / (rep.A * ainf));
        row.envelope = 2.0 * std::exp(-0.25 * expo);
        if (row.count > 0 && expo > 0.0)
            rep.fitted_c = std::min(rep.fitted_c, -std::log(row.probability / 2.0) / expo);
        rep.rows.push_back(row);
    }
    return rep;
}

struct KKReport {
    int n = 0;
    int N = 0;
    std::size_t facet_count = 0;
    bool facet_count_within_binomial = true;
    bool coplanar_input = false;
    double interior_second_moment = 0.0;   // (1/|K|) int |x|^2
    double max_facet_bound = 0.0;          // (n/(n+2)) max_s facet moment
    double max_sign_bound = 0.0;           // (n/(n+2)) max_s sign bound
    bool sign_bound_exact = true;
    double volume = 0.0;
    double volume_root = 0.0;              // |K|^{1/n}
    double implied_L_bound = 0.0;          // sqrt(interior / (n |K|^{2/n}))
    double isotropic_constant = 0.0;
    double log_scale = 0.0;                // sqrt(log(2N/n))

    /// (vi) <= (v) and (i) <= (ii) <= (iii), relative tolerance tol.
    [[nodiscard]] bool chain_holds(double tol = 1e-9) const
    {
        auto le = [tol](double a, double b) { return a <= b * (1.0 + tol) + tol; };
        return le(isotropic_constant, implied_L_bound) && le(interior_second_moment, max_facet_bound) &&
               le(max_facet_bound, max_sign_bound);
    }
};

inline double log_binomial(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

/// The facet chain on the exact path (n within the facet cap).
inline KKReport kk_bound_pipeline(const VertexPolytope& k, const FacetOptions& opt = {})
{
    const int n = k.dim();
    if (n < 2)
        throw std::invalid_argument("kk_bound_pipeline: need n >= 2");
    const FacetList fl = facets(k, opt);
    KKReport r;
    r.n = n;
    r.N = k.size();
    r.facet_count = fl.facets.size();
    r.coplanar_input = fl.coplanar_input;
    r.facet_count_within_binomial =
        std::log(static_cast<double>(r.facet_count)) <= log_binomial(2.0 * r.N, n) + 1e-12;
    const BodyMoments m = body_moments_exact(k, fl);
    r.interior_second_moment = m.mean_square_norm();
    double fmax = 0.0, smax = 0.0;
    for (const auto& f : fl.facets) {
        const Eigen::MatrixXd t = f.vertex_matrix(k);
        fmax = std::max(fmax, facet_second_moment(t));
        const SignMax s = sign_max_bound(t);
        smax = std::max(smax, s.value);
        r.sign_bound_exact = r.sign_bound_exact && s.exact;
    }
    const double ratio = n / (n + 2.0);
    r.max_facet_bound = ratio * fmax;
    r.max_sign_bound = ratio * smax;
    r.volume = m.volume;
    r.volume_root = std::pow(m.volume, 1.0 / n);
    r.implied_L_bound = std::sqrt(r.interior_second_moment / (n * r.volume_root * r.volume_root));
    r.isotropic_constant = isotropic_constant(m);
    r.log_scale = std::sqrt(std::log(2.0 * r.N / n));
    return r;
}

} // namespace randpoly

#endif // RANDPOLY_ISOCONST_HPP
