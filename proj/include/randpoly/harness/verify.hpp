#ifndef RANDPOLY_HARNESS_VERIFY_HPP
#define RANDPOLY_HARNESS_VERIFY_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "randpoly/entropy.hpp"
#include "randpoly/functionals.hpp"
#include "randpoly/harness/experiments.hpp"
#include "randpoly/isoconst.hpp"
#include "randpoly/measures.hpp"
#include "randpoly/polytope.hpp"

namespace randpoly::harness {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyOptions {
    std::uint64_t seed = 20240611;
    int workers = 1;
    std::vector<int> only;            // empty: all criteria
    std::filesystem::path scratch;    // for the file-writing checks; default is a temp dir
};

namespace verify_detail {

/// Accumulates sub-check outcomes; the first failure is kept in the detail.
class Checks {
public:
    void expect(bool ok, const std::string& what)
    {
        ++total_;
        if (!ok) {
            ++failed_;
            if (first_failure_.empty())
                first_failure_ = what;
        }
    }
    void note(const std::string& s)
    {
        if (!notes_.empty())
            notes_ += "; ";
        notes_ += s;
    }
    [[nodiscard]] bool pass() const { return failed_ == 0 && total_ > 0; }
    [[nodiscard]] std::string detail() const
    {
        std::ostringstream os;
        os << (total_ - failed_) << "/" << total_ << " checks";
        if (!notes_.empty())
            os << "; " << notes_;
        if (!first_failure_.empty())
            os << "; first failure: " << first_failure_;
        return os.str();
    }

private:
    int total_ = 0;
    int failed_ = 0;
    std::string first_failure_;
    std::string notes_;
};

inline std::string fmt(double v, int prec = 4)
{
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

inline bool close_abs(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline Eigen::VectorXd random_vector(int n, Stream& rng)
{
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v(i) = rng.normal();
    return v;
}

// 1 -------------------------------------------------------------------------
inline void exact_geometry(Checks& ck, Stream rng)
{
    for (int n = 2; n <= 4; ++n) {
        const VertexPolytope cross = VertexPolytope::cross_polytope(n);
        const VertexPolytope cube = VertexPolytope::cube(n);
        const std::string tag = " (n=" + std::to_string(n) + ")";
        for (int rep = 0; rep < 20; ++rep) {
            const Eigen::VectorXd th = sample_sphere(n, rng);
            const Eigen::VectorXd y = random_vector(n, rng);
            ck.expect(close_abs(support(cross, th), th.cwiseAbs().maxCoeff(), 1e-9), "cross support" + tag);
            ck.expect(close_abs(support(cube, th), th.lpNorm<1>(), 1e-9), "cube support" + tag);
            ck.expect(close_abs(gauge(cross, y), y.lpNorm<1>(), 1e-9 * std::max(1.0, y.lpNorm<1>())), "cross gauge" + tag);
            ck.expect(close_abs(gauge(cube, y), y.cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, y.cwiseAbs().maxCoeff())),
                      "cube gauge" + tag);
            ck.expect(close_abs(radial(cross, th), 1.0 / th.lpNorm<1>(), 1e-9), "cross radial" + tag);
            ck.expect(close_abs(radial(cube, th), 1.0 / th.cwiseAbs().maxCoeff(), 1e-9), "cube radial" + tag);
        }
        // Cross-polytope: 2^n facets x.eps = 1, all simplicial.
        const FacetList fc = facets(cross);
        ck.expect(fc.facets.size() == (1u << n), "cross facet count" + tag);
        for (const auto& f : fc.facets) {
            const double rn = std::sqrt(static_cast<double>(n));
            ck.expect(close_abs(f.offset, 1.0 / rn, 1e-9), "cross facet offset" + tag);
            ck.expect(close_abs(f.normal.cwiseAbs().minCoeff(), 1.0 / rn, 1e-9) &&
                          close_abs(f.normal.cwiseAbs().maxCoeff(), 1.0 / rn, 1e-9),
                      "cross facet normal" + tag);
        }
        // Cube: triangulated facets, each lying in a face x_i = +-1.
        const FacetList fq = facets(cube);
        std::vector<int> seen(2 * n, 0);
        for (const auto& f : fq.facets) {
            Eigen::Index i;
            const double m = f.normal.cwiseAbs().maxCoeff(&i);
            ck.expect(close_abs(m, 1.0, 1e-9) && close_abs(f.normal.norm(), 1.0, 1e-9), "cube facet normal" + tag);
            ck.expect(close_abs(f.offset, 1.0, 1e-9), "cube facet offset" + tag);
            seen[static_cast<std::size_t>(2 * i + (f.normal(i) > 0 ? 0 : 1))] = 1;
        }
        ck.expect(std::count(seen.begin(), seen.end(), 1) == 2 * n, "cube face coverage" + tag);
        double fact = 1.0;
        for (int j = 2; j <= n; ++j)
            fact *= j;
        ck.expect(close_abs(volume_exact(cross), std::pow(2.0, n) / fact, 1e-9), "cross volume" + tag);
        ck.expect(close_abs(volume_exact(cube), std::pow(2.0, n), 1e-9), "cube volume" + tag);
        ck.expect(close_abs(b_exact(cross), std::sqrt(static_cast<double>(n)), 1e-9), "cross b" + tag);
        ck.expect(close_abs(b_exact(cube), 1.0, 1e-9), "cube b" + tag);
    }
}

// 2 -------------------------------------------------------------------------
inline void dirichlet_identity(Checks& ck, Stream rng)
{
    double worst = 0.0;
    for (int n : {2, 3, 5}) {
        Stream r = rng.substream(static_cast<std::uint64_t>(n));
        const Eigen::MatrixXd m = simplex_moment_mc(n, 1000000, r);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double exact = (i == j ? 2.0 : 1.0) / (n * (n + 1.0));
                const double rel = std::abs(m(i, j) - exact) / exact;
                worst = std::max(worst, rel);
                ck.expect(rel <= 0.01, "entry (" + std::to_string(i) + "," + std::to_string(j) + ") at n=" +
                                           std::to_string(n) + " off by " + fmt(rel));
            }
    }
    ck.note("max relative error " + fmt(worst));
}

// 3 -------------------------------------------------------------------------
inline void facet_formula(Checks& ck, Stream rng)
{
    double worst = 0.0;
    Stream rs = rng.substream("simplices");
    for (int s = 0; s < 50; ++s) {
        const int n = 2 + s % 4;
        Eigen::MatrixXd t(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                t(i, j) = rs.normal();
        const double closed = facet_second_moment(t);
        Stream rm = rng.substream("mc").substream(static_cast<std::uint64_t>(s));
        const Estimate mc = facet_second_moment_mc(t, 200000, rm);
        const double rel = std::abs(mc.value - closed) / closed;
        worst = std::max(worst, rel);
        ck.expect(rel <= 0.01, "simplex " + std::to_string(s) + " off by " + fmt(rel));
    }
    ck.note("max relative error " + fmt(worst));
    int chains = 0;
    for (int n = 2; n <= 5; ++n)
        for (int N : {n + 1, 2 * n, 4 * n}) {
            Stream r = rng.substream("chain").substream(static_cast<std::uint64_t>(100 * n + N));
            const VertexPolytope k(sample(Distribution::make(Family::gaussian, n), static_cast<std::size_t>(N), r));
            const KKReport rep = kk_bound_pipeline(k);
            ck.expect(rep.interior_second_moment <= rep.max_facet_bound * (1 + 1e-12) &&
                          rep.max_facet_bound <= rep.max_sign_bound * (1 + 1e-12),
                      "chain at n=" + std::to_string(n) + ", N=" + std::to_string(N));
            ck.expect(rep.sign_bound_exact, "sign bound not exhaustive at n=" + std::to_string(n));
            ++chains;
        }
    ck.note(std::to_string(chains) + " exact chains");
}

// 4 -------------------------------------------------------------------------
inline void isotropic_constant_checks(Checks& ck, Stream rng, int workers)
{
    const double lc = isotropic_constant(VertexPolytope::cube(4, 0.5));
    ck.expect(close_abs(lc, 1.0 / std::sqrt(12.0), 1e-6), "unit cube L = " + fmt(lc, 10));

    Stream ra = rng.substream("affine");
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 3 + rep % 2;
        const VertexPolytope k(sample(Distribution::make(Family::gaussian, n), 5 * n, ra));
        // M = U diag(s) V^T with singular values in [1, 10].
        Eigen::MatrixXd g(n, n), h(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                g(i, j) = ra.normal();
                h(i, j) = ra.normal();
            }
        const Eigen::MatrixXd u = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
        const Eigen::MatrixXd v = Eigen::HouseholderQR<Eigen::MatrixXd>(h).householderQ();
        Eigen::VectorXd s(n);
        for (int i = 0; i < n; ++i)
            s(i) = 1.0 + 9.0 * i / (n - 1.0);
        const Eigen::MatrixXd m = u * s.asDiagonal() * v.transpose();
        const double l0 = isotropic_constant(k);
        const double l1 = isotropic_constant(k.transformed(m));
        ck.expect(std::abs(l1 - l0) <= 1e-8 * l0, "affine invariance off by " + fmt(std::abs(l1 - l0) / l0));
    }

    // Nested draws: K_16 inside K_64 inside ... for each seed.
    const int n = 4;
    const std::vector<int> grid{16, 64, 256, 1024, 4096};
    const int seeds = 20;
    const Distribution dist = Distribution::make(Family::gaussian, n);
    auto res = run_parallel<std::vector<double>>(seeds, workers, [&](int s) {
        Stream r = rng.substream("trend").substream(static_cast<std::uint64_t>(s));
        const Eigen::MatrixXd pts = sample(dist, static_cast<std::size_t>(grid.back()), r);
        std::vector<double> l;
        for (int N : grid)
            l.push_back(isotropic_constant(VertexPolytope(pts.topRows(N))));
        return l;
    });
    if (res.error)
        std::rethrow_exception(res.error);
    std::vector<double> x, mean(grid.size(), 0.0);
    double c6 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double scale = std::sqrt(std::log(2.0 * grid[i] / n));
        x.push_back(scale);
        for (int s = 0; s < seeds; ++s) {
            const double l = (*res.slots[static_cast<std::size_t>(s)])[i];
            mean[i] += l / seeds;
            c6 = std::max(c6, l / scale);
        }
    }
    const LinearFit f = linear_fit(x, mean);
    bool monotone = true;
    for (std::size_t i = 1; i < mean.size(); ++i)
        monotone = monotone && (f.slope >= 0 ? mean[i] >= mean[i - 1] : mean[i] <= mean[i - 1]);
    std::string ms;
    for (double v : mean)
        ms += (ms.empty() ? "" : " ") + fmt(v);
    ck.note("mean L over N grid: " + ms + "; slope " + fmt(f.slope) + "; C6 " + fmt(c6));
    ck.expect(monotone, "per-N means not monotone along the fitted slope");
    ck.expect(c6 <= 3.0, "fitted C6 = " + fmt(c6));
}

// 5 -------------------------------------------------------------------------
inline void quermass_checks(Checks& ck, Stream rng)
{
    const int n = 8;
    Stream rg = rng.substream("ball");
    Eigen::MatrixXd g(300000, n);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        g.row(i) = sample_sphere(n, rg).transpose();
    const VertexPolytope ball(std::move(g));

    Stream rp = rng.substream("profile");
    const auto prof = quermass_profile(ball, 4, 24, rp);
    std::string qs;
    for (int k = 1; k <= 4; ++k) {
        const Estimate& e = prof[static_cast<std::size_t>(k - 1)];
        qs += (qs.empty() ? "" : " ") + fmt(e.value, 5);
        ck.expect(std::abs(e.value - 1.0) <= 0.03, "Q_" + std::to_string(k) + " = " + fmt(e.value));
        if (k < 4) {
            const Estimate& nx = prof[static_cast<std::size_t>(k)];
            const double joint = std::hypot(e.standard_error, nx.standard_error);
            ck.expect(e.value >= nx.value - 3.0 * joint, "Q_k not decreasing at k=" + std::to_string(k));
        }
    }
    Stream r1 = rng.substream("q1");
    const Estimate q1 = quermass_Qk(ball, 1, 400, r1);
    Stream rw = rng.substream("width");
    const Estimate w = mean_width(ball, 10000, rw);
    const double joint = std::hypot(q1.standard_error, w.standard_error);
    ck.expect(std::abs(q1.value - w.value) <= 3.0 * joint,
              "Q_1 = " + fmt(q1.value, 6) + " vs w = " + fmt(w.value, 6) + " (joint se " + fmt(joint) + ")");
    ck.note("Q_1..Q_4 = " + qs + "; Q_1 " + fmt(q1.value, 5) + " vs w " + fmt(w.value, 5));
}

// 6 -------------------------------------------------------------------------
inline void scaling_checks(Checks& ck, const VerifyOptions& opt, const std::filesystem::path& dir)
{
    for (const char* family : {"gaussian", "cube"}) {
        ExperimentConfig c;
        c.distribution = family;
        c.n = 32;
        c.N_grid = {64, 256, 1024, 4096, 16384};
        c.k_list = {1, 2, 3};
        c.trials = 20;
        c.budgets.subspaces = 20;
        c.budgets.sphere = 2000;
        c.seed = opt.seed;
        c.workers = opt.workers;
        c.output_dir = (dir / (std::string("scaling-") + family)).string();
        const ScalingReport rep = scaling_study(c);
        for (const auto& f : rep.fits) {
            if (f.quantity != "Q_k")
                continue;
            const std::string tag = std::string(family) + " k=" + std::to_string(*f.k);
            ck.expect(f.fit.r_squared >= 0.95 && f.fit.slope > 0.0,
                      tag + ": slope " + fmt(f.fit.slope) + ", R^2 " + fmt(f.fit.r_squared));
            ck.note(tag + " R^2 " + fmt(f.fit.r_squared, 5));
        }
    }
}

// 7 -------------------------------------------------------------------------
// The 0.05 threshold sits far below the pilot values of c (about 2 for this
// configuration); the check guards against collapse rather than tuning.
inline void inclusion_checks(Checks& ck, const VerifyOptions& opt, const std::filesystem::path& dir)
{
    ExperimentConfig c;
    c.distribution = "cube";
    c.n = 30;
    c.N_grid = {3000};
    c.q_list = {std::log(3000.0 / 30.0)};
    c.trials = 20;
    c.budgets.directions = 1000;
    c.budgets.sample = 50000;
    c.seed = opt.seed;
    c.workers = opt.workers;
    c.output_dir = (dir / "inclusion").string();
    const InclusionReport rep = inclusion_study(c, 0.05);
    const auto& s = rep.per_q.front();
    ck.note("c: min " + fmt(s.min) + ", median " + fmt(s.median) + ", " + std::to_string(s.above_threshold) + "/" +
            std::to_string(s.c.size()) + " above 0.05");
    ck.expect(s.above_threshold >= 19, "only " + std::to_string(s.above_threshold) + " trials above 0.05");
}

// 8 -------------------------------------------------------------------------
inline void outer_radius_checks(Checks& ck, Stream rng, int workers)
{
    const int n = 16, N = 256;
    const std::vector<int> ks{1, 4, 8, 16};
    const Distribution dist = Distribution::make(Family::gaussian, n);
    // psi_2 constant of the Gaussian marginal, estimated on a shared sample.
    Stream rb = rng.substream("psi2");
    std::vector<double> g(200000);
    for (auto& v : g)
        v = rb.normal();
    const double b = psi_alpha_norm(g, 2).value;

    struct Out {
        double lo = 1e300, hi = 0.0, c_up = 0.0, c_lo = 0.0;
    };
    auto res = run_parallel<Out>(10, workers, [&](int trial) {
        Stream r = rng.substream("trial").substream(static_cast<std::uint64_t>(trial));
        Stream rk = r.substream("polytope");
        const VertexPolytope k(sample(dist, N, rk));
        Stream rw = r.substream("width");
        const double w = mean_width(k, 10000, rw).value;
        const double R = radius(k);
        Out o;
        for (int kk : ks) {
            Stream rr = r.substream("Rk").substream(static_cast<std::uint64_t>(kk));
            const double rt = outer_radius_Rk(k, kk, 100, rr).value;
            const double ratio = rt / (w + std::sqrt(static_cast<double>(kk) / n) * R);
            o.lo = std::min(o.lo, ratio);
            o.hi = std::max(o.hi, ratio);
            o.c_up = std::max(o.c_up, rt / (b * std::max(std::sqrt(kk), std::sqrt(std::log(N)))));
            o.c_lo = std::max(o.c_lo, std::max(std::sqrt(kk), std::sqrt(std::log(static_cast<double>(N) / n))) / (b * rt));
        }
        return o;
    });
    if (res.error)
        std::rethrow_exception(res.error);
    Out all;
    for (const auto& o : res.slots) {
        all.lo = std::min(all.lo, o->lo);
        all.hi = std::max(all.hi, o->hi);
        all.c_up = std::max(all.c_up, o->c_up);
        all.c_lo = std::max(all.c_lo, o->c_lo);
    }
    ck.note("ratio range [" + fmt(all.lo) + ", " + fmt(all.hi) + "]; b " + fmt(b) + "; upper constant " + fmt(all.c_up) +
            "; inverse lower constant " + fmt(all.c_lo));
    ck.expect(all.lo >= 0.25 && all.hi <= 4.0, "ratio outside [0.25, 4]");
    ck.expect(all.c_up <= 5.0, "upper max-form constant " + fmt(all.c_up));
    ck.expect(all.c_lo <= 5.0, "lower max-form constant " + fmt(all.c_lo));
}

// 9 -------------------------------------------------------------------------
inline void tail_checks(Checks& ck, Stream rng)
{
    const std::vector<double> t_grid{1.0, 1.5, 2.0, 3.0};
    const std::vector<double> eps_grid{0.05, 0.1, 0.2, 0.3, 0.5};
    const std::vector<double> lat_grid{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
    double c3max = 0.0, c4min = 1e300, latmax = 0.0;
    for (int n : {16, 25})
        for (Family fam : {Family::gaussian, Family::cube, Family::ball, Family::l1ball}) {
            const std::string tag = std::string(family_name(fam)) + " n=" + std::to_string(n);
            const Distribution d = Distribution::make(fam, n);
            Stream rf = rng.substream("fit").substream(family_name(fam)).substream(static_cast<std::uint64_t>(n));
            const Eigen::MatrixXd fit = sample(d, 200000, rf);
            TailSpec spec{t_grid, eps_grid, fit_deviation_constant(fit, t_grid), fit_small_ball_constant(fit, eps_grid)};
            ck.expect(std::isfinite(spec.c3) && spec.c3 > 0.0, "deviation constant for " + tag);
            ck.expect(std::isfinite(spec.c4) && spec.c4 > 0.0, "small-ball constant for " + tag);
            c3max = std::max(c3max, spec.c3);
            c4min = std::min(c4min, spec.c4);
            // Held-out sample: the fitted envelopes must not be exceeded beyond
            // sampling error.
            Stream rh = rng.substream("holdout").substream(family_name(fam)).substream(static_cast<std::uint64_t>(n));
            const Eigen::MatrixXd hold = sample(d, 200000, rh);
            for (const TailRow& row : tail_probabilities(hold, spec))
                ck.expect(row.ci.lo <= row.envelope,
                          tag + (row.kind == TailRow::Kind::deviation ? " deviation" : " small-ball") + " at " +
                              fmt(row.parameter) + ": " + fmt(row.probability) + " > " + fmt(row.envelope));
            const double lat = fit_latala_constant(hold, lat_grid);
            latmax = std::max(latmax, lat);
            ck.expect(lat <= 10.0, "Latala constant " + fmt(lat) + " for " + tag);
        }
    double cmin = 1e300;
    for (Family fam : {Family::gaussian, Family::cube, Family::l1ball}) {
        Stream rb = rng.substream("bernstein").substream(family_name(fam));
        const std::vector<double> a(64, 1.0 / 8.0);
        const BernsteinReport rep =
            bernstein_check(Distribution::make(fam, 4), a, 0.0, {0.5, 1.0, 2.0, 3.0, 4.0}, 100000, rb);
        cmin = std::min(cmin, rep.fitted_c);
        ck.expect(rep.fitted_c >= 0.05, std::string("Bernstein constant ") + fmt(rep.fitted_c) + " for " +
                                            std::string(family_name(fam)));
    }
    ck.note("c3 max " + fmt(c3max) + ", c4 min " + fmt(c4min) + ", Latala C max " + fmt(latmax) + ", Bernstein c min " +
            fmt(cmin));
}

// 10 ------------------------------------------------------------------------
inline void entropy_checks(Checks& ck, Stream rng)
{
    {
        const int n = 8, N = 256;
        Stream rk = rng.substream("polytope");
        const VertexPolytope k(sample(Distribution::make(Family::cube, n), N, rk));
        Stream rp = rng.substream("profile");
        const auto [primal, dual] = regularity_profile(k, {1.0, 2.0, 4.0, 8.0}, CoveringOptions{}, rp);
        const double c = std::max(primal.fitted_c(), dual.fitted_c());
        std::string counts;
        for (const auto* rep : {&primal, &dual})
            for (const auto& r : rep->rows) {
                counts += (counts.empty() ? "" : " ") + std::to_string(r.greedy_count);
                ck.expect(!r.budget_too_small, rep->direction + " at t=" + fmt(r.t) + ": pool does not cover held-out points");
            }
        ck.note("greedy counts (primal then dual over t=1,2,4,8): " + counts + "; fitted c " + fmt(c));
        ck.expect(c <= 50.0, "regularity fitted c " + fmt(c));
    }
    {
        // Sudakov: one constant across 10 instances.
        const int n = 6, N = 64;
        const std::vector<double> t_grid{0.5, 1.0, 2.0};
        double c = 0.0;
        for (int inst = 0; inst < 10; ++inst) {
            Stream r = rng.substream("sudakov").substream(static_cast<std::uint64_t>(inst));
            Stream rk = r.substream("polytope");
            const VertexPolytope k(sample(Distribution::make(Family::gaussian, n), N, rk));
            Stream rw = r.substream("width");
            const double w = mean_width(k, 10000, rw).value;
            CoverBody kb = CoverBody::polytope(k);
            CoverBody ball = CoverBody::ball(n, 1.0);
            CoveringOptions opt;
            opt.pool = 2048;
            Stream rc = r.substream("cover");
            const CoveringProfile p = covering_profile(kb, ball, t_grid, opt, rc);
            for (std::size_t i = 0; i < t_grid.size(); ++i)
                c = std::max(c, std::log(static_cast<double>(p.count[i])) / sudakov_envelope(w, n, t_grid[i]));
        }
        ck.note("Sudakov fitted c " + fmt(c));
        ck.expect(c <= 50.0, "Sudakov fitted c " + fmt(c));
    }
}

// 11 ------------------------------------------------------------------------
inline void determinism_checks(Checks& ck, const VerifyOptions& opt, const std::filesystem::path& dir)
{
    const std::vector<std::pair<std::string, std::vector<int>>> runs{{"widths", {256}}, {"quermass", {64, 128}},
                                                                     {"radii", {64}},   {"entropy", {32}}};
    for (const auto& [exp, grid] : runs) {
        ExperimentConfig c;
        c.experiment = exp;
        c.distribution = exp == "entropy" ? "cube" : "gaussian";
        c.n = exp == "entropy" ? 4 : 8;
        c.N_grid = grid;
        c.k_list = {1, 2};
        c.t_list = {1.0, 2.0};
        c.trials = 4;
        c.budgets.sphere = 2000;
        c.budgets.subspaces = 20;
        c.budgets.interior = 512;
        c.seed = opt.seed;
        std::vector<RunManifest> ms;
        for (int w : {1, 1, 3}) {
            c.workers = w;
            c.output_dir = (dir / ("det-" + exp + "-" + std::to_string(ms.size()))).string();
            ms.push_back(run(c));
        }
        for (std::size_t i = 1; i < ms.size(); ++i) {
            bool same = ms[i].outputs.size() == ms[0].outputs.size() && ms[i].config_hash == ms[0].config_hash;
            for (std::size_t f = 0; same && f < ms[0].outputs.size(); ++f) {
                const auto a = read_file(std::filesystem::path(dir / ("det-" + exp + "-0")) / ms[0].outputs[f].name);
                const auto b =
                    read_file(std::filesystem::path(dir / ("det-" + exp + "-" + std::to_string(i))) / ms[i].outputs[f].name);
                same = a == b && ms[i].outputs[f].sha256 == ms[0].outputs[f].sha256;
            }
            ck.expect(same, exp + (i == 1 ? " rerun" : " with 3 workers") + " differs");
        }
    }
}

} // namespace verify_detail

struct Criterion {
    int id;
    std::string title;
    std::function<void(verify_detail::Checks&, const VerifyOptions&, const std::filesystem::path&)> body;
};

inline std::vector<Criterion> acceptance_criteria()
{
    using namespace verify_detail;
    auto stream = [](const VerifyOptions& o, int id) { return Stream(o.seed).substream("acceptance").substream(static_cast<std::uint64_t>(id)); };
    return {
        {1, "exact geometry oracles", [=](Checks& c, const VerifyOptions& o, const auto&) { exact_geometry(c, stream(o, 1)); }},
        {2, "Dirichlet simplex moments", [=](Checks& c, const VerifyOptions& o, const auto&) { dirichlet_identity(c, stream(o, 2)); }},
        {3, "facet moment formula and bound chain", [=](Checks& c, const VerifyOptions& o, const auto&) { facet_formula(c, stream(o, 3)); }},
        {4, "isotropic constant", [=](Checks& c, const VerifyOptions& o, const auto&) { isotropic_constant_checks(c, stream(o, 4), o.workers); }},
        {5, "quermassintegrals of the ball surrogate", [=](Checks& c, const VerifyOptions& o, const auto&) { quermass_checks(c, stream(o, 5)); }},
        {6, "sqrt(log N) scaling of Q_k", [](Checks& c, const VerifyOptions& o, const auto& d) { scaling_checks(c, o, d); }},
        {7, "inclusion of c Z_q in K_N", [](Checks& c, const VerifyOptions& o, const auto& d) { inclusion_checks(c, o, d); }},
        {8, "mean outer radius", [=](Checks& c, const VerifyOptions& o, const auto&) { outer_radius_checks(c, stream(o, 8), o.workers); }},
        {9, "tail inequalities", [=](Checks& c, const VerifyOptions& o, const auto&) { tail_checks(c, stream(o, 9)); }},
        {10, "entropy profile", [=](Checks& c, const VerifyOptions& o, const auto&) { entropy_checks(c, stream(o, 10)); }},
        {11, "determinism", [](Checks& c, const VerifyOptions& o, const auto& d) { determinism_checks(c, o, d); }},
    };
}

/// Runs the selected criteria, printing one PASS/FAIL line each.
inline std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt, std::ostream& os)
{
    namespace fs = std::filesystem;
    fs::path dir = opt.scratch;
    const bool own_dir = dir.empty();
    if (own_dir)
        dir = fs::temp_directory_path() / ("randpoly-verify-" + std::to_string(::getpid()));
    fs::create_directories(dir);

    std::vector<CriterionResult> out;
    for (const auto& c : acceptance_criteria()) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), c.id) == opt.only.end())
            continue;
        CriterionResult r;
        r.id = c.id;
        r.title = c.title;
        verify_detail::Checks ck;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.body(ck, opt, dir);
            r.pass = ck.pass();
            r.detail = ck.detail();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = ck.detail() + "; error: " + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        os << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.title << " (" << verify_detail::fmt(r.seconds, 3)
           << " s) " << r.detail << std::endl;
        out.push_back(std::move(r));
    }
    if (own_dir)
        fs::remove_all(dir);
    return out;
}

inline bool all_passed(const std::vector<CriterionResult>& rs)
{
    return !rs.empty() && std::all_of(rs.begin(), rs.end(), [](const auto& r) { return r.pass; });
}

/// `run` with experiment = verify: the acceptance suite, recorded as CSV rows
/// (value 1 for pass) plus a manifest.
inline std::pair<RunManifest, bool> run_verify_experiment(const ExperimentConfig& c, std::ostream& os)
{
    validate(c);
    RunWriter out(c, default_output_root(c.output_dir));
    VerifyOptions opt;
    opt.seed = c.seed;
    opt.workers = c.workers;
    opt.scratch = out.dir() / "scratch";
    const auto results = run_acceptance(opt, os);
    std::filesystem::remove_all(opt.scratch);
    std::vector<Row> rows;
    for (const auto& r : results) {
        Row row;
        row.functional = "criterion";
        row.k = r.id;
        row.value = r.pass ? 1.0 : 0.0;
        row.seed = c.seed;
        rows.push_back(row);
    }
    out.add_csv("verify.csv", rows);
    const bool ok = all_passed(results);
    return {out.finish(true, 1), ok};
}

} // namespace randpoly::harness

#endif // RANDPOLY_HARNESS_VERIFY_HPP
