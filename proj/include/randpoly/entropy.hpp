#ifndef RANDPOLY_ENTROPY_HPP
#define RANDPOLY_ENTROPY_HPP

// Covering numbers N(A, tB) by greedy farthest-point nets, with the
// entropy envelopes they are compared against.

#include "randpoly/estimate.hpp"
#include "randpoly/functionals.hpp"
#include "randpoly/geometry.hpp"
#include "randpoly/polytope.hpp"
#include "randpoly/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace randpoly {

/// A symmetric convex body that is either a Euclidean ball r B_2^n or a
/// vertex polytope; gauge queries on the polytope go through an LP.
class CoverBody {
public:
    static CoverBody ball(int n, double r)
    {
        if (n < 1 || !(r > 0.0))
            throw std::invalid_argument("CoverBody::ball: need n >= 1 and r > 0");
        CoverBody b;
        b.n_ = n;
        b.r_ = r;
        return b;
    }

    static CoverBody polytope(const VertexPolytope& k)
    {
        CoverBody b;
        b.n_ = k.dim();
        b.poly_ = std::make_shared<VertexPolytope>(k);
        b.oracle_ = std::make_shared<GaugeOracle>(k);
        b.r_ = k.max_generator_norm();
        // In low dimension the facet description is small and gives the gauge
        // as a max of linear forms, far cheaper than an LP.
        if (k.dim() >= 2 && k.dim() <= 4) {
            try {
                const HullResult h = convex_hull(k.signed_points());
                if (h.facets.size() <= 4096) {
                    Eigen::MatrixXd forms(static_cast<Eigen::Index>(h.facets.size()), k.dim());
                    for (std::size_t i = 0; i < h.facets.size(); ++i)
                        forms.row(static_cast<Eigen::Index>(i)) = h.facets[i].normal.transpose() / h.facets[i].offset;
                    b.forms_ = std::make_shared<const Eigen::MatrixXd>(std::move(forms));
                }
            } catch (const DegenerateInput&) {
                // not full-dimensional; the LP path reports +infinity off the span
            }
        }
        return b;
    }

    [[nodiscard]] int dim() const noexcept { return n_; }
    [[nodiscard]] bool is_ball() const noexcept { return poly_ == nullptr; }

    /// Euclidean circumradius.
    [[nodiscard]] double outer_radius() const noexcept { return r_; }

    double radial(const Eigen::VectorXd& u)
    {
        if (is_ball())
            return r_ / u.norm();
        if (forms_)
            return 1.0 / (*forms_ * u).maxCoeff();
        return oracle_->radial(u);
    }

    double gauge(const Eigen::VectorXd& y)
    {
        if (is_ball())
            return y.norm() / r_;
        if (forms_)
            return std::max(0.0, (*forms_ * y).maxCoeff());
        return oracle_->gauge(y);
    }

    /// Gauges of the columns of y.
    Eigen::VectorXd gauge_columns(const Eigen::MatrixXd& y)
    {
        if (is_ball())
            return y.colwise().norm().transpose() / r_;
        if (forms_)
            return (*forms_ * y).colwise().maxCoeff().transpose().cwiseMax(0.0);
        Eigen::VectorXd g(y.cols());
        for (Eigen::Index j = 0; j < y.cols(); ++j)
            g(j) = oracle_->gauge(y.col(j));
        return g;
    }

    /// Rough flop count of one gauge evaluation.
    [[nodiscard]] double gauge_cost() const
    {
        if (is_ball())
            return n_;
        if (forms_)
            return static_cast<double>(forms_->rows()) * n_;
        return 50.0 * (2.0 * poly_->size() + 1.0) * (n_ + 1.0);
    }

    /// Volume when it can be computed exactly (balls always, polytopes for n <= 6).
    [[nodiscard]] std::optional<double> volume() const
    {
        if (is_ball())
            return std::exp(log_unit_ball_volume(n_) + n_ * std::log(r_));
        if (n_ <= 6)
            return volume_exact(*poly_);
        return std::nullopt;
    }

    /// Signed vertices of a polytope (rows); empty for a ball.
    [[nodiscard]] Eigen::MatrixXd vertices() const
    {
        return is_ball() ? Eigen::MatrixXd(0, n_) : poly_->signed_points();
    }

    /// Copy with its own LP workspace, for use on another thread.
    [[nodiscard]] CoverBody clone() const
    {
        return is_ball() ? ball(n_, r_) : polytope(*poly_);
    }

private:
    int n_ = 1;
    double r_ = 1.0;
    std::shared_ptr<VertexPolytope> poly_;
    std::shared_ptr<GaugeOracle> oracle_;
    std::shared_ptr<const Eigen::MatrixXd> forms_;
};

struct CoveringOptions {
    std::size_t pool = 4096;
    std::size_t test_points = 256;
    /// Flop budget for the all-pairs set-cover pass run next to the
    /// farthest-point traversal; 0 disables it.
    double set_cover_flops = 2e9;
};

/// Greedy counts for one (A, B) pair over a t-grid.
struct CoveringProfile {
    std::vector<double> t;
    std::vector<std::size_t> count;        // net size at each t: estimate of N(A, tB), bound on N(A, 2tB)
    std::vector<double> uncovered;         // fraction of fresh points of A farther than 2t from the net
    std::vector<bool> budget_too_small;
    std::size_t pool_size = 0;
};

namespace detail {

/// Pool of points of A: the origin, the vertices of A when there are few of
/// them, then alternately r(u)u and rho r(u)u with u uniform on the sphere
/// and rho = U^{1/n}.
inline std::vector<Eigen::VectorXd> covering_pool(CoverBody& a, std::size_t size, Stream& rng, bool with_vertices)
{
    const int n = a.dim();
    std::vector<Eigen::VectorXd> pool;
    pool.reserve(size);
    pool.emplace_back(Eigen::VectorXd::Zero(n));
    if (with_vertices) {
        const Eigen::MatrixXd v = a.vertices();
        if (static_cast<std::size_t>(v.rows()) <= size / 4)
            for (Eigen::Index i = 0; i < v.rows(); ++i)
                pool.emplace_back(v.row(i).transpose());
    }
    for (std::size_t i = pool.size(); i < size; ++i) {
        const Eigen::VectorXd u = sample_sphere(n, rng);
        double r = a.radial(u);
        if (i % 2 == 0)
            r *= std::pow(rng.uniform(), 1.0 / n);
        pool.emplace_back(r * u);
    }
    return pool;
}

} // namespace detail

/// Farthest-point traversal of a pool of A under the gauge of B, stopped
/// once every pool point is within min(t_grid) of the net. A prefix of the
/// traversal is the net for each larger t, so counts are nonincreasing in t.
inline CoveringProfile covering_profile(CoverBody& a, CoverBody& b, std::vector<double> t_grid,
                                        const CoveringOptions& opt, Stream& rng)
{
    if (a.dim() != b.dim())
        throw DimensionMismatch("covering_profile: bodies of different dimension");
    if (t_grid.empty())
        throw std::invalid_argument("covering_profile: empty t grid");
    for (double t : t_grid)
        if (!(t > 0.0))
            throw std::invalid_argument("covering_profile: t must be positive");
    if (opt.pool < 2)
        throw std::invalid_argument("covering_profile: pool must hold at least 2 points");

    Stream pool_rng = rng.substream("pool");
    Stream test_rng = rng.substream("test");
    const std::vector<Eigen::VectorXd> pool = detail::covering_pool(a, opt.pool, pool_rng, true);
    // Boundary points sit at gauge distance exactly t from a center in the
    // tight cases; a relative slack keeps round-off from adding centers.
    constexpr double slack = 1.0 + 1e-9;
    const double t_min = *std::min_element(t_grid.begin(), t_grid.end()) * slack;
    const double rb = b.outer_radius();
    const std::size_t m = pool.size();
    const std::size_t cap = m / 2;

    // Lazy farthest-point: d[p] is exact over the first next[p] centers.
    std::vector<double> d(m, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> next(m, 0);
    std::vector<std::size_t> centers{0};
    std::vector<double> radii;   // radii[i]: distance of center i+1 when it was chosen
    d[0] = 0.0;
    next[0] = 1;
    // Ties in gauge distance (common: from the origin every boundary point of
    // A is equally far) go to the point with the larger Euclidean norm.
    struct Item {
        double key;
        double norm;
        std::size_t p;
        double d;
    };
    const double quantum = t_min * 1e-9;
    auto item = [&](std::size_t p) { return Item{std::floor(d[p] / quantum), pool[p].norm(), p, d[p]}; };
    auto cmp = [](const Item& x, const Item& y) {
        if (x.key != y.key)
            return x.key < y.key;
        if (x.norm != y.norm)
            return x.norm < y.norm;
        return x.p > y.p;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
    for (std::size_t p = 1; p < m; ++p)
        heap.push(item(p));
    bool capped = false;
    while (!heap.empty()) {
        const auto [key, norm, p, dp] = heap.top();
        heap.pop();
        if (dp != d[p])
            continue;
        if (next[p] < centers.size()) {
            for (std::size_t c = next[p]; c < centers.size(); ++c) {
                const Eigen::VectorXd diff = pool[p] - pool[centers[c]];
                if (diff.norm() / rb >= d[p])
                    continue;   // cannot improve
                d[p] = std::min(d[p], b.gauge(diff));
            }
            next[p] = centers.size();
            heap.push(item(p));
            continue;
        }
        if (d[p] <= t_min)
            break;
        if (centers.size() >= cap) {
            capped = true;
            radii.push_back(d[p]);
            break;
        }
        radii.push_back(d[p]);
        centers.push_back(p);
        d[p] = 0.0;
        next[p] = centers.size();
    }

    // For each t: the traversal prefix, with centers whose pool points are
    // all covered by other centers removed. A net for a smaller t is also a
    // net for a larger one, so the smaller of the two is kept.
    std::unordered_map<std::uint64_t, double> dist_cache;
    auto dist = [&](std::size_t p, std::size_t c) {
        const std::uint64_t key = static_cast<std::uint64_t>(p) * m + c;
        auto it = dist_cache.find(key);
        if (it != dist_cache.end())
            return it->second;
        const double v = b.gauge(pool[p] - pool[c]);
        dist_cache.emplace(key, v);
        return v;
    };
    auto prune = [&](std::vector<std::size_t> net, double t) {
        std::vector<std::vector<std::size_t>> covers(net.size());
        std::vector<int> depth(m, 0);
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t i = 0; i < net.size(); ++i) {
                if ((pool[p] - pool[net[i]]).norm() / rb > t)
                    continue;
                if (p == net[i] || dist(p, net[i]) <= t) {
                    covers[i].push_back(p);
                    ++depth[p];
                }
            }
        std::vector<bool> keep(net.size(), true);
        for (std::size_t i = net.size(); i-- > 0;) {
            const bool redundant = std::all_of(covers[i].begin(), covers[i].end(), [&](std::size_t p) { return depth[p] >= 2; });
            if (redundant && net.size() > 1) {
                keep[i] = false;
                for (std::size_t p : covers[i])
                    --depth[p];
            }
        }
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < net.size(); ++i)
            if (keep[i])
                out.push_back(net[i]);
        return out;
    };

    // Greedy set cover over the whole pool, when all pairwise gauges are
    // affordable; it often beats the traversal on regular bodies.
    auto set_cover = [&](double t) {
        std::vector<std::vector<std::size_t>> nbr(m);
        Eigen::MatrixXd pts(a.dim(), static_cast<Eigen::Index>(m));
        for (std::size_t p = 0; p < m; ++p)
            pts.col(static_cast<Eigen::Index>(p)) = pool[p];
        for (std::size_t c = 0; c < m; ++c) {
            const Eigen::VectorXd g = b.gauge_columns(pts.colwise() - pool[c]);
            for (std::size_t p = 0; p < m; ++p)
                if (p == c || g(static_cast<Eigen::Index>(p)) <= t)
                    nbr[c].push_back(p);
        }
        std::vector<bool> done(m, false);
        std::size_t left = m;
        std::vector<std::size_t> net;
        std::priority_queue<std::pair<std::size_t, std::size_t>> gain;   // (gain, -index) via ~index
        for (std::size_t c = 0; c < m; ++c)
            gain.emplace(nbr[c].size(), ~c);
        while (left > 0 && !gain.empty()) {
            const auto [g, nc] = gain.top();
            gain.pop();
            const std::size_t c = ~nc;
            const std::size_t fresh_gain = static_cast<std::size_t>(
                std::count_if(nbr[c].begin(), nbr[c].end(), [&](std::size_t p) { return !done[p]; }));
            if (fresh_gain < g) {
                gain.emplace(fresh_gain, nc);
                continue;
            }
            if (fresh_gain == 0)
                break;
            net.push_back(c);
            for (std::size_t p : nbr[c])
                if (!done[p]) {
                    done[p] = true;
                    --left;
                }
        }
        return net;
    };
    const bool run_set_cover =
        opt.set_cover_flops > 0.0 && static_cast<double>(m) * static_cast<double>(m) * b.gauge_cost() <= opt.set_cover_flops;

    CoveringProfile out;
    out.pool_size = m;
    std::sort(t_grid.begin(), t_grid.end());
    const std::vector<Eigen::VectorXd> fresh = detail::covering_pool(a, opt.test_points + 1, test_rng, false);
    std::vector<std::size_t> prev;
    for (const double t_nominal : t_grid) {
        const double t = t_nominal * slack;
        // radii is nonincreasing; the traversal net for t is the prefix of
        // centers chosen while the farthest pool point was beyond t.
        std::size_t count = 1;
        while (count - 1 < radii.size() && radii[count - 1] > t)
            ++count;
        const bool over = capped && count - 1 >= radii.size();
        count = std::min(count, centers.size());
        std::vector<std::size_t> net =
            over ? std::vector<std::size_t>(centers.begin(), centers.begin() + static_cast<std::ptrdiff_t>(count))
                 : prune({centers.begin(), centers.begin() + static_cast<std::ptrdiff_t>(count)}, t);
        if (run_set_cover && net.size() > 1) {
            std::vector<std::size_t> sc = set_cover(t);
            if (sc.size() < net.size())
                net = std::move(sc);
        }
        if (!prev.empty() && prev.size() < net.size())
            net = prev;
        prev = net;
        std::size_t miss = 0;
        for (std::size_t i = 1; i < fresh.size(); ++i) {
            std::vector<std::pair<double, std::size_t>> byd;
            for (std::size_t c : net)
                byd.emplace_back((fresh[i] - pool[c]).norm(), c);
            std::sort(byd.begin(), byd.end());
            bool covered = false;
            for (const auto& [e, c] : byd) {
                if (e / rb > 2.0 * t)
                    break;
                if (b.gauge(fresh[i] - pool[c]) <= 2.0 * t) {
                    covered = true;
                    break;
                }
            }
            if (!covered)
                ++miss;
        }
        const double frac = fresh.size() > 1 ? static_cast<double>(miss) / static_cast<double>(fresh.size() - 1) : 0.0;
        out.t.push_back(t_nominal);
        out.count.push_back(net.size());
        out.uncovered.push_back(frac);
        out.budget_too_small.push_back(over || miss > 0);
    }
    return out;
}

struct CoveringResult {
    std::size_t count = 0;
    bool budget_too_small = false;
};

/// Greedy net size for N(A, tB) on a pool of `budget` points of A.
inline CoveringResult covering_upper(const VertexPolytope& a, const VertexPolytope& b, double t, std::size_t budget,
                                     Stream& rng)
{
    CoverBody ca = CoverBody::polytope(a);
    CoverBody cb = CoverBody::polytope(b);
    const CoveringProfile p = covering_profile(ca, cb, {t}, {budget, 256}, rng);
    return {p.count.front(), p.budget_too_small.front()};
}

/// n (w/t)^2.
inline double sudakov_envelope(double w, int n, double t) { return n * (w / t) * (w / t); }

/// n (log q)^2 log(1+t) / t.
inline double dual_entropy_envelope(int n, double q, double t)
{
    const double lq = std::log(q);
    return n * lq * lq * std::log1p(t) / t;
}

/// n (log n)^2 log(1+t) / t.
inline double regularity_envelope(int n, double t) { return dual_entropy_envelope(n, static_cast<double>(n), t); }

struct CoveringRow {
    double t = 0.0;
    std::size_t greedy_count = 0;
    double log_upper = 0.0;
    double log_lower = std::numeric_limits<double>::quiet_NaN();   // log(|A| / |tB|), clipped at 0
    double envelope = 0.0;          // n (log n)^2 log(1+t) / t
    double small_n_envelope = 0.0;  // n / t^2
    double large_n_envelope = 0.0;  // n log^4 n / t^2
    double fitted_c = 0.0;          // log_upper / envelope
    double uncovered = 0.0;
    bool budget_too_small = false;
};

struct CoveringReport {
    std::string direction;
    std::vector<CoveringRow> rows;

    [[nodiscard]] double fitted_c() const
    {
        double c = 0.0;
        for (const auto& r : rows)
            c = std::max(c, r.fitted_c);
        return c;
    }
};

inline CoveringReport make_covering_report(std::string direction, const CoveringProfile& p, int n,
                                           std::optional<double> vol_a, std::optional<double> vol_b)
{
    CoveringReport rep{std::move(direction), {}};
    const double ln = std::log(static_cast<double>(n));
    for (std::size_t i = 0; i < p.t.size(); ++i) {
        CoveringRow r;
        r.t = p.t[i];
        r.greedy_count = p.count[i];
        r.log_upper = std::log(static_cast<double>(p.count[i]));
        if (vol_a && vol_b)
            r.log_lower = std::max(0.0, std::log(*vol_a) - std::log(*vol_b) - n * std::log(r.t));
        r.envelope = regularity_envelope(n, r.t);
        r.small_n_envelope = n / (r.t * r.t);
        r.large_n_envelope = n * std::pow(ln, 4) / (r.t * r.t);
        r.fitted_c = r.log_upper / r.envelope;
        r.uncovered = p.uncovered[i];
        r.budget_too_small = p.budget_too_small[i];
        rep.rows.push_back(r);
    }
    return rep;
}

/// Covering profiles of K_N by t r_N B_2^n and of r_N B_2^n by t K_N, with
/// r_N = sqrt(log N).
inline std::pair<CoveringReport, CoveringReport> regularity_profile(const VertexPolytope& k,
                                                                     const std::vector<double>& t_grid,
                                                                     const CoveringOptions& opt, Stream& rng)
{
    const int n = k.dim();
    const double rn = std::sqrt(std::log(static_cast<double>(k.size())));
    if (!(rn > 0.0))
        throw std::invalid_argument("regularity_profile: need N >= 2");
    CoverBody kb = CoverBody::polytope(k);
    CoverBody ball = CoverBody::ball(n, rn);
    const auto vk = kb.volume();
    const auto vb = ball.volume();

    Stream r1 = rng.substream("primal");
    const CoveringProfile p1 = covering_profile(kb, ball, t_grid, opt, r1);
    Stream r2 = rng.substream("dual");
    const CoveringProfile p2 = covering_profile(ball, kb, t_grid, opt, r2);
    return {make_covering_report("K_N by t r_N B", p1, n, vk, vb),
            make_covering_report("r_N B by t K_N", p2, n, vb, vk)};
}

struct SectionBoundReport {
    int k = 0;
    double envelope = 0.0;      // sqrt(log N) k / (n log^3 n)
    std::vector<double> radii;  // section radius lower bounds, one per frame
    double min_ratio = 0.0;     // min radius / envelope: the fitted constant
};

/// Section radii of K_N over Haar k-frames against sqrt(log N) k / (n log^3 n).
inline SectionBoundReport section_lower_bound_check(const VertexPolytope& k, int rank, std::size_t frames,
                                                    std::size_t directions, Stream& rng)
{
    const double n = k.dim();
    const double ln = std::log(n);
    SectionBoundReport rep;
    rep.k = rank;
    rep.envelope = std::sqrt(std::log(static_cast<double>(k.size()))) * rank / (n * ln * ln * ln);
    rep.radii = section_radii(k, rank, frames, directions, rng);
    const double rmin = *std::min_element(rep.radii.begin(), rep.radii.end());
    rep.min_ratio = rmin / rep.envelope;
    return rep;
}

} // namespace randpoly

#endif // RANDPOLY_ENTROPY_HPP
