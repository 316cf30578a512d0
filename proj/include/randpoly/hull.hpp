#ifndef RANDPOLY_HULL_HPP
#define RANDPOLY_HULL_HPP

// Incremental beneath-beyond convex hull in R^d (d >= 2) with conflict
// lists: every unprocessed point is attached to one facet it sees, and the
// furthest such point is inserted next. Facets are simplices; coplanar
// points are treated as "beneath", which triangulates non-simplicial faces.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace randpoly {

class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HullFacet {
    std::vector<int> vertices;   // d point indices
    Eigen::VectorXd normal;      // outward unit normal
    double offset = 0.0;         // normal . v for every vertex v
};

struct HullResult {
    int dim = 0;
    std::vector<HullFacet> facets;
    Eigen::VectorXd interior;    // a strictly interior reference point
    double volume = 0.0;
    /// Set when a point was found on (within eps of) a facet hyperplane
    /// adjacent to a visible region, i.e. the input was not in general position.
    bool coplanar_encountered = false;
};

namespace detail {

class QuickHull {
public:
    QuickHull(const Eigen::MatrixXd& points, double rel_eps)
        : n_(static_cast<int>(points.rows())), d_(static_cast<int>(points.cols())), pts_(points.size())
    {
        if (d_ < 2)
            throw std::invalid_argument("convex_hull: dimension must be >= 2");
        if (n_ < d_ + 1)
            throw DegenerateInput("convex_hull: fewer than d+1 points");
        double scale = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < d_; ++j) {
                pts_[static_cast<std::size_t>(i) * d_ + j] = points(i, j);
                scale = std::max(scale, std::abs(points(i, j)));
            }
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw DegenerateInput("convex_hull: points are all zero or non-finite");
        eps_ = rel_eps * scale;
    }

    HullResult run()
    {
        const std::vector<int> simplex = initial_simplex();
        ref_.assign(d_, 0.0);
        for (int v : simplex)
            for (int j = 0; j < d_; ++j)
                ref_[j] += point(v)[j] / (d_ + 1);

        // Facet i omits simplex vertex i; its neighbour across the ridge
        // opposite simplex vertex j is facet j.
        for (int i = 0; i <= d_; ++i) {
            Face f;
            for (int j = 0; j <= d_; ++j)
                if (j != i) {
                    f.verts.push_back(simplex[j]);
                    f.nbr.push_back(j);
                }
            fit_plane(f);
            faces_.push_back(std::move(f));
        }

        std::vector<char> in_simplex(n_, 0);
        for (int v : simplex)
            in_simplex[v] = 1;
        std::vector<int> all;
        for (int i = 0; i < n_; ++i)
            if (!in_simplex[i])
                all.push_back(i);
        std::vector<int> first;
        for (int i = 0; i <= d_; ++i)
            first.push_back(i);
        assign(all, first);

        std::vector<int> stack;
        for (int i = 0; i <= d_; ++i)
            if (!faces_[i].outside.empty())
                stack.push_back(i);
        while (!stack.empty()) {
            const int f = stack.back();
            stack.pop_back();
            if (!faces_[f].alive || faces_[f].outside.empty())
                continue;
            for (int nf : insert(faces_[f].furthest, f))
                if (!faces_[nf].outside.empty())
                    stack.push_back(nf);
        }
        return collect();
    }

private:
    struct Face {
        std::vector<int> verts;
        std::vector<int> nbr;
        std::vector<double> normal;
        double offset = 0.0;
        std::vector<int> outside;
        int furthest = -1;
        double furthest_dist = 0.0;
        bool alive = true;
        bool visible = false;
        long mark = -1;
    };

    const double* point(int i) const { return &pts_[static_cast<std::size_t>(i) * d_]; }

    double distance(const Face& f, int p) const
    {
        const double* x = point(p);
        double s = 0.0;
        for (int j = 0; j < d_; ++j)
            s += f.normal[j] * x[j];
        return s - f.offset;
    }

    std::vector<int> initial_simplex() const
    {
        std::vector<int> chosen;
        int i0 = 0;
        for (int i = 1; i < n_; ++i)
            if (point(i)[0] < point(i0)[0])
                i0 = i;
        chosen.push_back(i0);
        std::vector<Eigen::VectorXd> dirs;
        const Eigen::Map<const Eigen::VectorXd> p0(point(i0), d_);
        for (int m = 1; m <= d_; ++m) {
            int best = -1;
            double best_d = -1.0;
            for (int i = 0; i < n_; ++i) {
                Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(point(i), d_) - p0;
                for (const auto& u : dirs)
                    v -= u.dot(v) * u;
                const double dist = v.norm();
                if (dist > best_d) {
                    best_d = dist;
                    best = i;
                }
            }
            if (best_d <= 10.0 * eps_)
                throw DegenerateInput("convex_hull: points are not full-dimensional (affine rank " +
                                      std::to_string(m - 1) + " < " + std::to_string(d_) + ")");
            Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(point(best), d_) - p0;
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& u : dirs)
                    v -= u.dot(v) * u;
            dirs.push_back(v.normalized());
            chosen.push_back(best);
        }
        return chosen;
    }

    void fit_plane(Face& f) const
    {
        Eigen::MatrixXd e(d_, d_ - 1);
        const Eigen::Map<const Eigen::VectorXd> v0(point(f.verts[0]), d_);
        for (int k = 1; k < d_; ++k)
            e.col(k - 1) = Eigen::Map<const Eigen::VectorXd>(point(f.verts[k]), d_) - v0;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(e);
        Eigen::VectorXd normal = qr.householderQ() * Eigen::VectorXd::Unit(d_, d_ - 1);
        double off = normal.dot(v0);
        double ref_dot = 0.0;
        for (int j = 0; j < d_; ++j)
            ref_dot += normal(j) * ref_[j];
        if (ref_dot > off) {
            normal = -normal;
            off = -off;
        }
        f.normal.assign(normal.data(), normal.data() + d_);
        f.offset = off;
    }

    void assign(const std::vector<int>& candidates, const std::vector<int>& targets)
    {
        for (int p : candidates) {
            for (int t : targets) {
                Face& f = faces_[t];
                const double dist = distance(f, p);
                if (dist > eps_) {
                    f.outside.push_back(p);
                    if (dist > f.furthest_dist) {
                        f.furthest_dist = dist;
                        f.furthest = p;
                    }
                    break;
                }
            }
        }
    }

    std::vector<int> insert(int p, int seed)
    {
        ++iter_;
        std::vector<int> visible;
        std::vector<std::pair<int, int>> horizon;   // (visible face, ridge slot)
        std::vector<int> stack{seed};
        faces_[seed].mark = iter_;
        faces_[seed].visible = true;
        while (!stack.empty()) {
            const int g = stack.back();
            stack.pop_back();
            visible.push_back(g);
            for (int j = 0; j < d_; ++j) {
                const int h = faces_[g].nbr[j];
                Face& fh = faces_[h];
                if (fh.mark != iter_) {
                    fh.mark = iter_;
                    const double dist = distance(fh, p);
                    fh.visible = dist > eps_;
                    if (fh.visible)
                        stack.push_back(h);
                    else if (dist > -eps_)
                        coplanar_ = true;
                }
                if (!fh.visible)
                    horizon.emplace_back(g, j);
            }
        }

        std::vector<int> created;
        std::map<std::vector<int>, std::pair<int, int>> open_ridges;
        for (auto [g, j] : horizon) {
            Face nf;
            nf.verts = faces_[g].verts;
            nf.verts[j] = p;
            nf.nbr.assign(d_, -1);
            const int h = faces_[g].nbr[j];
            const int id = static_cast<int>(faces_.size());
            nf.nbr[j] = h;
            for (int k = 0; k < d_; ++k)
                if (faces_[h].nbr[k] == g) {
                    faces_[h].nbr[k] = id;
                    break;
                }
            fit_plane(nf);
            for (int i = 0; i < d_; ++i) {
                if (i == j)
                    continue;
                std::vector<int> key;
                key.reserve(d_ - 1);
                for (int k = 0; k < d_; ++k)
                    if (k != i)
                        key.push_back(nf.verts[k]);
                std::sort(key.begin(), key.end());
                auto it = open_ridges.find(key);
                if (it == open_ridges.end()) {
                    open_ridges.emplace(std::move(key), std::make_pair(id, i));
                } else {
                    const auto [other, slot] = it->second;
                    nf.nbr[i] = other;
                    faces_[other].nbr[slot] = id;
                    open_ridges.erase(it);
                }
            }
            faces_.push_back(std::move(nf));
            created.push_back(id);
        }
        if (!open_ridges.empty())
            throw std::runtime_error("convex_hull: horizon is not a closed ridge cycle (numerical failure)");

        std::vector<int> orphans;
        for (int g : visible) {
            Face& f = faces_[g];
            f.alive = false;
            for (int q : f.outside)
                if (q != p)
                    orphans.push_back(q);
            f.outside.clear();
            f.outside.shrink_to_fit();
        }
        assign(orphans, created);
        return created;
    }

    HullResult collect() const
    {
        HullResult res;
        res.dim = d_;
        res.coplanar_encountered = coplanar_;
        res.interior = Eigen::Map<const Eigen::VectorXd>(ref_.data(), d_);
        double fact = 1.0;
        for (int k = 2; k <= d_; ++k)
            fact *= k;
        Eigen::MatrixXd m(d_, d_);
        for (const Face& f : faces_) {
            if (!f.alive)
                continue;
            HullFacet hf;
            hf.vertices = f.verts;
            hf.normal = Eigen::Map<const Eigen::VectorXd>(f.normal.data(), d_);
            hf.offset = f.offset;
            for (int k = 0; k < d_; ++k)
                m.col(k) = Eigen::Map<const Eigen::VectorXd>(point(f.verts[k]), d_) - res.interior;
            res.volume += std::abs(m.determinant()) / fact;
            res.facets.push_back(std::move(hf));
        }
        return res;
    }

    int n_, d_;
    std::vector<double> pts_;
    double eps_ = 0.0;
    std::vector<double> ref_;
    std::vector<Face> faces_;
    long iter_ = 0;
    bool coplanar_ = false;
};

} // namespace detail

/// Convex hull of the rows of `points` (an m x d matrix, d >= 2).
/// Throws DegenerateInput when the points do not span R^d.
inline HullResult convex_hull(const Eigen::MatrixXd& points, double rel_eps = 1e-11)
{
    detail::QuickHull qh(points, rel_eps);
    return qh.run();
}

/// Volume of conv(rows of points); handles d = 1 directly.
inline double hull_volume(const Eigen::MatrixXd& points)
{
    if (points.cols() == 1)
        return points.maxCoeff() - points.minCoeff();
    return convex_hull(points).volume;
}

/// Volume of conv{+-y_j} for the rows y_j of an m x d matrix. Points inside
/// the inscribed ball of a hull of the longest rows are discarded first.
inline double symmetric_hull_volume(const Eigen::MatrixXd& half, std::size_t pilot = 4096)
{
    const auto m = static_cast<std::size_t>(half.rows());
    const auto d = half.cols();
    if (d == 1)
        return 2.0 * half.cwiseAbs().maxCoeff();
    auto with_mirror = [&](const std::vector<Eigen::Index>& rows) {
        Eigen::MatrixXd s(2 * rows.size(), d);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            s.row(static_cast<Eigen::Index>(i)) = half.row(rows[i]);
            s.row(static_cast<Eigen::Index>(i + rows.size())) = -half.row(rows[i]);
        }
        return s;
    };
    const Eigen::VectorXd norms = half.rowwise().norm();
    std::vector<Eigen::Index> order(m);
    for (std::size_t i = 0; i < m; ++i)
        order[i] = static_cast<Eigen::Index>(i);
    if (m <= pilot)
        return convex_hull(with_mirror(order)).volume;

    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pilot), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return norms(a) > norms(b) || (norms(a) == norms(b) && a < b); });
    std::vector<Eigen::Index> top(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pilot));
    std::sort(top.begin(), top.end());
    double inradius = std::numeric_limits<double>::infinity();
    try {
        for (const auto& f : convex_hull(with_mirror(top)).facets)
            inradius = std::min(inradius, f.offset);
    } catch (const DegenerateInput&) {
        inradius = 0.0;
    }
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < m; ++i)
        if (norms(static_cast<Eigen::Index>(i)) > inradius)
            keep.push_back(static_cast<Eigen::Index>(i));
    if (keep.size() < static_cast<std::size_t>(d))
        keep = top;
    return convex_hull(with_mirror(keep)).volume;
}

} // namespace randpoly

#endif // RANDPOLY_HULL_HPP
