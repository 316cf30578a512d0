#ifndef RANDPOLY_LP_HPP
#define RANDPOLY_LP_HPP

// Dense two-phase primal simplex for problems in standard form
//
//     maximize c.x  subject to  A x = b,  x >= 0.
//
// Pivoting uses Dantzig's rule until a pivot budget is spent, then switches
// to Bland's rule, which cannot cycle. All choices are deterministic, so the
// same input always produces bit-identical output.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace randpoly::lp {

struct StandardFormLP {
    Eigen::MatrixXd A;   // m x d
    Eigen::VectorXd b;   // m
    Eigen::VectorXd c;   // d
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
    Status status = Status::Infeasible;
    double value = 0.0;
    Eigen::VectorXd solution;
    /// Sum of artificial variables at the end of phase one (the infeasibility
    /// certificate; positive and > tol when status == Infeasible).
    double phase_one_objective = 0.0;
    std::size_t pivots = 0;
};

struct Options {
    double tol = 1e-9;
    double pivot_floor = 1e-12;
    /// Pivot count after which Bland's rule is used; 0 = 2*(m+d).
    std::size_t bland_after = 0;
    /// Hard cap on pivots; 0 = 50*(m+d) + 1000.
    std::size_t max_pivots = 0;
};

class CycleLimitExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalBreakdown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

class Tableau {
public:
    Tableau(const StandardFormLP& lp, const Options& opt)
        : m_(static_cast<std::size_t>(lp.A.rows())),
          d_(static_cast<std::size_t>(lp.A.cols())),
          width_(d_ + m_ + 1),
          opt_(opt),
          t_((m_ + 1) * width_, 0.0),
          basis_(m_),
          row_alive_(m_, true)
    {
        for (std::size_t i = 0; i < m_; ++i) {
            const double sgn = lp.b(static_cast<Eigen::Index>(i)) < 0 ? -1.0 : 1.0;
            double* row = &t_[i * width_];
            for (std::size_t j = 0; j < d_; ++j)
                row[j] = sgn * lp.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            row[d_ + i] = 1.0;
            row[width_ - 1] = sgn * lp.b(static_cast<Eigen::Index>(i));
            basis_[i] = d_ + i;
        }
        const std::size_t scale = m_ + d_;
        bland_after_ = opt.bland_after ? opt.bland_after : 2 * scale;
        max_pivots_ = opt.max_pivots ? opt.max_pivots : 50 * scale + 1000;
    }

    Result run(const StandardFormLP& lp)
    {
        Result res;
        // Phase one: maximize -(sum of artificials).
        double* obj = objective_row();
        std::fill(obj, obj + width_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const double* row = &t_[i * width_];
            for (std::size_t j = 0; j < d_; ++j)
                obj[j] += row[j];
            obj[width_ - 1] += row[width_ - 1];
        }
        iterate(/*phase_one=*/true);
        const double infeas = obj[width_ - 1];
        res.phase_one_objective = infeas;
        const double bmax = lp.b.size() ? lp.b.cwiseAbs().maxCoeff() : 0.0;
        if (infeas > opt_.tol * (1.0 + bmax)) {
            res.status = Status::Infeasible;
            res.pivots = pivots_;
            return res;
        }
        drive_out_artificials();

        // Phase two.
        std::fill(obj, obj + width_, 0.0);
        for (std::size_t j = 0; j < d_; ++j)
            obj[j] = lp.c(static_cast<Eigen::Index>(j));
        for (std::size_t i = 0; i < m_; ++i) {
            if (!row_alive_[i] || basis_[i] >= d_)
                continue;
            const double cb = lp.c(static_cast<Eigen::Index>(basis_[i]));
            if (cb == 0.0)
                continue;
            const double* row = &t_[i * width_];
            for (std::size_t j = 0; j < width_; ++j)
                obj[j] -= cb * row[j];
        }
        if (!iterate(/*phase_one=*/false)) {
            res.status = Status::Unbounded;
            res.pivots = pivots_;
            return res;
        }

        res.status = Status::Optimal;
        res.solution = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d_));
        for (std::size_t i = 0; i < m_; ++i)
            if (row_alive_[i] && basis_[i] < d_)
                res.solution(static_cast<Eigen::Index>(basis_[i])) = std::max(0.0, t_[i * width_ + width_ - 1]);
        res.value = lp.c.dot(res.solution);
        res.pivots = pivots_;
        return res;
    }

private:
    double* objective_row() { return &t_[m_ * width_]; }

    // Returns false when the problem is unbounded.
    bool iterate(bool phase_one)
    {
        double* obj = objective_row();
        for (;;) {
            const bool bland = pivots_ >= bland_after_;
            // Entering column: artificial columns never re-enter.
            std::size_t enter = d_;
            double best = opt_.tol;
            for (std::size_t j = 0; j < d_; ++j) {
                if (obj[j] > best) {
                    enter = j;
                    if (bland)
                        break;
                    best = obj[j];
                }
            }
            if (enter == d_)
                return true;

            std::size_t leave = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            bool tiny_positive = false;
            for (std::size_t i = 0; i < m_; ++i) {
                if (!row_alive_[i])
                    continue;
                const double a = t_[i * width_ + enter];
                if (a <= opt_.pivot_floor) {
                    if (a > 0.0)
                        tiny_positive = true;
                    continue;
                }
                const double ratio = t_[i * width_ + width_ - 1] / a;
                if (leave == m_ || ratio < best_ratio - opt_.pivot_floor) {
                    leave = i;
                    best_ratio = ratio;
                } else if (ratio <= best_ratio + opt_.pivot_floor) {
                    // Tie: Bland prefers the smallest basic index, Dantzig the
                    // largest pivot magnitude.
                    const double cur = t_[leave * width_ + enter];
                    if (bland ? basis_[i] < basis_[leave] : a > cur) {
                        leave = i;
                        best_ratio = std::min(best_ratio, ratio);
                    }
                }
            }
            if (leave == m_) {
                if (tiny_positive)
                    throw NumericalBreakdown("simplex: entering column has only sub-floor pivots");
                if (phase_one)
                    throw NumericalBreakdown("simplex: unbounded phase-one problem");
                return false;
            }
            pivot(leave, enter);
            if (++pivots_ > max_pivots_)
                throw CycleLimitExceeded("simplex: pivot cap of " + std::to_string(max_pivots_) + " exceeded");
        }
    }

    void pivot(std::size_t r, std::size_t s)
    {
        double* prow = &t_[r * width_];
        const double inv = 1.0 / prow[s];
        for (std::size_t j = 0; j < width_; ++j)
            prow[j] *= inv;
        prow[s] = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r)
                continue;
            double* row = &t_[i * width_];
            const double f = row[s];
            if (f == 0.0)
                continue;
            for (std::size_t j = 0; j < width_; ++j)
                row[j] -= f * prow[j];
            row[s] = 0.0;
        }
        basis_[r] = s;
    }

    void drive_out_artificials()
    {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < d_)
                continue;
            const double* row = &t_[i * width_];
            std::size_t col = d_;
            double mag = 1e3 * opt_.pivot_floor;
            for (std::size_t j = 0; j < d_; ++j) {
                if (std::abs(row[j]) > mag) {
                    mag = std::abs(row[j]);
                    col = j;
                }
            }
            if (col == d_) {
                row_alive_[i] = false;   // redundant constraint
                continue;
            }
            pivot(i, col);
            ++pivots_;
        }
    }

    std::size_t m_, d_, width_;
    Options opt_;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
    std::vector<bool> row_alive_;
    std::size_t pivots_ = 0;
    std::size_t bland_after_ = 0;
    std::size_t max_pivots_ = 0;
};

} // namespace detail

/// Solves a standard-form LP. Throws std::invalid_argument on malformed input,
/// CycleLimitExceeded when the pivot cap is hit and NumericalBreakdown when no
/// usable pivot remains.
inline Result solve(const StandardFormLP& lp, const Options& opt = {})
{
    if (!(opt.tol > 0.0))
        throw std::invalid_argument("lp::solve: tol must be positive");
    if (lp.b.size() != lp.A.rows() || lp.c.size() != lp.A.cols())
        throw std::invalid_argument("lp::solve: dimension mismatch");
    if (!lp.A.allFinite() || !lp.b.allFinite() || !lp.c.allFinite())
        throw std::invalid_argument("lp::solve: non-finite data");
    detail::Tableau tab(lp, opt);
    return tab.run(lp);
}

} // namespace randpoly::lp

#endif // RANDPOLY_LP_HPP
