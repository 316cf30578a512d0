#ifndef RANDPOLY_ESTIMATE_HPP
#define RANDPOLY_ESTIMATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace randpoly {

/// A Monte-Carlo quantity with its standard error and provenance.
struct Estimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t sample_count = 1;
    std::uint64_t seed_provenance = 0;
};

/// Pairwise (cascade) summation; result depends only on the input order.
inline double pairwise_sum(std::span<const double> xs)
{
    if (xs.size() <= 16) {
        double s = 0.0;
        for (double x : xs)
            s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct SampleStats {
    double mean = 0.0;
    double sd = 0.0;   // unbiased
    double se = 0.0;   // sd / sqrt(n)
    std::size_t n = 0;
};

inline SampleStats sample_stats(std::span<const double> xs)
{
    SampleStats s;
    s.n = xs.size();
    if (s.n == 0)
        return s;
    s.mean = pairwise_sum(xs) / static_cast<double>(s.n);
    if (s.n > 1) {
        std::vector<double> dev(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            dev[i] = (xs[i] - s.mean) * (xs[i] - s.mean);
        s.sd = std::sqrt(pairwise_sum(dev) / static_cast<double>(s.n - 1));
        s.se = s.sd / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

inline Estimate mean_estimate(std::span<const double> xs, std::uint64_t provenance = 0)
{
    const auto s = sample_stats(xs);
    return {s.mean, s.se, std::max<std::size_t>(s.n, 1), provenance};
}

/// Delta-method estimate of (mean x)^{1/p} given samples x.
inline Estimate power_mean_estimate(std::span<const double> xs, double p, std::uint64_t provenance = 0)
{
    const auto s = sample_stats(xs);
    const double v = std::pow(s.mean, 1.0 / p);
    const double se = std::abs(v / (p * s.mean)) * s.se;
    return {v, se, std::max<std::size_t>(s.n, 1), provenance};
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054)
{
    if (trials == 0)
        return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit: need at least two paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

/// Empirical quantile with linear interpolation, q in [0,1].
inline double quantile(std::vector<double> xs, double q)
{
    if (xs.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

} // namespace randpoly

#endif // RANDPOLY_ESTIMATE_HPP
