#ifndef RANDPOLY_HARNESS_EXPERIMENTS_HPP
#define RANDPOLY_HARNESS_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "randpoly/entropy.hpp"
#include "randpoly/estimate.hpp"
#include "randpoly/functionals.hpp"
#include "randpoly/harness/config.hpp"
#include "randpoly/harness/io.hpp"
#include "randpoly/isoconst.hpp"
#include "randpoly/measures.hpp"

#ifndef RANDPOLY_VERSION
#define RANDPOLY_VERSION "0.0.0"
#endif

namespace randpoly::harness {

struct OutputFile {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
    std::size_t rows = 0;
};

struct RunManifest {
    std::string experiment;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = RANDPOLY_VERSION;
    std::string started;
    std::string finished;
    bool complete = false;
    std::string error;
    int trials_completed = 0;
    std::vector<OutputFile> outputs;

    [[nodiscard]] nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["experiment"] = experiment;
        j["config_hash"] = config_hash;
        j["seed"] = seed;
        j["artifact_version"] = version;
        j["started"] = started;
        j["finished"] = finished;
        j["complete"] = complete;
        j["trials_completed"] = trials_completed;
        if (!error.empty())
            j["error"] = error;
        j["outputs"] = nlohmann::json::array();
        for (const auto& o : outputs)
            j["outputs"].push_back({{"file", o.name}, {"sha256", o.sha256}, {"bytes", o.bytes}, {"rows", o.rows}});
        return j;
    }
};

inline std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string config_hash(const ExperimentConfig& c) { return sha256_hex(config_to_json(c).dump()); }

/// Collects output files for one run and writes the manifest last.
class RunWriter {
public:
    RunWriter(const ExperimentConfig& cfg, std::filesystem::path dir) : dir_(std::move(dir))
    {
        std::filesystem::create_directories(dir_);
        // A stale manifest from an earlier run must not describe new outputs.
        std::filesystem::remove(dir_ / "manifest.json");
        m_.experiment = cfg.experiment;
        m_.config_hash = config_hash(cfg);
        m_.seed = cfg.seed;
        m_.started = utc_now();
    }

    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

    void add(const std::string& name, const std::string& contents, std::size_t rows)
    {
        write_atomic(dir_ / name, contents);
        m_.outputs.push_back({name, sha256_hex(contents), contents.size(), rows});
    }

    void add_csv(const std::string& name, const std::vector<Row>& rows) { add(name, csv_document(rows), rows.size()); }

    RunManifest finish(bool complete, int trials_completed, std::string error = {})
    {
        m_.finished = utc_now();
        m_.complete = complete;
        m_.trials_completed = trials_completed;
        m_.error = std::move(error);
        write_atomic(dir_ / "manifest.json", m_.to_json().dump(2) + "\n");
        return m_;
    }

private:
    std::filesystem::path dir_;
    RunManifest m_;
};

/// Runs fn(i) for i in [0, count) over `workers` threads. Results land in
/// slot i, so the output order never depends on scheduling. Failed slots stay
/// empty and the lowest-index exception is kept.
template <class T>
struct TrialResults {
    std::vector<std::optional<T>> slots;
    std::exception_ptr error;
    int error_index = -1;

    [[nodiscard]] int completed_prefix() const
    {
        int c = 0;
        while (c < static_cast<int>(slots.size()) && slots[static_cast<std::size_t>(c)])
            ++c;
        return c;
    }
};

template <class T>
TrialResults<T> run_parallel(int count, int workers, const std::function<T(int)>& fn)
{
    TrialResults<T> res;
    res.slots.resize(static_cast<std::size_t>(count));
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto body = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                res.slots[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                errs[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int w = std::max(1, std::min(workers, count));
    if (w == 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < w; ++t)
            pool.emplace_back(body);
    }
    for (int i = 0; i < count; ++i)
        if (errs[static_cast<std::size_t>(i)]) {
            res.error = errs[static_cast<std::size_t>(i)];
            res.error_index = i;
            break;
        }
    return res;
}

inline std::string exception_message(const std::exception_ptr& e)
{
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& x) {
        return x.what();
    } catch (...) {
        return "unknown error";
    }
}

/// Base stream for one (experiment, N, trial) cell.
inline Stream trial_stream(const ExperimentConfig& c, const std::string& experiment, int N, int trial)
{
    return Stream(c.seed).substream(experiment).substream(static_cast<std::uint64_t>(N)).substream(
        static_cast<std::uint64_t>(trial));
}

inline VertexPolytope draw_polytope(const Distribution& dist, int N, const Stream& base)
{
    Stream r = base.substream("polytope");
    return VertexPolytope(sample(dist, static_cast<std::size_t>(N), r));
}

namespace detail {

inline Row make_row(int trial, std::string functional, const Estimate& e, std::size_t budget, const Stream& s)
{
    Row r;
    r.trial = trial;
    r.functional = std::move(functional);
    r.value = e.value;
    r.stderr_ = e.standard_error;
    r.budget = budget;
    r.seed = s.key();
    return r;
}

inline Row exact_row(int trial, std::string functional, double v, const Stream& s)
{
    return make_row(trial, std::move(functional), {v, 0.0, 1, s.key()}, 0, s);
}

inline int max_k(const ExperimentConfig& c) { return *std::max_element(c.k_list.begin(), c.k_list.end()); }

} // namespace detail

/// Functional rows for one trial of one experiment.
inline std::vector<Row> trial_rows(const ExperimentConfig& c, const Distribution& dist, int N, int trial,
                                   const VertexPolytope& k)
{
    const Budgets b = c.effective_budgets();
    const Stream base = trial_stream(c, c.experiment, N, trial);
    std::vector<Row> rows;
    const int n = c.n;

    if (c.experiment == "widths") {
        Stream s = base.substream("mean_width");
        rows.push_back(detail::make_row(trial, "mean_width", mean_width(k, b.sphere, s), b.sphere, s));
    } else if (c.experiment == "quermass") {
        Stream s = base.substream("quermass");
        const auto prof = quermass_profile(k, detail::max_k(c), b.subspaces, s);
        for (int kk : c.k_list) {
            Row r = detail::make_row(trial, "Q_k", prof[static_cast<std::size_t>(kk - 1)], b.subspaces, s);
            r.k = kk;
            rows.push_back(r);
        }
    } else if (c.experiment == "radii") {
        const double R = radius(k);
        rows.push_back(detail::exact_row(trial, "R", R, base));
        Stream sw = base.substream("mean_width");
        const Estimate w = mean_width(k, b.sphere, sw);
        rows.push_back(detail::make_row(trial, "mean_width", w, b.sphere, sw));
        for (int kk : c.k_list) {
            Stream s = base.substream("R_k").substream(static_cast<std::uint64_t>(kk));
            const Estimate rk = outer_radius_Rk(k, kk, b.subspaces, s);
            Row r = detail::make_row(trial, "R_k", rk, b.subspaces, s);
            r.k = kk;
            rows.push_back(r);
            const double denom = w.value + std::sqrt(static_cast<double>(kk) / n) * R;
            Row ratio = detail::make_row(trial, "R_k_ratio", {rk.value / denom, rk.standard_error / denom, 1, s.key()},
                                         b.subspaces, s);
            ratio.k = kk;
            rows.push_back(ratio);
        }
    } else if (c.experiment == "sections") {
        for (int kk : c.k_list) {
            Stream s = base.substream("D_k").substream(static_cast<std::uint64_t>(kk));
            Row r = detail::make_row(trial, "D_k", inner_mean_Dk(k, kk, b.subspaces, b.directions, s), b.subspaces, s);
            r.k = kk;
            rows.push_back(r);
        }
        Stream sm = base.substream("M");
        rows.push_back(detail::make_row(trial, "M", M_value(k, b.sphere, sm), b.sphere, sm));
        Stream sb = base.substream("b");
        rows.push_back(detail::make_row(trial, "b", {b_value(k, b.directions, sb), 0.0, b.directions, sb.key()},
                                        b.directions, sb));
    } else if (c.experiment == "entropy") {
        Stream s = base.substream("entropy");
        CoveringOptions opt;
        opt.pool = b.interior;
        const auto [primal, dual] = regularity_profile(k, c.t_list, opt, s);
        for (const auto* rep : {&primal, &dual}) {
            const std::string tag = rep == &primal ? "primal" : "dual";
            for (const auto& cr : rep->rows) {
                Row r = detail::make_row(trial, "log_cover_" + tag, {cr.log_upper, 0.0, 1, s.key()}, b.interior, s);
                r.t = cr.t;
                rows.push_back(r);
                Row f = detail::make_row(trial, "budget_flag_" + tag, {cr.budget_too_small ? 1.0 : 0.0, 0.0, 1, s.key()},
                                         b.interior, s);
                f.t = cr.t;
                rows.push_back(f);
            }
            rows.push_back(detail::make_row(trial, "fitted_c_" + tag, {rep->fitted_c(), 0.0, 1, s.key()}, b.interior, s));
        }
    } else if (c.experiment == "isoconst") {
        const KKReport rep = kk_bound_pipeline(k);
        rows.push_back(detail::exact_row(trial, "L", rep.isotropic_constant, base));
        rows.push_back(detail::exact_row(trial, "L_over_log_scale", rep.isotropic_constant / rep.log_scale, base));
        rows.push_back(detail::exact_row(trial, "interior_moment", rep.interior_second_moment, base));
        rows.push_back(detail::exact_row(trial, "facet_bound", rep.max_facet_bound, base));
        rows.push_back(detail::exact_row(trial, "sign_bound", rep.max_sign_bound, base));
        rows.push_back(detail::exact_row(trial, "implied_L_bound", rep.implied_L_bound, base));
        rows.push_back(detail::exact_row(trial, "facet_count", static_cast<double>(rep.facet_count), base));
    } else if (c.experiment == "tails") {
        Stream s = base.substream("tails");
        const Eigen::MatrixXd x = sample(dist, b.sample, s);
        static const std::vector<double> eps_grid{0.05, 0.1, 0.2, 0.3, 0.5};
        static const std::vector<double> lat_grid{0.01, 0.02, 0.05, 0.1, 0.2};
        TailSpec spec{c.t_list, eps_grid, fit_deviation_constant(x, c.t_list), fit_small_ball_constant(x, eps_grid)};
        rows.push_back(detail::make_row(trial, "deviation_constant", {spec.c3, 0.0, 1, s.key()}, b.sample, s));
        rows.push_back(detail::make_row(trial, "small_ball_constant", {spec.c4, 0.0, 1, s.key()}, b.sample, s));
        rows.push_back(detail::make_row(trial, "latala_constant", {fit_latala_constant(x, lat_grid), 0.0, 1, s.key()},
                                        b.sample, s));
        for (const TailRow& tr : tail_probabilities(x, spec)) {
            const bool dev = tr.kind == TailRow::Kind::deviation;
            const double se = std::sqrt(tr.probability * (1.0 - tr.probability) / static_cast<double>(b.sample));
            Row r = detail::make_row(trial, dev ? "deviation_tail" : "small_ball_tail", {tr.probability, se, 1, s.key()},
                                     b.sample, s);
            r.t = tr.parameter;
            rows.push_back(r);
        }
    } else {
        throw ConfigError("experiment", "'" + c.experiment + "' has no per-trial functionals");
    }
    return rows;
}

/// Experiment-specific limits that depend on more than one field.
inline void check_feasible(const ExperimentConfig& c)
{
    const Budgets b = c.effective_budgets();
    if (c.experiment == "quermass") {
        if (detail::max_k(c) > exact_hull_cap)
            throw ConfigError("k", "quermass needs k <= " + std::to_string(exact_hull_cap));
        if (b.subspaces < 20)
            throw ConfigError("budgets.subspaces", "quermass needs at least 20 subspace draws");
    }
    if (c.experiment == "widths" && b.sphere < 100)
        throw ConfigError("budgets.sphere", "mean width needs at least 100 sphere draws");
    if (c.experiment == "isoconst" && c.n > 6)
        throw ConfigError("n", "isoconst runs the exact facet path, which is limited to n <= 6");
    if (c.experiment == "tails" && b.sample < 100000)
        throw ConfigError("budgets.sample", "tails needs at least 1e5 draws");
}

inline std::string csv_name(const std::string& stem, const ExperimentConfig& c, int N)
{
    return c.N_grid.size() == 1 ? stem + ".csv" : stem + "_N" + std::to_string(N) + ".csv";
}

/// Draw K_N for each trial, evaluate the configured functionals, write one CSV
/// per N and the manifest last. Rethrows the first trial failure after the
/// manifest has been written with complete = false.
inline RunManifest run(const ExperimentConfig& c)
{
    validate(c);
    check_feasible(c);
    const Distribution dist = Distribution::make(parse_family(c.distribution), c.n);
    RunWriter out(c, default_output_root(c.output_dir));
    int done = 0;
    for (int N : c.N_grid) {
        auto res = run_parallel<std::vector<Row>>(c.trials, c.workers, [&](int trial) {
            const Stream base = trial_stream(c, c.experiment, N, trial);
            const VertexPolytope k = draw_polytope(dist, N, base);
            if (c.save_points) {
                std::filesystem::create_directories(out.dir() / "points");
                write_point_cloud(out.dir() / "points" / ("trial" + std::to_string(trial) + "_N" + std::to_string(N) + ".txt"),
                                  k.generators(), base.key());
            }
            return trial_rows(c, dist, N, trial, k);
        });
        std::vector<Row> rows;
        const int prefix = res.completed_prefix();
        for (int i = 0; i < prefix; ++i)
            for (auto& r : *res.slots[static_cast<std::size_t>(i)])
                rows.push_back(std::move(r));
        out.add_csv(csv_name(c.experiment, c, N), rows);
        done += prefix;
        if (res.error) {
            out.finish(false, done,
                       "trial " + std::to_string(res.error_index) + " at N=" + std::to_string(N) + ": " +
                           exception_message(res.error));
            std::rethrow_exception(res.error);
        }
    }
    return out.finish(true, done);
}

struct Fit {
    std::string quantity;
    std::optional<int> k;
    std::vector<double> x;
    std::vector<double> y;
    LinearFit fit;
};

struct ScalingReport {
    std::string distribution;
    int n = 0;
    std::vector<int> N_grid;
    std::vector<Fit> fits;   // E[Q_k], w against sqrt(log N)
    std::vector<double> R_over_sqrt_n;   // mean R/sqrt(n) per N
    RunManifest manifest;

    [[nodiscard]] nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["distribution"] = distribution;
        j["n"] = n;
        j["N"] = N_grid;
        j["R_over_sqrt_n"] = R_over_sqrt_n;
        j["fits"] = nlohmann::json::array();
        for (const auto& f : fits) {
            nlohmann::json e{{"quantity", f.quantity},  {"x", f.x},
                             {"y", f.y},                {"slope", f.fit.slope},
                             {"intercept", f.fit.intercept}, {"r_squared", f.fit.r_squared}};
            if (f.k)
                e["k"] = *f.k;
            j["fits"].push_back(e);
        }
        return j;
    }
};

/// Per (N, trial): Q_k for the k-list, w and R. Fits the trial means against
/// sqrt(log N).
inline ScalingReport scaling_study(ExperimentConfig c)
{
    c.experiment = "quermass";
    validate(c);
    check_feasible(c);
    const Budgets b = c.effective_budgets();
    const Distribution dist = Distribution::make(parse_family(c.distribution), c.n);
    RunWriter out(c, default_output_root(c.output_dir));
    ScalingReport rep;
    rep.distribution = c.distribution;
    rep.n = c.n;
    rep.N_grid = c.N_grid;
    const int kmax = detail::max_k(c);
    std::map<std::pair<std::string, int>, std::vector<double>> means;   // (quantity, k) -> mean per N
    int done = 0;
    for (int N : c.N_grid) {
        auto res = run_parallel<std::vector<Row>>(c.trials, c.workers, [&](int trial) {
            const Stream base = trial_stream(c, "scaling", N, trial);
            const VertexPolytope k = draw_polytope(dist, N, base);
            std::vector<Row> rows;
            Stream sq = base.substream("quermass");
            const auto prof = quermass_profile(k, kmax, b.subspaces, sq);
            for (int kk : c.k_list) {
                Row r = detail::make_row(trial, "Q_k", prof[static_cast<std::size_t>(kk - 1)], b.subspaces, sq);
                r.k = kk;
                rows.push_back(r);
            }
            Stream sw = base.substream("mean_width");
            rows.push_back(detail::make_row(trial, "mean_width", mean_width(k, b.sphere, sw), b.sphere, sw));
            rows.push_back(detail::exact_row(trial, "R", radius(k), base));
            return rows;
        });
        std::vector<Row> rows;
        const int prefix = res.completed_prefix();
        for (int i = 0; i < prefix; ++i)
            for (auto& r : *res.slots[static_cast<std::size_t>(i)])
                rows.push_back(std::move(r));
        out.add_csv("scaling_N" + std::to_string(N) + ".csv", rows);
        done += prefix;
        if (res.error) {
            out.finish(false, done, exception_message(res.error));
            std::rethrow_exception(res.error);
        }
        std::map<std::pair<std::string, int>, std::vector<double>> per;
        for (const auto& r : rows)
            per[{r.functional, r.k.value_or(0)}].push_back(r.value);
        for (auto& [key, vals] : per)
            means[key].push_back(sample_stats(vals).mean);
    }
    std::vector<double> x;
    for (int N : c.N_grid)
        x.push_back(std::sqrt(std::log(static_cast<double>(N))));
    for (int kk : c.k_list) {
        const auto& y = means[{"Q_k", kk}];
        rep.fits.push_back({"Q_k", kk, x, y, linear_fit(x, y)});
    }
    const auto& yw = means[{"mean_width", 0}];
    rep.fits.push_back({"mean_width", std::nullopt, x, yw, linear_fit(x, yw)});
    for (double r : means[{"R", 0}])
        rep.R_over_sqrt_n.push_back(r / std::sqrt(static_cast<double>(c.n)));
    const std::string js = rep.to_json().dump(2) + "\n";
    out.add("scaling_fits.json", js, rep.fits.size());
    rep.manifest = out.finish(true, done);
    return rep;
}

struct InclusionSummary {
    double q = 0.0;
    std::vector<double> c;   // one per trial
    double min = 0.0;
    double median = 0.0;
    int above_threshold = 0;
};

struct InclusionReport {
    int N = 0;
    double threshold = 0.05;
    std::vector<InclusionSummary> per_q;
    RunManifest manifest;

    [[nodiscard]] nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["N"] = N;
        j["threshold"] = threshold;
        j["per_q"] = nlohmann::json::array();
        for (const auto& s : per_q)
            j["per_q"].push_back({{"q", s.q},
                                  {"c", s.c},
                                  {"min", s.min},
                                  {"median", s.median},
                                  {"above_threshold", s.above_threshold},
                                  {"trials", s.c.size()}});
        return j;
    }
};

/// The sample of mu that defines Z_q for every trial of a study.
inline CentroidBody study_centroid_body(const Distribution& dist, double q, std::size_t sample_size, std::uint64_t seed)
{
    if (dist.family == Family::gaussian)
        return CentroidBody::closed_form(dist, q);
    static SampleCache cache;
    return CentroidBody::monte_carlo(dist, q, cache.get(dist, sample_size, seed));
}

/// Per trial and q: c(q) = min over directions of h_K / h_{Z_q}, plus the
/// L_q moment of the same ratio.
inline InclusionReport inclusion_study(ExperimentConfig c, double threshold = 0.05)
{
    c.experiment = "widths";   // validation only; the study has its own streams
    validate(c);
    const Budgets b = c.effective_budgets();
    const Distribution dist = Distribution::make(parse_family(c.distribution), c.n);
    const int N = c.N_grid.front();
    RunWriter out(c, default_output_root(c.output_dir));
    std::vector<CentroidBody> bodies;
    for (double q : c.q_list)
        bodies.push_back(study_centroid_body(dist, q, b.sample, c.seed));

    auto res = run_parallel<std::vector<Row>>(c.trials, c.workers, [&](int trial) {
        const Stream base = trial_stream(c, "inclusion", N, trial);
        const VertexPolytope k = draw_polytope(dist, N, base);
        std::vector<Row> rows;
        for (std::size_t i = 0; i < bodies.size(); ++i) {
            Stream s = base.substream("inclusion").substream(static_cast<std::uint64_t>(i));
            Row r = detail::make_row(trial, "inclusion_c", inclusion_constant(k, bodies[i], b.directions, s), b.directions, s);
            r.q = bodies[i].q;
            rows.push_back(r);
            Stream sm = base.substream("moment_ratio").substream(static_cast<std::uint64_t>(i));
            Row m = detail::make_row(trial, "moment_ratio", moment_ratio(k, bodies[i], b.directions, sm), b.directions, sm);
            m.q = bodies[i].q;
            rows.push_back(m);
        }
        return rows;
    });
    std::vector<Row> rows;
    const int prefix = res.completed_prefix();
    for (int i = 0; i < prefix; ++i)
        for (auto& r : *res.slots[static_cast<std::size_t>(i)])
            rows.push_back(std::move(r));
    out.add_csv("inclusion.csv", rows);
    if (res.error) {
        out.finish(false, prefix, exception_message(res.error));
        std::rethrow_exception(res.error);
    }
    InclusionReport rep;
    rep.N = N;
    rep.threshold = threshold;
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        InclusionSummary s;
        s.q = bodies[i].q;
        for (const auto& r : rows)
            if (r.functional == "inclusion_c" && r.q && *r.q == s.q)
                s.c.push_back(r.value);
        s.min = *std::min_element(s.c.begin(), s.c.end());
        s.median = quantile(s.c, 0.5);
        s.above_threshold = static_cast<int>(std::count_if(s.c.begin(), s.c.end(), [&](double v) { return v > threshold; }));
        rep.per_q.push_back(std::move(s));
    }
    out.add("inclusion_summary.json", rep.to_json().dump(2) + "\n", rep.per_q.size());
    rep.manifest = out.finish(true, prefix);
    return rep;
}

struct SummaryRow {
    std::string functional;
    std::optional<int> k;
    std::optional<double> q;
    std::optional<double> t;
    std::size_t count = 0;
    double mean = 0.0;
    double se = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Mean and standard error across trials, grouped by (functional, k, q, t).
inline std::vector<SummaryRow> summarize(const std::vector<Row>& rows)
{
    using Key = std::tuple<std::string, int, double, double>;
    constexpr double none = -1e300;
    std::map<Key, std::vector<double>> groups;
    std::map<Key, const Row*> first;
    for (const auto& r : rows) {
        Key key{r.functional, r.k.value_or(-1), r.q.value_or(none), r.t.value_or(none)};
        groups[key].push_back(r.value);
        first.emplace(key, &r);
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, vals] : groups) {
        const Row* r = first.at(key);
        const auto st = sample_stats(vals);
        out.push_back({r->functional, r->k, r->q, r->t, vals.size(), st.mean, st.se,
                       *std::min_element(vals.begin(), vals.end()), *std::max_element(vals.begin(), vals.end())});
    }
    return out;
}

} // namespace randpoly::harness

#endif // RANDPOLY_HARNESS_EXPERIMENTS_HPP
