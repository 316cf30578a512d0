// Command-line front end: run experiments, studies and the acceptance suite.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "randpoly/harness/config.hpp"
#include "randpoly/harness/experiments.hpp"
#include "randpoly/harness/verify.hpp"

namespace rh = randpoly::harness;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> workers;
    std::optional<double> budget_scale;
};

void add_common(CLI::App* app, Overrides& o, bool need_config)
{
    auto* c = app->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
    if (need_config)
        c->required();
    app->add_option("--seed", o.seed, "override the config seed");
    app->add_option("--out", o.out, "output directory (default: $RANDPOLY_OUT or ./randpoly-out)");
    app->add_option("--workers", o.workers, "worker threads for trials")->check(CLI::PositiveNumber);
    app->add_option("--budget-scale", o.budget_scale, "multiply all Monte Carlo budgets")->check(CLI::PositiveNumber);
}

rh::ExperimentConfig resolve(const Overrides& o, rh::ExperimentConfig base = {})
{
    rh::ExperimentConfig c = o.config.empty() ? base : rh::load_config(o.config);
    if (o.seed)
        c.seed = *o.seed;
    if (o.workers)
        c.workers = *o.workers;
    if (o.budget_scale)
        c.budget_scale = *o.budget_scale;
    c.output_dir = rh::default_output_root(o.out.empty() ? c.output_dir : o.out);
    rh::validate(c);
    return c;
}

void print_manifest(const rh::RunManifest& m)
{
    std::cout << "wrote " << m.outputs.size() << " file(s) and manifest.json, config " << m.config_hash.substr(0, 12)
              << "\n";
    for (const auto& f : m.outputs)
        std::cout << "  " << f.name << "  " << f.rows << " rows  sha256 " << f.sha256.substr(0, 16) << "\n";
}

std::string cell(const std::optional<double>& v) { return v ? rh::format_double(*v) : "-"; }

int report(const std::string& path, bool as_json)
{
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
        for (const auto& e : fs::directory_iterator(path))
            if (e.path().extension() == ".csv")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    if (files.empty()) {
        std::cerr << "no CSV files under " << path << "\n";
        return 2;
    }
    nlohmann::json j = nlohmann::json::object();
    for (const auto& f : files) {
        const auto summary = rh::summarize(rh::read_csv(f));
        if (as_json) {
            auto& arr = j[f.filename().string()] = nlohmann::json::array();
            for (const auto& s : summary) {
                nlohmann::json e{{"functional", s.functional}, {"count", s.count}, {"mean", s.mean},
                                 {"se", s.se},                 {"min", s.min},     {"max", s.max}};
                if (s.k)
                    e["k"] = *s.k;
                if (s.q)
                    e["q"] = *s.q;
                if (s.t)
                    e["t"] = *s.t;
                arr.push_back(e);
            }
            continue;
        }
        std::cout << f.filename().string() << "\n";
        std::printf("  %-22s %4s %8s %8s %6s %14s %12s %12s %12s\n", "functional", "k", "q", "t", "n", "mean", "se", "min",
                    "max");
        for (const auto& s : summary)
            std::printf("  %-22s %4s %8s %8s %6zu %14.6g %12.4g %12.6g %12.6g\n", s.functional.c_str(),
                        s.k ? std::to_string(*s.k).c_str() : "-", cell(s.q).c_str(), cell(s.t).c_str(), s.count, s.mean,
                        s.se, s.min, s.max);
    }
    if (as_json)
        std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Random symmetric polytopes: Monte Carlo functionals and checks"};
    app.set_version_flag("--version", std::string(RANDPOLY_VERSION));
    app.require_subcommand(1);

    Overrides run_o, scal_o, inc_o;
    auto* run_cmd = app.add_subcommand("run", "run an experiment from a JSON config");
    add_common(run_cmd, run_o, true);

    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite; exit status 0 iff every criterion passes");
    std::uint64_t verify_seed = rh::VerifyOptions{}.seed;
    int verify_workers = 1;
    std::vector<int> only;
    std::string verify_out;
    verify_cmd->add_option("--seed", verify_seed, "seed for every check");
    verify_cmd->add_option("--workers", verify_workers, "worker threads")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--only", only, "criterion numbers to run")->check(CLI::Range(1, 11));
    verify_cmd->add_option("--out", verify_out, "also write verify.csv and a manifest here");

    auto* scal_cmd = app.add_subcommand("scaling", "fit E[Q_k], w against sqrt(log N) over an N grid");
    add_common(scal_cmd, scal_o, false);

    auto* inc_cmd = app.add_subcommand("inclusion", "empirical c with c Z_q inside K_N");
    add_common(inc_cmd, inc_o, false);
    double threshold = 0.05;
    inc_cmd->add_option("--threshold", threshold, "report trials with c above this value");

    auto* rep_cmd = app.add_subcommand("report", "summarize CSV output across trials");
    std::string rep_path;
    bool rep_json = false;
    rep_cmd->add_option("path", rep_path, "CSV file or output directory")->required()->check(CLI::ExistingPath);
    rep_cmd->add_flag("--json", rep_json, "print JSON instead of a table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            const auto c = resolve(run_o);
            if (c.experiment == "verify") {
                const auto [m, ok] = rh::run_verify_experiment(c, std::cout);
                print_manifest(m);
                return ok ? 0 : 1;
            }
            print_manifest(rh::run(c));
            return 0;
        }
        if (*verify_cmd) {
            if (!verify_out.empty()) {
                rh::ExperimentConfig c;
                c.experiment = "verify";
                c.seed = verify_seed;
                c.workers = verify_workers;
                c.output_dir = verify_out;
                const auto [m, ok] = rh::run_verify_experiment(c, std::cout);
                print_manifest(m);
                return ok ? 0 : 1;
            }
            rh::VerifyOptions opt;
            opt.seed = verify_seed;
            opt.workers = verify_workers;
            opt.only = only;
            return rh::all_passed(rh::run_acceptance(opt, std::cout)) ? 0 : 1;
        }
        if (*scal_cmd) {
            rh::ExperimentConfig base;
            base.experiment = "quermass";
            base.n = 32;
            base.N_grid = {64, 256, 1024, 4096, 16384};
            base.k_list = {1, 2, 3};
            base.trials = 20;
            base.budgets.subspaces = 20;
            base.budgets.sphere = 2000;
            const auto rep = rh::scaling_study(resolve(scal_o, base));
            for (const auto& f : rep.fits)
                std::printf("%-10s %3s  slope %9.5f  intercept %9.5f  R^2 %.5f\n", f.quantity.c_str(),
                            f.k ? std::to_string(*f.k).c_str() : "-", f.fit.slope, f.fit.intercept, f.fit.r_squared);
            for (std::size_t i = 0; i < rep.N_grid.size(); ++i)
                std::printf("N=%-6d  E[R]/sqrt(n) %.4f\n", rep.N_grid[i], rep.R_over_sqrt_n[i]);
            print_manifest(rep.manifest);
            return 0;
        }
        if (*inc_cmd) {
            rh::ExperimentConfig base;
            base.distribution = "cube";
            base.n = 30;
            base.N_grid = {3000};
            base.q_list = {std::log(100.0)};
            base.trials = 20;
            base.budgets.directions = 1000;
            base.budgets.sample = 50000;
            const auto rep = rh::inclusion_study(resolve(inc_o, base), threshold);
            for (const auto& s : rep.per_q)
                std::printf("q=%-8.4g  min c %.4f  median c %.4f  above %.3g: %d/%zu\n", s.q, s.min, s.median, threshold,
                            s.above_threshold, s.c.size());
            print_manifest(rep.manifest);
            return 0;
        }
        if (*rep_cmd)
            return report(rep_path, rep_json);
    } catch (const rh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
