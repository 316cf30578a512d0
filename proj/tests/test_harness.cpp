#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "randpoly/harness/verify.hpp"

using namespace randpoly;
using namespace randpoly::harness;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir()
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / ("randpoly-test-" + std::string(info->test_suite_name()) + "-" + info->name() +
                                             "-" + std::to_string(::getpid()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] const fs::path& path() const { return path_; }
    [[nodiscard]] std::string sub(const std::string& s) const { return (path_ / s).string(); }

private:
    fs::path path_;
};

ExperimentConfig widths_config(const std::string& dir)
{
    ExperimentConfig c;
    c.experiment = "widths";
    c.distribution = "gaussian";
    c.n = 16;
    c.N_grid = {256};
    c.trials = 5;
    c.seed = 1;
    c.budgets.sphere = 2000;
    c.output_dir = dir;
    return c;
}

nlohmann::json manifest_of(const fs::path& dir) { return nlohmann::json::parse(read_file(dir / "manifest.json")); }

} // namespace

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(validate(ExperimentConfig{})); }

TEST(Config, RejectsNBelowDimension)
{
    ExperimentConfig c;
    c.n = 16;
    c.N_grid = {8};
    try {
        validate(c);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "N");
        EXPECT_NE(std::string(e.what()).find("N >= n"), std::string::npos);
    }
}

TEST(Config, FieldErrors)
{
    auto field_of = [](const nlohmann::json& j) {
        try {
            (void)config_from_json(j);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("none");
    };
    EXPECT_EQ(field_of({{"experiment", "widths"}, {"colour", 3}}), "colour");
    EXPECT_EQ(field_of({{"budgets", {{"sphere", 0}}}}), "budgets.sphere");
    EXPECT_EQ(field_of({{"budgets", {{"spheres", 10}}}}), "budgets.spheres");
    EXPECT_EQ(field_of({{"n", "sixteen"}}), "n");
    EXPECT_EQ(field_of({{"k", {0}}}), "k");
    EXPECT_EQ(field_of({{"q", {0.5}}}), "q");
    EXPECT_EQ(field_of({{"distribution", "cauchy"}}), "distribution");
    EXPECT_EQ(field_of({{"experiment", "everything"}}), "experiment");
    EXPECT_EQ(field_of({{"trials", 0}}), "trials");
    EXPECT_EQ(field_of(nlohmann::json::array()), "config");
    EXPECT_EQ(field_of({{"n", 4}, {"N", {4, 8}}}), "none");
}

TEST(Config, ScalarOrListN)
{
    EXPECT_EQ(config_from_json({{"N", 300}}).N_grid, std::vector<int>{300});
    EXPECT_EQ(config_from_json({{"N", {100, 200}}}).N_grid, (std::vector<int>{100, 200}));
}

TEST(Config, JsonRoundTrip)
{
    ExperimentConfig c;
    c.experiment = "radii";
    c.distribution = "l1ball";
    c.n = 10;
    c.N_grid = {20, 40};
    c.k_list = {1, 5};
    c.q_list = {2.0, 3.5};
    c.t_list = {0.5};
    c.trials = 7;
    c.seed = 99;
    c.budget_scale = 0.5;
    c.budgets.directions = 77;
    const auto j = config_to_json(c);
    const auto back = config_from_json(j);
    EXPECT_EQ(config_to_json(back), j);
    EXPECT_EQ(config_hash(back), config_hash(c));
    c.workers = 4;
    c.output_dir = "elsewhere";
    EXPECT_EQ(config_hash(back), config_hash(c));
    c.seed = 100;
    EXPECT_NE(config_hash(back), config_hash(c));
}

TEST(Config, LoadFromFile)
{
    TempDir tmp;
    const auto p = tmp.sub("c.json");
    write_atomic(p, R"({"experiment": "quermass", "n": 8, "N": 64, "k": [1, 2]})");
    const auto c = load_config(p);
    EXPECT_EQ(c.experiment, "quermass");
    EXPECT_EQ(c.k_list, (std::vector<int>{1, 2}));
    write_atomic(p, "{ not json");
    EXPECT_THROW(load_config(p), ConfigError);
    EXPECT_THROW(load_config(tmp.sub("missing.json")), ConfigError);
}

TEST(Config, BudgetScale)
{
    ExperimentConfig c;
    c.budget_scale = 0.1;
    const auto b = c.effective_budgets();
    EXPECT_EQ(b.sphere, 1000u);
    EXPECT_EQ(b.subspaces, 20u);
    c.budget_scale = 1e-9;
    EXPECT_EQ(c.effective_budgets().subspaces, 1u);
}

TEST(Config, OutputRootFromEnvironment)
{
    EXPECT_EQ(default_output_root("given"), "given");
    ::setenv("RANDPOLY_OUT", "/tmp/from-env", 1);
    EXPECT_EQ(default_output_root(), "/tmp/from-env");
    ::unsetenv("RANDPOLY_OUT");
    EXPECT_EQ(default_output_root(), "randpoly-out");
}

TEST(Io, FormatDoubleRoundTrips)
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5, 0.0})
        EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Io, CsvRoundTrip)
{
    TempDir tmp;
    std::vector<Row> rows(2);
    rows[0] = {0, "Q_k", 3, std::nullopt, std::nullopt, 1.25, 0.01, 40, 17};
    rows[1] = {1, "log_cover_primal", std::nullopt, 2.0, 0.5, 1.0 / 3.0, 0.0, 4096, 18446744073709551615ull};
    const auto doc = csv_document(rows);
    EXPECT_EQ(doc.substr(0, doc.find('\n')), "trial,functional,k,q,t,value,stderr,budget,seed");
    EXPECT_NE(doc.find("0,Q_k,3,,,1.25,0.01,40,17\n"), std::string::npos);
    write_atomic(tmp.path() / "r.csv", doc);
    const auto back = read_csv(tmp.path() / "r.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].k, 3);
    EXPECT_FALSE(back[0].q.has_value());
    EXPECT_EQ(back[1].t, 0.5);
    EXPECT_EQ(back[1].value, 1.0 / 3.0);
    EXPECT_EQ(back[1].seed, 18446744073709551615ull);
    EXPECT_EQ(csv_document(back), doc);

    write_atomic(tmp.path() / "bad.csv", "trial,value\n");
    EXPECT_THROW(read_csv(tmp.path() / "bad.csv"), std::runtime_error);
    write_atomic(tmp.path() / "short.csv", std::string(csv_header) + "\n1,2\n");
    EXPECT_THROW(read_csv(tmp.path() / "short.csv"), std::runtime_error);
}

TEST(Io, PointCloudRoundTrip)
{
    TempDir tmp;
    Stream rng(3);
    const Eigen::MatrixXd x = sample(Distribution::make(Family::cube, 3), 5, rng);
    write_point_cloud(tmp.path() / "p.txt", x, 42);
    const auto text = read_file(tmp.path() / "p.txt");
    EXPECT_EQ(text.substr(0, text.find('\n')), "3 5 42");
    const auto back = read_point_cloud(tmp.path() / "p.txt");
    EXPECT_EQ(back.seed, 42u);
    EXPECT_TRUE(back.points == x);
    write_atomic(tmp.path() / "t.txt", "3 5 1\n1 2 3\n");
    EXPECT_THROW(read_point_cloud(tmp.path() / "t.txt"), std::runtime_error);
}

TEST(Io, Sha256)
{
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Run, WidthsRowsAndManifest)
{
    TempDir tmp;
    const auto m = run(widths_config(tmp.sub("a")));
    EXPECT_TRUE(m.complete);
    EXPECT_EQ(m.trials_completed, 5);
    const auto rows = read_csv(tmp.path() / "a" / "widths.csv");
    ASSERT_EQ(rows.size(), 5u);
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(rows[static_cast<std::size_t>(i)].trial, i);
        EXPECT_EQ(rows[static_cast<std::size_t>(i)].functional, "mean_width");
        EXPECT_EQ(rows[static_cast<std::size_t>(i)].budget, 2000u);
        EXPECT_GT(rows[static_cast<std::size_t>(i)].value, 0.0);
    }
    const auto j = manifest_of(tmp.path() / "a");
    EXPECT_EQ(j["complete"], true);
    EXPECT_EQ(j["seed"], 1);
    EXPECT_EQ(j["config_hash"], config_hash(widths_config("")));
    ASSERT_EQ(j["outputs"].size(), 1u);
    EXPECT_EQ(j["outputs"][0]["sha256"], sha256_hex(read_file(tmp.path() / "a" / "widths.csv")));
    EXPECT_EQ(j["outputs"][0]["rows"], 5);
}

TEST(Run, Reproducible)
{
    TempDir tmp;
    auto c = widths_config(tmp.sub("a"));
    const auto m1 = run(c);
    c.output_dir = tmp.sub("b");
    c.workers = 3;
    const auto m2 = run(c);
    EXPECT_EQ(m1.outputs[0].sha256, m2.outputs[0].sha256);
    EXPECT_EQ(read_file(tmp.path() / "a" / "widths.csv"), read_file(tmp.path() / "b" / "widths.csv"));
    c.output_dir = tmp.sub("c");
    c.seed = 2;
    EXPECT_NE(run(c).outputs[0].sha256, m1.outputs[0].sha256);
}

// A prefix of trials depends only on the trial indices, not on the count.
TEST(Run, TrialsAreIndependent)
{
    TempDir tmp;
    auto c = widths_config(tmp.sub("a"));
    run(c);
    c.trials = 2;
    c.output_dir = tmp.sub("b");
    run(c);
    const auto five = read_csv(tmp.path() / "a" / "widths.csv");
    const auto two = read_csv(tmp.path() / "b" / "widths.csv");
    ASSERT_EQ(two.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(two[i].value, five[i].value);
        EXPECT_EQ(two[i].seed, five[i].seed);
    }
}

TEST(Run, GridWritesOneFilePerN)
{
    TempDir tmp;
    auto c = widths_config(tmp.sub("a"));
    c.N_grid = {32, 64};
    c.trials = 2;
    c.save_points = true;
    const auto m = run(c);
    ASSERT_EQ(m.outputs.size(), 2u);
    EXPECT_EQ(m.outputs[0].name, "widths_N32.csv");
    EXPECT_EQ(m.outputs[1].name, "widths_N64.csv");
    const auto pc = read_point_cloud(tmp.path() / "a" / "points" / "trial1_N64.txt");
    EXPECT_EQ(pc.points.rows(), 64);
    EXPECT_EQ(pc.points.cols(), 16);
}

TEST(Run, FailureLeavesIncompleteManifest)
{
    TempDir tmp;
    ExperimentConfig c;
    c.experiment = "sections";
    c.n = 6;
    c.N_grid = {12};
    c.k_list = {2};
    c.trials = 2;
    c.budgets.directions = 10;   // below what a section radius needs
    c.budgets.subspaces = 2;
    c.output_dir = tmp.sub("a");
    EXPECT_THROW(run(c), std::invalid_argument);
    const auto j = manifest_of(tmp.path() / "a");
    EXPECT_EQ(j["complete"], false);
    EXPECT_EQ(j["trials_completed"], 0);
    EXPECT_TRUE(j.contains("error"));
}

TEST(Run, StaleManifestIsRemoved)
{
    TempDir tmp;
    const auto dir = tmp.path() / "a";
    fs::create_directories(dir);
    write_atomic(dir / "manifest.json", R"({"complete": true})");
    auto c = widths_config(dir.string());
    c.budgets.sphere = 10;
    EXPECT_THROW(run(c), ConfigError);
    c.budgets.sphere = 200;
    c.experiment = "quermass";
    c.k_list = {9};
    EXPECT_THROW(run(c), ConfigError);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));   // infeasible configs never touch the directory
    c = widths_config(dir.string());
    c.experiment = "sections";
    c.k_list = {2};
    c.budgets.directions = 10;
    EXPECT_THROW(run(c), std::invalid_argument);
    EXPECT_EQ(manifest_of(dir)["complete"], false);
}

TEST(Run, FeasibilityChecks)
{
    ExperimentConfig c;
    c.experiment = "isoconst";
    c.n = 8;
    c.N_grid = {16};
    EXPECT_THROW(check_feasible(c), ConfigError);
    c.experiment = "tails";
    c.budgets.sample = 1000;
    EXPECT_THROW(check_feasible(c), ConfigError);
}

TEST(Run, ExperimentsProduceExpectedFunctionals)
{
    TempDir tmp;
    auto expect_functionals = [&](ExperimentConfig c, std::vector<std::string> want) {
        c.output_dir = tmp.sub(c.experiment);
        run(c);
        std::set<std::string> got;
        for (const auto& r : read_csv(tmp.path() / c.experiment / (c.experiment + ".csv")))
            got.insert(r.functional);
        for (const auto& f : want)
            EXPECT_TRUE(got.count(f)) << c.experiment << " lacks " << f;
    };
    ExperimentConfig c;
    c.n = 4;
    c.N_grid = {12};
    c.k_list = {1, 2};
    c.t_list = {1.0, 2.0};
    c.budgets = {200, 20, 60, 2000, 256, 100000};
    c.experiment = "radii";
    expect_functionals(c, {"R", "mean_width", "R_k", "R_k_ratio"});
    c.experiment = "sections";
    expect_functionals(c, {"D_k", "M", "b"});
    c.experiment = "quermass";
    expect_functionals(c, {"Q_k"});
    c.experiment = "isoconst";
    expect_functionals(c, {"L", "interior_moment", "facet_bound", "sign_bound", "implied_L_bound"});
    c.experiment = "entropy";
    expect_functionals(c, {"log_cover_primal", "log_cover_dual"});
}

TEST(Run, TailsExperiment)
{
    TempDir tmp;
    ExperimentConfig c;
    c.experiment = "tails";
    c.distribution = "cube";
    c.n = 4;
    c.N_grid = {4};
    c.budgets.sample = 100000;
    c.output_dir = tmp.sub("t");
    run(c);
    bool dev = false, small = false;
    for (const auto& r : read_csv(tmp.path() / "t" / "tails.csv")) {
        dev = dev || r.functional == "deviation_tail";
        small = small || r.functional == "small_ball_tail";
        EXPECT_TRUE(std::isfinite(r.value)) << r.functional;
    }
    EXPECT_TRUE(dev);
    EXPECT_TRUE(small);
}

TEST(Parallel, SlotsAndErrors)
{
    auto ok = run_parallel<int>(10, 3, [](int i) { return i * i; });
    EXPECT_EQ(ok.completed_prefix(), 10);
    EXPECT_EQ(*ok.slots[7], 49);
    auto bad = run_parallel<int>(6, 2, [](int i) {
        if (i == 3 || i == 5)
            throw std::runtime_error("trial " + std::to_string(i));
        return i;
    });
    EXPECT_EQ(bad.completed_prefix(), 3);
    EXPECT_EQ(bad.error_index, 3);
    EXPECT_EQ(exception_message(bad.error), "trial 3");
}

TEST(Summary, GroupsByKey)
{
    std::vector<Row> rows;
    for (int t = 0; t < 4; ++t) {
        rows.push_back({t, "Q_k", 1, std::nullopt, std::nullopt, 1.0 + t, 0, 1, 0});
        rows.push_back({t, "Q_k", 2, std::nullopt, std::nullopt, 5.0, 0, 1, 0});
    }
    const auto s = summarize(rows);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].k, 1);
    EXPECT_EQ(s[0].count, 4u);
    EXPECT_DOUBLE_EQ(s[0].mean, 2.5);
    EXPECT_DOUBLE_EQ(s[0].min, 1.0);
    EXPECT_DOUBLE_EQ(s[0].max, 4.0);
    EXPECT_NEAR(s[0].se, std::sqrt(5.0 / 3.0 / 4.0), 1e-12);
    EXPECT_DOUBLE_EQ(s[1].se, 0.0);
}

TEST(Studies, SmallScaling)
{
    TempDir tmp;
    ExperimentConfig c;
    c.distribution = "gaussian";
    c.n = 6;
    c.N_grid = {16, 64, 256};
    c.k_list = {1, 2};
    c.trials = 3;
    c.budgets.subspaces = 20;
    c.budgets.sphere = 500;
    c.output_dir = tmp.sub("s");
    const auto rep = scaling_study(c);
    ASSERT_EQ(rep.fits.size(), 3u);
    for (const auto& f : rep.fits)
        EXPECT_GT(f.fit.slope, 0.0) << f.quantity;
    EXPECT_EQ(rep.R_over_sqrt_n.size(), 3u);
    EXPECT_TRUE(fs::exists(tmp.path() / "s" / "scaling_N64.csv"));
    EXPECT_TRUE(fs::exists(tmp.path() / "s" / "scaling_fits.json"));
    EXPECT_TRUE(rep.manifest.complete);
}

// c(q) stays positive for q = 2 and shrinks once q passes log N.
TEST(Studies, SmallInclusion)
{
    TempDir tmp;
    ExperimentConfig c;
    c.distribution = "cube";
    c.n = 10;
    c.N_grid = {50};
    c.q_list = {2.0, 16.0};
    c.trials = 3;
    c.budgets.directions = 200;
    c.budgets.sample = 100000;
    c.output_dir = tmp.sub("i");
    const auto rep = inclusion_study(c, 0.05);
    ASSERT_EQ(rep.per_q.size(), 2u);
    EXPECT_EQ(rep.per_q[0].above_threshold, 3);
    EXPECT_GT(rep.per_q[0].min, 1.0);
    EXPECT_LT(rep.per_q[1].median, rep.per_q[0].median);
    EXPECT_TRUE(fs::exists(tmp.path() / "i" / "inclusion_summary.json"));
}

TEST(Verify, SingleCriterion)
{
    TempDir tmp;
    VerifyOptions opt;
    opt.only = {1};
    std::ostringstream os;
    const auto rs = run_acceptance(opt, os);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_TRUE(rs[0].pass) << rs[0].detail;
    EXPECT_EQ(os.str().rfind("PASS criterion 1:", 0), 0u);
    EXPECT_EQ(acceptance_criteria().size(), 11u);
}
