#ifndef RANDPOLY_HARNESS_CONFIG_HPP
#define RANDPOLY_HARNESS_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "randpoly/measures.hpp"

namespace randpoly::harness {

/// Raised for a bad config; the message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(field) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"widths", "quermass", "radii",   "sections",
                                                "entropy", "isoconst", "verify", "tails"};
    return names;
}

struct Budgets {
    std::size_t sphere = 10000;      // sphere directions for w, M
    std::size_t subspaces = 200;     // Haar frames per Grassmannian average
    std::size_t directions = 500;    // directions for section radii, b, inclusion
    std::size_t volume = 100000;     // MC volume / moment samples
    std::size_t interior = 4096;     // covering pool
    std::size_t sample = 200000;     // draws from mu for Z_q, tails

    [[nodiscard]] Budgets scaled(double s) const
    {
        auto sc = [s](std::size_t v) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(v * s))); };
        return {sc(sphere), sc(subspaces), sc(directions), sc(volume), sc(interior), sc(sample)};
    }
};

struct ExperimentConfig {
    std::string experiment = "widths";
    std::string distribution = "gaussian";
    int n = 16;
    std::vector<int> N_grid{256};
    std::vector<int> k_list{1};
    std::vector<double> q_list{2.0};
    std::vector<double> t_list{1.0, 2.0, 4.0, 8.0};
    int trials = 1;
    Budgets budgets;
    std::uint64_t seed = 1;
    std::string output_dir;
    int workers = 1;
    double budget_scale = 1.0;
    bool save_points = false;

    [[nodiscard]] Budgets effective_budgets() const { return budgets.scaled(budget_scale); }
};

/// Field-level checks. Throws ConfigError.
inline void validate(const ExperimentConfig& c)
{
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
    try {
        (void)parse_family(c.distribution);
    } catch (const std::exception&) {
        throw ConfigError("distribution", "unknown distribution '" + c.distribution + "'");
    }
    if (c.n < 2)
        throw ConfigError("n", "the dimension must satisfy n >= 2");
    if (c.N_grid.empty())
        throw ConfigError("N", "at least one N is required");
    for (int N : c.N_grid)
        if (N < c.n)
            throw ConfigError("N", "N = " + std::to_string(N) + " violates N >= n (n = " + std::to_string(c.n) +
                                       "); K_N is only considered for N >= n");
    for (int k : c.k_list)
        if (k < 1 || k > c.n)
            throw ConfigError("k", "k = " + std::to_string(k) + " is outside 1..n");
    for (double q : c.q_list)
        if (!(q >= 1.0) || !std::isfinite(q))
            throw ConfigError("q", "q must be finite and >= 1");
    for (double t : c.t_list)
        if (!(t > 0.0) || !std::isfinite(t))
            throw ConfigError("t", "t must be finite and positive");
    if (c.trials < 1)
        throw ConfigError("trials", "trials must be >= 1");
    const Budgets& b = c.budgets;
    const std::pair<const char*, std::size_t> fields[] = {
        {"budgets.sphere", b.sphere},     {"budgets.subspaces", b.subspaces}, {"budgets.directions", b.directions},
        {"budgets.volume", b.volume},     {"budgets.interior", b.interior},   {"budgets.sample", b.sample}};
    for (const auto& [name, v] : fields)
        if (v == 0)
            throw ConfigError(name, "budgets must be positive");
    if (!(c.budget_scale > 0.0) || !std::isfinite(c.budget_scale))
        throw ConfigError("budget_scale", "must be finite and positive");
    if (c.workers < 1)
        throw ConfigError("workers", "must be >= 1");
}

namespace detail {

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out)
{
    if (!j.contains(key))
        return;
    try {
        j.at(key).get_to(out);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(key, std::string("wrong type (") + e.what() + ")");
    }
}

inline void read_count(const nlohmann::json& j, const char* key, const char* field, std::size_t& out)
{
    if (!j.contains(key))
        return;
    const auto& v = j.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError(field, "must be an integer");
    const auto x = v.get<long long>();
    if (x <= 0)
        throw ConfigError(field, "budgets must be positive");
    out = static_cast<std::size_t>(x);
}

} // namespace detail

/// Parse a config document. Unknown keys are rejected so that typos surface.
inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw ConfigError("config", "expected a JSON object");
    static const std::vector<std::string> known{"experiment", "distribution", "n",       "N",      "k",
                                                "q",          "t",            "trials",  "budgets", "seed",
                                                "output_dir", "workers",      "budget_scale", "save_points"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(key, "unknown field");

    ExperimentConfig c;
    detail::read_field(j, "experiment", c.experiment);
    detail::read_field(j, "distribution", c.distribution);
    detail::read_field(j, "n", c.n);
    if (j.contains("N")) {
        const auto& v = j.at("N");
        if (v.is_number_integer())
            c.N_grid = {v.get<int>()};
        else
            detail::read_field(j, "N", c.N_grid);
    }
    detail::read_field(j, "k", c.k_list);
    detail::read_field(j, "q", c.q_list);
    detail::read_field(j, "t", c.t_list);
    detail::read_field(j, "trials", c.trials);
    detail::read_field(j, "seed", c.seed);
    detail::read_field(j, "output_dir", c.output_dir);
    detail::read_field(j, "workers", c.workers);
    detail::read_field(j, "budget_scale", c.budget_scale);
    detail::read_field(j, "save_points", c.save_points);
    if (j.contains("budgets")) {
        const auto& b = j.at("budgets");
        if (!b.is_object())
            throw ConfigError("budgets", "expected an object");
        for (const auto& [key, _] : b.items()) {
            const std::string f = "budgets." + key;
            if (key == "sphere")
                detail::read_count(b, "sphere", f.c_str(), c.budgets.sphere);
            else if (key == "subspaces")
                detail::read_count(b, "subspaces", f.c_str(), c.budgets.subspaces);
            else if (key == "directions")
                detail::read_count(b, "directions", f.c_str(), c.budgets.directions);
            else if (key == "volume")
                detail::read_count(b, "volume", f.c_str(), c.budgets.volume);
            else if (key == "interior")
                detail::read_count(b, "interior", f.c_str(), c.budgets.interior);
            else if (key == "sample")
                detail::read_count(b, "sample", f.c_str(), c.budgets.sample);
            else
                throw ConfigError(f, "unknown budget");
        }
    }
    validate(c);
    return c;
}

/// Canonical form; the output directory and worker count are excluded since
/// they do not affect results.
inline nlohmann::json config_to_json(const ExperimentConfig& c)
{
    nlohmann::json j;
    j["experiment"] = c.experiment;
    j["distribution"] = c.distribution;
    j["n"] = c.n;
    j["N"] = c.N_grid;
    j["k"] = c.k_list;
    j["q"] = c.q_list;
    j["t"] = c.t_list;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["budget_scale"] = c.budget_scale;
    j["save_points"] = c.save_points;
    j["budgets"] = {{"sphere", c.budgets.sphere},         {"subspaces", c.budgets.subspaces},
                    {"directions", c.budgets.directions}, {"volume", c.budgets.volume},
                    {"interior", c.budgets.interior},     {"sample", c.budgets.sample}};
    return j;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(j);
}

/// Output root: explicit value, else $RANDPOLY_OUT, else ./randpoly-out.
inline std::string default_output_root(const std::string& explicit_dir = {})
{
    if (!explicit_dir.empty())
        return explicit_dir;
    if (const char* env = std::getenv("RANDPOLY_OUT"); env && *env)
        return env;
    return "randpoly-out";
}

} // namespace randpoly::harness

#endif // RANDPOLY_HARNESS_CONFIG_HPP
