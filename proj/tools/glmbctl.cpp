// glmbctl: command-line front end for the GLMB toolkit. Validates and
// runs scenario experiments, executes the randomized oracle suites, and
// inspects serialized densities.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "glmb/cs_divergence.hpp"
#include "glmb/density_io.hpp"
#include "glmb/experiment.hpp"
#include "glmb/oracle/suites.hpp"
#include "glmb/region.hpp"
#include "glmb/scenario.hpp"
#include "glmb/void_probability.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

/// Region query syntax:
///   disc:cx,cy,r          halfspace:nx,ny,offset        box:x0,y0,x1,y1
glmb::Region parse_region(const std::string& spec, const std::vector<int>& dims) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw glmb::ConfigError("region spec needs '<kind>:<numbers>': " + spec);
    }
    const std::string kind = spec.substr(0, colon);
    std::vector<double> v;
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    if (kind == "disc" && v.size() == 3) {
        return glmb::Region::disc(Eigen::Vector2d(v[0], v[1]), v[2], dims);
    }
    if (kind == "halfspace" && v.size() == dims.size() + 1) {
        Eigen::VectorXd normal(static_cast<Eigen::Index>(dims.size()));
        for (std::size_t i = 0; i < dims.size(); ++i) normal[static_cast<Eigen::Index>(i)] = v[i];
        return glmb::Region::half_space(normal, v.back(), dims);
    }
    if (kind == "box" && v.size() == 2 * dims.size()) {
        Eigen::VectorXd lo(static_cast<Eigen::Index>(dims.size()));
        Eigen::VectorXd hi(static_cast<Eigen::Index>(dims.size()));
        for (std::size_t i = 0; i < dims.size(); ++i) {
            lo[static_cast<Eigen::Index>(i)] = v[i];
            hi[static_cast<Eigen::Index>(i)] = v[dims.size() + i];
        }
        return glmb::Region::axis_box(lo, hi, dims);
    }
    throw glmb::ConfigError("bad region spec: " + spec);
}

int cmd_validate(const std::string& path, const std::vector<std::string>& overrides) {
    const glmb::ScenarioConfig cfg = glmb::load_scenario(path, overrides);
    std::cout << "OK: " << cfg.name << " (" << cfg.targets.size() << " targets, "
              << cfg.steps() << " steps, controller " << cfg.controller << ")\n";
    return kExitOk;
}

int cmd_run(const std::string& path, const std::vector<std::string>& overrides,
            std::uint64_t seed, bool seed_set, const std::string& out_dir, int jobs) {
    glmb::ScenarioConfig cfg = glmb::load_scenario(path, overrides);
    if (seed_set) cfg.seed = seed;
    glmb::ExperimentOptions opts;
    opts.jobs = jobs;
    opts.out_dir = out_dir;
    const glmb::ExperimentResult result = glmb::run_experiment(cfg, opts);
    std::cout << "controller=" << cfg.controller << " runs=" << cfg.monte_carlo_runs
              << " aborted=" << result.aborted_runs << " mean_ospa=" << result.mean_ospa
              << " se=" << result.se_ospa << "\n";
    if (!out_dir.empty()) std::cout << "outputs written to " << out_dir << "\n";
    return kExitOk;
}

int cmd_oracle(const std::string& suite, int cases, std::uint64_t seed, int samples) {
    using namespace glmb::oracle;
    std::vector<SuiteResult> results;
    auto want = [&](const std::string& name) { return suite == "all" || suite == name; };
    if (want("cs-divergence")) results.push_back(run_cs_divergence_suite(cases, seed));
    if (want("void-probability")) {
        results.push_back(run_void_probability_suite(cases, samples, seed));
    }
    if (want("k-invariance")) results.push_back(run_k_invariance_suite(cases, seed));
    if (want("union-product")) results.push_back(run_union_product_suite(cases, 5, seed));
    if (want("poisson")) results.push_back(run_poisson_suite(cases, seed));
    if (want("truncation")) results.push_back(run_truncation_suite(cases, seed));
    if (want("filter")) {
        results.push_back(run_filter_conjugacy_suite(cases, seed));
        results.push_back(run_kalman_oracle_suite(cases, seed));
    }
    if (want("ospa")) results.push_back(run_ospa_suite(cases, seed));
    if (results.empty()) {
        std::cerr << "unknown suite '" << suite
                  << "' (try: all, cs-divergence, void-probability, k-invariance, "
                     "union-product, poisson, truncation, filter, ospa)\n";
        return kExitValidation;
    }
    bool all_ok = true;
    for (const auto& r : results) {
        std::cout << to_string(r) << "\n";
        all_ok = all_ok && r.ok();
    }
    return all_ok ? kExitOk : kExitRuntime;
}

int cmd_inspect(const std::string& path, const std::vector<std::string>& region_specs,
                const std::string& csd_path) {
    const glmb::GlmbDensity d = glmb::load_density(path);
    glmb::validate(d);
    std::cout << "components " << d.components.size() << "\n";
    std::cout << "state_dim " << d.state_dim << "\n";
    std::cout << "hypervolume_unit " << d.hypervolume_unit << "\n";
    const auto card = glmb::cardinality_distribution(d);
    std::cout << "cardinality_pmf";
    for (double p : card.pmf) std::cout << " " << p;
    std::cout << "\nexpected_cardinality " << card.mean() << "\n";
    for (const glmb::Label& l : glmb::all_labels(d)) {
        std::cout << "label " << glmb::to_string(l) << " existence "
                  << glmb::intensity_function(d, l).mass << "\n";
    }
    std::vector<int> dims(static_cast<std::size_t>(std::min(d.state_dim, 2)));
    for (std::size_t i = 0; i < dims.size(); ++i) dims[i] = static_cast<int>(i);
    for (const std::string& spec : region_specs) {
        const glmb::Region region = parse_region(spec, dims);
        std::cout << "void_probability " << spec << " "
                  << glmb::glmb_void_probability(d, region) << "\n";
    }
    if (!csd_path.empty()) {
        const glmb::GlmbDensity other = glmb::load_density(csd_path);
        std::cout << "cs_divergence " << glmb::cs_divergence(d, other) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GLMB toolkit: void probabilities, Cauchy-Schwarz divergence, "
                 "multi-target filtering, and sensor control experiments"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;

    auto* validate_cmd = app.add_subcommand("validate", "parse and validate a scenario file");
    validate_cmd->add_option("scenario", scenario_path, "scenario file")->required();
    validate_cmd->add_option("--override", overrides, "key=value override (repeatable)");

    auto* run_cmd = app.add_subcommand("run", "run a scenario experiment");
    run_cmd->add_option("scenario", scenario_path, "scenario file")->required();
    CLI::Option* seed_opt = run_cmd->add_option("--seed", seed, "master seed (overrides the file)");
    run_cmd->add_option("--jobs", jobs, "worker threads (does not change results)");
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--override", overrides, "key=value override (repeatable)");

    std::string suite = "all";
    int cases = 100;
    int samples = 100000;
    auto* oracle_cmd = app.add_subcommand("oracle", "run randomized verification suites");
    oracle_cmd->add_option("suite", suite,
                           "suite name (all, cs-divergence, void-probability, k-invariance, "
                           "union-product, poisson, truncation, filter, ospa)");
    oracle_cmd->add_option("--cases", cases, "randomized cases per suite");
    oracle_cmd->add_option("--samples", samples, "Monte Carlo samples per void case");
    oracle_cmd->add_option("--seed", seed, "suite seed");

    std::string density_path;
    std::string csd_path;
    std::vector<std::string> region_specs;
    auto* inspect_cmd = app.add_subcommand("inspect", "inspect a serialized density");
    inspect_cmd->add_option("density", density_path, "density file")->required();
    inspect_cmd->add_option("--void", region_specs,
                            "region query, e.g. disc:0,0,1 or box:-1,-1,1,1 (repeatable)");
    inspect_cmd->add_option("--csd", csd_path, "second density: print the divergence");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        if (validate_cmd->parsed()) return cmd_validate(scenario_path, overrides);
        if (run_cmd->parsed()) {
            return cmd_run(scenario_path, overrides, seed, seed_set, out_dir, jobs);
        }
        if (oracle_cmd->parsed()) return cmd_oracle(suite, cases, seed, samples);
        if (inspect_cmd->parsed()) return cmd_inspect(density_path, region_specs, csd_path);
    } catch (const glmb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}
