// stopspa: config-driven runner for the transplant-timing stopping model.
//
//   stopspa [--config FILE|NAME] [--seed N] [--out DIR] [--workers N] <subcommand> [flags]
//
// Exit codes: 0 ok, 2 invalid config or arguments, 3 non-convergence,
// 4 sweep finished with failed cells, 1 anything else.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "stopspa/experiments.hpp"

#ifndef STOPSPA_SCENARIO_DIR
#define STOPSPA_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace stopspa;

namespace {

ExperimentConfig load(const std::string& name) {
    if (fs::exists(name)) return load_config(name);
    for (const fs::path dir : {fs::path("scenarios"), fs::path(STOPSPA_SCENARIO_DIR)}) {
        const auto p = dir / (name + ".ini");
        if (fs::exists(p)) return load_config(p.string());
    }
    throw ConfigError("no config file or built-in scenario named '" + name + "'");
}

template <class T>
void apply(std::optional<T>& flag, T& target) {
    if (flag) target = *flag;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal transplant timing: value iteration, simulation and SPA gradients"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_name = "wsc-example";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out_dir = ".";
    app.add_option("--config", config_name, "Config file, or a built-in scenario name")
        ->capture_default_str();
    app.add_option("--seed", seed, "Master seed (overrides [run] seed)");
    app.add_option("--out", out_dir, "Directory for CSV artifacts")->capture_default_str();
    app.add_option("--workers", workers, "Worker threads, 0 = all hardware threads")
        ->check(CLI::NonNegativeNumber);

    std::optional<double> theta;
    std::optional<std::size_t> reps;
    std::optional<std::size_t> horizon;
    std::optional<std::string> method;
    std::optional<double> delta;
    std::optional<bool> crn;
    std::optional<std::size_t> aux_reps;
    std::optional<std::size_t> iterations;
    std::optional<double> theta0;
    std::optional<double> step;

    auto* check = app.add_subcommand("check", "Check the structural assumptions on a state grid");
    auto* solve = app.add_subcommand("solve", "Value iteration: V as CSV and the control limit");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo value of a control-limit policy");
    auto* gradient = app.add_subcommand("gradient", "Estimate dV/dtheta with SPA, FD or IPA");
    auto* sweep = app.add_subcommand("sweep", "Grid of gradient estimates over theta, N and method");
    auto* optimize = app.add_subcommand("optimize", "Stochastic gradient ascent on theta with SPA");

    for (auto* sub : {simulate, gradient}) {
        sub->add_option("--theta", theta, "Control limit");
        sub->add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
        sub->add_option("--horizon", horizon, "Simulation horizon n");
    }
    gradient->add_option("--method", method, "spa | fd | ipa");
    gradient->add_option("--delta", delta, "FD width");
    gradient->add_option("--crn", crn, "FD with common random numbers (true/false)");
    gradient->add_option("--aux-reps", aux_reps, "SPA continuations per stop");
    optimize->add_option("--iterations", iterations, "Iteration budget");
    optimize->add_option("--theta0", theta0, "Starting control limit");
    optimize->add_option("--step", step, "a in a_k = a/(k+1)");
    optimize->add_option("--reps", reps, "Replications per gradient")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = load(config_name);
        apply(seed, config.run.seed);
        apply(workers, config.run.workers);
        if (theta) config.policy.theta = *theta;
        if (optimize->parsed()) apply(reps, config.optimize.reps);
        else apply(reps, config.run.reps);
        apply(horizon, config.run.horizon);
        apply(method, config.estimator.method);
        apply(delta, config.estimator.delta);
        apply(crn, config.estimator.crn);
        apply(aux_reps, config.estimator.aux_reps);
        apply(iterations, config.optimize.iterations);
        apply(theta0, config.optimize.theta0);
        apply(step, config.optimize.step);
        config.validate();

        const RunContext ctx{out_dir, &std::cout};
        if (check->parsed()) return run_check(config, ctx).all_pass() ? 0 : 1;
        if (solve->parsed()) run_solve(config, ctx);
        if (simulate->parsed()) run_simulate(config, ctx);
        if (gradient->parsed()) run_gradient(config, ctx);
        if (sweep->parsed() && run_sweep(config, ctx).failures > 0) return 4;
        if (optimize->parsed()) optimize_theta(config, ctx);
        return 0;
    } catch (const NonConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
