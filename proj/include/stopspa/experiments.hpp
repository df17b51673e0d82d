#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stopspa/config.hpp"
#include "stopspa/dp.hpp"
#include "stopspa/estimators.hpp"
#include "stopspa/sim.hpp"

namespace stopspa {

/// Where artifacts go and where the human-readable summary is printed.
struct RunContext {
    std::filesystem::path out_dir = ".";
    std::ostream* log = nullptr;
};

/// check.csv: name,applicable,pass,worst,note
AssumptionReport run_check(const ExperimentConfig& config, const RunContext& ctx);

struct SolveResult {
    GridValueFunction value;
    ControlLimitResult limit;
};

/// value.csv: h,value. Throws NonConvergence if value iteration does not converge.
SolveResult run_solve(const ExperimentConfig& config, const RunContext& ctx);

/// The policy threshold: [policy] theta, or the solved control limit for `solve`.
double resolve_theta(const ExperimentConfig& config, const StoppingModel& model);

/// simulate.csv: rep,v_n,stop_index,died (stop_index -1 = no transplant).
/// simulate_summary.csv: theta,N,horizon,mean,se,truncation_bound.
ValueEstimate run_simulate(const ExperimentConfig& config, const RunContext& ctx);

/// gradient.csv: rep,value. gradient_summary.csv: method,theta,N,mean,se.
GradEstimate run_gradient(const ExperimentConfig& config, const RunContext& ctx);

struct SweepCell {
    std::string method;  // SPA, FD, IPA
    double theta = 0.0;
    std::size_t reps = 0;
    std::optional<double> delta;
    double mean = 0.0;
    double se = 0.0;
    double runtime_s = 0.0;
    bool ok = true;
    std::string error;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::size_t failures = 0;
};

/// Cross product theta x N x (method, delta).
///   sweep.csv         method,theta,N,delta,mean,se   (deterministic)
///   sweep_timing.csv  method,theta,N,delta,runtime_s
///   sweep_table.csv   N,theta then mean/se per method column
///   sweep_errors.csv  method,theta,N,delta,error     (only if a cell failed)
/// A failing cell is recorded and the sweep continues.
SweepResult run_sweep(const ExperimentConfig& config, const RunContext& ctx);

/// Seed of one sweep cell. Cells get unrelated streams.
std::uint64_t sweep_cell_seed(std::uint64_t seed, std::size_t column, std::size_t theta_index,
                              std::size_t reps_index);

struct OptimizeStep {
    std::size_t k = 0;
    double theta = 0.0;
    std::optional<double> estimate;
    std::optional<double> se;
};

/// theta_{k+1} = clip(theta_k + a/(k+1) * SPA(theta_k), [clip, H - clip]).
/// optimize.csv: k,theta,estimate,se. The last row holds theta_K with empty
/// estimate fields, so zero iterations give a trace with theta_0 only.
std::vector<OptimizeStep> optimize_theta(const ExperimentConfig& config, const RunContext& ctx);

}  // namespace stopspa
