#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stopspa/model.hpp"

namespace stopspa {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Reward description as written in a config file.
struct RewardSpec {
    std::string kind = "constant";  // constant | linear-decreasing | tabulated
    double value = 0.0;
    double intercept = 0.0;
    double slope = 0.0;
    std::vector<std::pair<double, double>> points;

    RewardFunction build() const;
};

/// Experiment description. Sections map one-to-one onto INI sections:
/// [model] [kernel] [policy] [run] [estimator] [sweep] [optimize] [solve].
struct ExperimentConfig {
    struct Model {
        double upper = 1.0;
        double death_threshold = 1.0;
        double discount = 0.97;
        RewardSpec wait{"constant", 0.5, 0.0, 0.0, {}};
        RewardSpec transplant{"linear-decreasing", 0.0, 8.0, 8.0, {}};
    } model;
    struct Kernel {
        std::string name = "uniform-deterioration";
        double step = 0.1;
    } kernel;
    struct Policy {
        /// Empty means "solve": use the control limit from value iteration.
        std::optional<double> theta = 0.5;
    } policy;
    struct Run {
        double h0 = 0.0;
        std::size_t horizon = 200;
        std::size_t reps = 10000;
        std::uint64_t seed = 20240101;
        int workers = 0;
    } run;
    struct Estimator {
        std::string method = "spa";
        double delta = 0.01;
        bool crn = true;
        std::size_t aux_reps = 1;
    } estimator;
    struct Sweep {
        std::vector<double> thetas{0.2, 0.5, 0.8};
        std::vector<std::size_t> reps{100, 10000, 1000000};
        std::vector<std::string> methods{"spa", "fd"};
        std::vector<double> deltas{0.01, 0.05, 0.1};
    } sweep;
    struct Optimize {
        double theta0 = 0.5;
        std::size_t iterations = 500;
        double step = 0.1;
        std::size_t reps = 1000;
        double clip = 0.01;
    } optimize;
    struct Solve {
        std::size_t nodes = 1025;
        double tol = 1e-10;
        std::size_t max_iter = 100000;
    } solve;

    /// Throws ConfigError on any out-of-range or unresolvable value.
    void validate() const;

    StoppingModel build_model() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// INI text that parse_config reads back to an identical config.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace stopspa
