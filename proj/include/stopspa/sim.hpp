#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "stopspa/model.hpp"
#include "stopspa/rng.hpp"

namespace stopspa {

inline constexpr std::size_t kDefaultHorizon = 200;

/// One simulated path under a control-limit policy.
struct Trajectory {
    /// h_0 .. h_k, ending at the stop, the death entry, or the horizon.
    std::vector<double> states;
    /// Period M at which TRANSPLANT fired.
    std::optional<std::size_t> stop_index;
    bool died = false;
    std::size_t horizon = 0;
    /// v_n(theta) = sum_k lambda^k g(h_k, pi_theta(h_k)).
    double discounted_reward = 0.0;
};

/// Summary of a path segment, without the state history.
struct PathOutcome {
    double reward = 0.0;
    std::optional<std::size_t> stop_index;
    bool died = false;
    /// State one period before the stop (h_{M-1}); meaningful only when the stop
    /// happened after the first simulated period.
    double pre_stop_state = 0.0;
};

/// Runs the policy from state `h` at period `first_period` through period
/// `horizon`, accruing lambda^k g(h_k, pi_theta(h_k)). One uniform is consumed
/// per transition. States are appended to `states` when it is non-null.
PathOutcome run_policy(const StoppingModel& model, double theta, double h, std::size_t first_period,
                       std::size_t horizon, RandomStream& rng, std::vector<double>* states = nullptr);

Trajectory simulate_path(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                         RandomStream& rng);

struct ReplicationRecord {
    double v_n = 0.0;
    /// -1 when no transplant happened.
    long stop_index = -1;
    bool died = false;
};

/// Independent replications; replication i uses factory.stream(i).
std::vector<ReplicationRecord> simulate_replications(const StoppingModel& model, double theta,
                                                     double h0, std::size_t horizon,
                                                     std::size_t reps,
                                                     const RandomStreamFactory& factory,
                                                     int workers = 1);

struct ValueEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t reps = 0;
    /// lambda^{n+1} * value bound: the most the truncated tail can be worth.
    double truncation_bound = 0.0;
};

ValueEstimate estimate_value(const StoppingModel& model, double theta, double h0,
                             std::size_t horizon, std::size_t reps,
                             const RandomStreamFactory& factory, int workers = 1);

double truncation_bound(const StoppingModel& model, std::size_t horizon);

}  // namespace stopspa
