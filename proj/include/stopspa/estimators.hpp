#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stopspa/model.hpp"
#include "stopspa/rng.hpp"

namespace stopspa {

enum class GradMethod { spa, fd, ipa };

const char* to_string(GradMethod m);
GradMethod parse_grad_method(const std::string& name);

/// Per-replication derivative estimates of dV/dtheta with their summary.
struct GradEstimate {
    GradMethod method = GradMethod::spa;
    double theta = 0.0;
    std::vector<double> values;
    double mean = 0.0;
    double se = 0.0;
    std::size_t reps = 0;
    std::size_t horizon = 0;
    /// FD only.
    double delta = 0.0;
    bool crn = false;
    /// SPA only.
    std::size_t aux_reps = 0;
};

/// Smoothed perturbation analysis estimate from one replication.
///
/// The nominal path runs under pi_theta on `path`. If it stops at period M >= 1,
/// the estimate is
///
///   hazard * ( lambda^M (c(theta) - r(theta)) + tail ),
///   hazard = f(theta | h_{M-1}) / P(h' >= theta | h_{M-1}),
///
/// where `tail` averages aux_reps continuations on `aux` that wait at state theta
/// in period M and follow pi_theta from period M+1 to the horizon. Paths that never
/// stop (or stop at period 0, where no transition can be perturbed) give 0.
double spa_single_rep(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                      RandomStream& path, RandomStream& aux, std::size_t aux_reps = 1);

/// Replication `rep` of the SPA estimator with streams drawn from `factory`.
double spa_single_rep(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                      const RandomStreamFactory& factory, std::size_t rep,
                      std::size_t aux_reps = 1);

GradEstimate spa_estimate(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                          std::size_t reps, std::size_t aux_reps,
                          const RandomStreamFactory& factory, int workers = 1);

/// (v_n(theta + delta/2) - v_n(theta - delta/2)) / delta for replication `rep`.
/// With crn both evaluations replay the same path stream.
double fd_single_rep(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                     double delta, bool crn, const RandomStreamFactory& factory, std::size_t rep);

GradEstimate fd_estimate(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                         std::size_t reps, double delta, bool crn,
                         const RandomStreamFactory& factory, int workers = 1);

/// The pathwise (IPA) derivative. State trajectories do not depend on theta and
/// g(h, pi_theta(h)) is piecewise constant in theta, so every replication is 0.
GradEstimate ipa_estimate(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                          std::size_t reps, const RandomStreamFactory& factory);

}  // namespace stopspa
