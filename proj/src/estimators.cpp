#include "stopspa/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "stopspa/parallel.hpp"
#include "stopspa/sim.hpp"

namespace stopspa {

const char* to_string(GradMethod m) {
    switch (m) {
        case GradMethod::spa: return "SPA";
        case GradMethod::fd: return "FD";
        case GradMethod::ipa: return "IPA";
    }
    return "?";
}

GradMethod parse_grad_method(const std::string& name) {
    if (name == "spa" || name == "SPA") return GradMethod::spa;
    if (name == "fd" || name == "FD") return GradMethod::fd;
    if (name == "ipa" || name == "IPA") return GradMethod::ipa;
    throw std::invalid_argument("unknown gradient method: " + name);
}

namespace {

void finish(GradEstimate& g) {
    const auto s = summarize(g.values);
    g.mean = s.mean;
    g.se = s.se;
    g.reps = g.values.size();
}

}  // namespace

double spa_single_rep(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                      RandomStream& path, RandomStream& aux, std::size_t aux_reps) {
    if (!(theta > 0.0 && theta < model.upper()))
        throw std::domain_error("SPA needs theta inside (0, H)");
    if (aux_reps < 1) throw std::invalid_argument("SPA needs at least one auxiliary subpath");
    model.require_state(h0, "initial state");

    const auto nominal = run_policy(model, theta, h0, 0, horizon, path);
    if (!nominal.stop_index || *nominal.stop_index == 0) return 0.0;
    const std::size_t stop = *nominal.stop_index;

    const auto& kernel = model.kernel();
    const double prev = nominal.pre_stop_state;
    const double tail_prob = kernel.tail_mass(theta, prev);
    if (!(tail_prob > 0.0))
        throw std::logic_error("SPA hazard undefined: stopping event has zero probability");
    const double hazard = kernel.density(theta, prev) / tail_prob;
    if (hazard == 0.0) return 0.0;

    double tail = 0.0;
    if (stop + 1 <= horizon) {
        for (std::size_t a = 0; a < aux_reps; ++a) {
            const double next = kernel.sample_next(theta, aux);
            tail += run_policy(model, theta, next, stop + 1, horizon, aux).reward;
        }
        tail /= static_cast<double>(aux_reps);
    }
    const double lambda_m = std::pow(model.discount(), static_cast<double>(stop));
    const double jump = lambda_m * (model.wait_reward(theta) - model.transplant_reward(theta));
    return hazard * (jump + tail);
}

double spa_single_rep(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                      const RandomStreamFactory& factory, std::size_t rep, std::size_t aux_reps) {
    auto path = factory.stream(rep, StreamPurpose::path);
    auto aux = factory.stream(rep, StreamPurpose::auxiliary);
    return spa_single_rep(model, theta, h0, horizon, path, aux, aux_reps);
}

GradEstimate spa_estimate(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                          std::size_t reps, std::size_t aux_reps,
                          const RandomStreamFactory& factory, int workers) {
    if (reps < 2) throw std::invalid_argument("spa_estimate needs at least 2 replications");
    GradEstimate g;
    g.method = GradMethod::spa;
    g.theta = theta;
    g.horizon = horizon;
    g.aux_reps = aux_reps;
    g.values = replicate(reps, workers, [&](std::size_t i) {
        return spa_single_rep(model, theta, h0, horizon, factory, i, aux_reps);
    });
    finish(g);
    return g;
}

double fd_single_rep(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                     double delta, bool crn, const RandomStreamFactory& factory, std::size_t rep) {
    auto plus_rng = factory.stream(rep, StreamPurpose::path);
    auto minus_rng = factory.stream(rep, crn ? StreamPurpose::path : StreamPurpose::fd_minus);
    const double plus = run_policy(model, theta + 0.5 * delta, h0, 0, horizon, plus_rng).reward;
    const double minus = run_policy(model, theta - 0.5 * delta, h0, 0, horizon, minus_rng).reward;
    return (plus - minus) / delta;
}

GradEstimate fd_estimate(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                         std::size_t reps, double delta, bool crn,
                         const RandomStreamFactory& factory, int workers) {
    if (!(delta > 0.0)) throw std::invalid_argument("FD step must be positive");
    if (!(theta - 0.5 * delta >= 0.0 && theta + 0.5 * delta <= model.upper()))
        throw std::domain_error("theta +- delta/2 must stay inside [0, H]");
    if (reps < 2) throw std::invalid_argument("fd_estimate needs at least 2 replications");
    model.require_state(h0, "initial state");
    GradEstimate g;
    g.method = GradMethod::fd;
    g.theta = theta;
    g.horizon = horizon;
    g.delta = delta;
    g.crn = crn;
    g.values = replicate(reps, workers, [&](std::size_t i) {
        return fd_single_rep(model, theta, h0, horizon, delta, crn, factory, i);
    });
    finish(g);
    return g;
}

GradEstimate ipa_estimate(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                          std::size_t reps, const RandomStreamFactory&) {
    model.require_state(theta, "policy threshold");
    model.require_state(h0, "initial state");
    GradEstimate g;
    g.method = GradMethod::ipa;
    g.theta = theta;
    g.horizon = horizon;
    g.values.assign(reps, 0.0);
    finish(g);
    return g;
}

}  // namespace stopspa
