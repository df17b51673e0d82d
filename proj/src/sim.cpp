#include "stopspa/sim.hpp"

#include <cmath>
#include <stdexcept>

#include "stopspa/parallel.hpp"

namespace stopspa {

PathOutcome run_policy(const StoppingModel& model, double theta, double h, std::size_t first_period,
                       std::size_t horizon, RandomStream& rng, std::vector<double>* states) {
    PathOutcome out;
    if (first_period > horizon) return out;
    const auto& kernel = model.kernel();
    const double lambda = model.discount();
    double discount = std::pow(lambda, static_cast<double>(first_period));
    for (std::size_t k = first_period;; ++k) {
        if (states) states->push_back(h);
        if (model.dead(h)) {
            out.died = true;
            break;
        }
        if (h >= theta) {
            out.reward += discount * model.transplant_reward(h);
            out.stop_index = k;
            break;
        }
        out.reward += discount * model.wait_reward(h);
        if (k == horizon) break;
        out.pre_stop_state = h;
        h = kernel.sample_next(h, rng);
        discount *= lambda;
    }
    return out;
}

Trajectory simulate_path(const StoppingModel& model, double theta, double h0, std::size_t horizon,
                         RandomStream& rng) {
    model.require_state(h0, "initial state");
    Trajectory t;
    t.horizon = horizon;
    const auto out = run_policy(model, theta, h0, 0, horizon, rng, &t.states);
    t.stop_index = out.stop_index;
    t.died = out.died;
    t.discounted_reward = out.reward;
    return t;
}

std::vector<ReplicationRecord> simulate_replications(const StoppingModel& model, double theta,
                                                     double h0, std::size_t horizon,
                                                     std::size_t reps,
                                                     const RandomStreamFactory& factory,
                                                     int workers) {
    model.require_state(h0, "initial state");
    model.require_state(theta, "policy threshold");
    std::vector<ReplicationRecord> records(reps);
    parallel_for(reps, workers, [&](std::size_t i) {
        auto rng = factory.stream(i, StreamPurpose::path);
        const auto out = run_policy(model, theta, h0, 0, horizon, rng);
        records[i].v_n = out.reward;
        records[i].stop_index = out.stop_index ? static_cast<long>(*out.stop_index) : -1;
        records[i].died = out.died;
    });
    return records;
}

double truncation_bound(const StoppingModel& model, std::size_t horizon) {
    return std::pow(model.discount(), static_cast<double>(horizon + 1)) * model.value_bound();
}

ValueEstimate estimate_value(const StoppingModel& model, double theta, double h0,
                             std::size_t horizon, std::size_t reps,
                             const RandomStreamFactory& factory, int workers) {
    if (reps < 2) throw std::invalid_argument("estimate_value needs at least 2 replications");
    const auto records = simulate_replications(model, theta, h0, horizon, reps, factory, workers);
    std::vector<double> values(reps);
    for (std::size_t i = 0; i < reps; ++i) values[i] = records[i].v_n;
    const auto s = summarize(values);
    return {s.mean, s.se, reps, truncation_bound(model, horizon)};
}

}  // namespace stopspa
