#pragma once

#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stopspa/kernel.hpp"

namespace stopspa {

enum class Action { wait, transplant };

const char* to_string(Action a);

/// Reward as a function of health. Built-ins plus tabulated data with linear
/// interpolation (held flat outside the table).
class RewardFunction {
public:
    struct Constant {
        double value;
    };
    /// max(0, intercept - slope * h)
    struct LinearDecreasing {
        double intercept;
        double slope;
    };
    struct Tabulated {
        std::vector<double> h;
        std::vector<double> value;
    };

    static RewardFunction constant(double value);
    static RewardFunction linear_decreasing(double intercept, double slope);
    static RewardFunction tabulated(std::vector<double> h, std::vector<double> value);

    double operator()(double h) const;

    const std::variant<Constant, LinearDecreasing, Tabulated>& spec() const { return spec_; }

private:
    explicit RewardFunction(std::variant<Constant, LinearDecreasing, Tabulated> spec)
        : spec_(std::move(spec)) {}

    std::variant<Constant, LinearDecreasing, Tabulated> spec_;
};

/// Optimal-stopping MDP on [0, H] with death region [H_D, H].
class StoppingModel {
public:
    StoppingModel(double death_threshold, double discount, RewardFunction wait_reward,
                  RewardFunction transplant_reward, KernelPtr kernel);

    double upper() const { return kernel_->upper(); }
    double death_threshold() const { return death_threshold_; }
    double discount() const { return discount_; }
    const TransitionKernel& kernel() const { return *kernel_; }
    const KernelPtr& kernel_ptr() const { return kernel_; }
    const RewardFunction& wait_reward_fn() const { return wait_; }
    const RewardFunction& transplant_reward_fn() const { return transplant_; }

    bool dead(double h) const { return h >= death_threshold_; }
    /// True when [H_D, H] is a proper interval.
    bool has_death_region() const { return death_threshold_ < upper(); }

    /// c(h), zero on the death region.
    double wait_reward(double h) const { return dead(h) ? 0.0 : wait_(h); }
    /// r(h), zero on the death region.
    double transplant_reward(double h) const { return dead(h) ? 0.0 : transplant_(h); }

    double sup_wait_reward() const { return sup_wait_; }
    double sup_transplant_reward() const { return sup_transplant_; }
    /// max(sup c, sup r) / (1 - lambda); bounds every discounted payoff.
    double value_bound() const;

    void require_state(double h, const char* what) const;

private:
    double death_threshold_;
    double discount_;
    RewardFunction wait_;
    RewardFunction transplant_;
    KernelPtr kernel_;
    double sup_wait_ = 0.0;
    double sup_transplant_ = 0.0;
};

/// g(h, a): r(h) on transplant, c(h) on wait, zero once dead.
double stage_reward(const StoppingModel& model, double h, Action action);

/// Stationary threshold policy: wait below theta, transplant at or above it.
class ControlLimitPolicy {
public:
    explicit ControlLimitPolicy(double theta) : theta_(theta) {}
    double theta() const { return theta_; }
    Action action(double h) const { return h < theta_ ? Action::wait : Action::transplant; }

private:
    double theta_;
};

inline Action policy_action(const ControlLimitPolicy& policy, double h) {
    return policy.action(h);
}

/// One audited condition. `applicable == false` means the condition is vacuous
/// for this model and counts as a pass.
struct AssumptionCheck {
    std::string name;
    std::string description;
    bool applicable = true;
    bool pass = true;
    double worst = 0.0;
    std::vector<double> witness;
    std::string note;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    IfrReport ifr;
    bool all_pass() const;
    const AssumptionCheck& get(const std::string& name) const;
};

/// Sufficient-condition audit for the threshold-structure result. Grid must be
/// strictly increasing in [0, H_D). Never throws on a failed condition.
AssumptionReport check_assumptions(const StoppingModel& model, std::span<const double> grid,
                                   double tol = kStructureTol);

/// Default audit grid: n points on [0, H_D), excluding H_D itself.
std::vector<double> assumption_grid(const StoppingModel& model, std::size_t n = 101);

}  // namespace stopspa
