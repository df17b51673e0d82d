#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stopspa {

class RandomStream;

/// Closed interval of health states.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Markov kernel for the scalar patient-health state on [0, upper()].
///
/// A kernel either has a density f(h' | h) at a given source state or, for the
/// states listed by atom(), moves deterministically to a single target (Dirac
/// mass). Sampling is inverse-CDF from exactly one uniform per transition so
/// that common random numbers couple paths exactly.
///
/// Kernels are immutable; all randomness comes through the caller's stream.
class TransitionKernel {
public:
    virtual ~TransitionKernel() = default;

    virtual std::string name() const = 0;

    /// Upper bound H of the state space.
    virtual double upper() const = 0;

    /// Density over h_next. Zero at atom source states.
    virtual double density(double h_next, double h_cur) const = 0;

    /// P(h_next >= a | h_cur). The default integrates the density.
    virtual double tail_mass(double a, double h_cur) const;

    /// Maps a uniform u in [0, 1) to a draw from the kernel. The default inverts
    /// tail_mass by bisection.
    virtual double inverse_cdf(double u, double h_cur) const;

    /// Dirac target if h_cur is a point-mass state.
    virtual std::optional<double> atom(double /*h_cur*/) const { return std::nullopt; }

    /// Smallest interval containing the support of the density at h_cur.
    virtual Interval support(double /*h_cur*/) const { return {0.0, upper()}; }

    /// Points in h_next where f(. | h_cur) may jump.
    virtual std::vector<double> discontinuities(double /*h_cur*/) const { return {}; }

    /// sup over h_next of f(h_next | h_cur).
    virtual double density_bound(double h_cur) const = 0;

    double sample_next(double h_cur, RandomStream& rng) const;

protected:
    void require_state(double h, const char* what) const;
};

using KernelPtr = std::shared_ptr<const TransitionKernel>;

/// h' ~ Uniform[h, 1] on the unit interval; h = 1 is absorbing.
class UniformDeteriorationKernel final : public TransitionKernel {
public:
    std::string name() const override { return "uniform-deterioration"; }
    double upper() const override { return 1.0; }
    double density(double h_next, double h_cur) const override;
    double tail_mass(double a, double h_cur) const override;
    double inverse_cdf(double u, double h_cur) const override;
    std::optional<double> atom(double h_cur) const override;
    Interval support(double h_cur) const override { return {h_cur, 1.0}; }
    std::vector<double> discontinuities(double h_cur) const override { return {h_cur}; }
    double density_bound(double h_cur) const override;
};

/// h' ~ Uniform[0, 1 - h]: health improves as h grows. Violates IFR; used as a
/// counterexample for the structural checks. h = 1 jumps to 0.
class UniformImprovingKernel final : public TransitionKernel {
public:
    std::string name() const override { return "uniform-improving"; }
    double upper() const override { return 1.0; }
    double density(double h_next, double h_cur) const override;
    double tail_mass(double a, double h_cur) const override;
    double inverse_cdf(double u, double h_cur) const override;
    std::optional<double> atom(double h_cur) const override;
    Interval support(double h_cur) const override { return {0.0, 1.0 - h_cur}; }
    std::vector<double> discontinuities(double h_cur) const override { return {1.0 - h_cur}; }
    double density_bound(double h_cur) const override;
};

/// Deterministic h' = min(h + step, H). Every state is a point mass.
class DeterministicDriftKernel final : public TransitionKernel {
public:
    DeterministicDriftKernel(double step, double upper = 1.0);
    std::string name() const override { return "deterministic-drift"; }
    double upper() const override { return upper_; }
    double step() const { return step_; }
    double density(double, double) const override { return 0.0; }
    double tail_mass(double a, double h_cur) const override;
    double inverse_cdf(double u, double h_cur) const override;
    std::optional<double> atom(double h_cur) const override;
    double density_bound(double) const override { return 0.0; }

private:
    double step_;
    double upper_;
};

/// Result of the grid-based increasing-failure-rate audit.
struct IfrReport {
    bool pass = true;
    /// Worst violation: b(x1) - b(x2) with x1 < x2, b(x) = tail_mass(x0, x).
    double worst_drop = 0.0;
    double x0 = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
};

inline constexpr double kStructureTol = 1e-9;

/// Checks that tail_mass(x0, x) is nondecreasing in x over the grid, for every
/// x0 in the grid. Grid must be strictly increasing inside [0, H].
IfrReport check_ifr(const TransitionKernel& kernel, std::span<const double> grid,
                    double tol = kStructureTol);

/// n evenly spaced points on [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Builds a kernel from its registered name; `step` is used by
/// deterministic-drift only.
KernelPtr make_kernel(const std::string& name, double step = 0.1);

}  // namespace stopspa
