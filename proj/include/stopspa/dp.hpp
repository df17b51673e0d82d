#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stopspa/model.hpp"

namespace stopspa {

inline constexpr std::size_t kDefaultGridNodes = 1025;      // 2^10 + 1
inline constexpr std::size_t kOracleGridNodes = 4097;       // 2^12 + 1

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Weights w[i][j] = integral over [0, limit) of phi_j(h') K(dh' | s_i), where
/// phi_j are the hat functions of `nodes`. Applying the operator to nodal values
/// integrates their piecewise-linear interpolant against the kernel.
///
/// Rows are stored as a contiguous column band. Each row is summed left to right
/// in a fixed order, so the parallel and serial applications agree bit for bit.
class TransitionOperator {
public:
    TransitionOperator(const TransitionKernel& kernel, std::vector<double> nodes,
                       std::span<const double> sources, double limit, int workers = 1);

    std::size_t rows() const { return first_.size(); }
    std::size_t cols() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }

    /// Integral of the interpolant of `values` against row i.
    double row_dot(std::size_t i, std::span<const double> values) const;

    /// Row-parallel application (OpenMP when workers > 1).
    void apply(std::span<const double> values, std::span<double> out, int workers) const;
    /// Single-threaded reference of apply().
    void apply_serial(std::span<const double> values, std::span<double> out) const;

    /// Total weight of row i, i.e. the kernel mass of [0, limit) as seen by the nodes.
    double row_mass(std::size_t i) const;

private:
    void build_row(const TransitionKernel& kernel, std::size_t i, double source, double limit);

    std::vector<double> nodes_;
    std::vector<std::size_t> first_;
    std::vector<std::vector<double>> weights_;
};

/// Value function sampled on grid nodes, with solver metadata.
struct GridValueFunction {
    std::vector<double> nodes;
    std::vector<double> values;
    /// Left limit of V at H_D. Values on [H_D, H] are reported as zero.
    double left_limit = 0.0;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    /// V_k <= V_{k+1} held at every node on every step.
    bool monotone_iterates = true;
    double max_decrease = 0.0;
    /// Sup-norm change per iteration.
    std::vector<double> residuals;

    /// Linear interpolation between nodes.
    double operator()(double h) const;
};

/// Uniform grid with n nodes on [0, H].
std::vector<double> uniform_grid(const StoppingModel& model, std::size_t n = kDefaultGridNodes);

/// Grid Bellman operator for the stopping problem:
///   V'(h) = max{ r(h), c(h) + lambda * integral_0^{H_D} V dK(. | h) },  V' = 0 on [H_D, H].
class BellmanOperator {
public:
    BellmanOperator(const StoppingModel& model, std::vector<double> nodes, int workers = 1);

    const std::vector<double>& nodes() const { return op_.nodes(); }

    /// Continuation value c(h) + lambda * integral V dK at each node.
    std::vector<double> continuation(std::span<const double> values, int workers = 1) const;
    std::vector<double> backup(std::span<const double> values, int workers = 1) const;
    std::vector<double> backup_serial(std::span<const double> values) const;

private:
    const StoppingModel& model_;
    TransitionOperator op_;
    std::vector<double> wait_;
    std::vector<double> transplant_;
};

/// One backup of `v` on its own nodes.
GridValueFunction bellman_backup(const StoppingModel& model, const GridValueFunction& v,
                                 int workers = 1);

struct ValueIterationOptions {
    std::size_t nodes = kDefaultGridNodes;
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    int workers = 1;
};

/// Iterates the Bellman operator from V_0 = 0 until the sup-norm change drops
/// below tol or max_iter backups have been made.
GridValueFunction value_iterate(const StoppingModel& model, const ValueIterationOptions& opts = {});

struct ControlLimitResult {
    double theta = 0.0;
    /// The transplant-optimal nodes form an up-set of the live grid.
    bool threshold_structure = true;
    /// Live nodes where waiting is optimal above a transplant-optimal node.
    std::vector<double> violations;
    /// Transplant-optimal nodes.
    std::vector<double> transplant_set;
};

/// Smallest live node where r >= continuation - tol, or H if there is none.
ControlLimitResult extract_control_limit(const StoppingModel& model, const GridValueFunction& v,
                                         double tol = 1e-9, int workers = 1);

struct PolicyEvaluation {
    double value = 0.0;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

struct PolicyValueOptions {
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    int workers = 1;
};

/// Value V_theta(h0) of the control-limit policy. The waiting region [0, theta)
/// is discretized by the grid nodes below theta plus a node at theta itself
/// that carries the left limit; the transplant region uses r exactly. The value
/// is therefore continuous in theta rather than snapped to the grid.
PolicyEvaluation policy_value(const StoppingModel& model, double theta, double h0,
                              std::span<const double> grid, const PolicyValueOptions& opts = {});

/// Central difference (V(theta + d/2) - V(theta - d/2)) / d from policy_value on
/// a grid of at least 2^12 + 1 nodes, refined until the node spacing is below
/// d / 4. Throws NonConvergence if either evaluation fails to converge.
double oracle_derivative(const StoppingModel& model, double theta, double h0,
                         double dtheta = 1e-3, std::size_t nodes = kOracleGridNodes,
                         int workers = 1);

/// Grid node count oracle_derivative will actually use.
std::size_t oracle_grid_nodes(const StoppingModel& model, double dtheta, std::size_t nodes);

}  // namespace stopspa
