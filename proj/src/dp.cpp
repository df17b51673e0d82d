#include "stopspa/dp.hpp"

#include <algorithm>
#include <cmath>

#include "stopspa/parallel.hpp"
#include "stopspa/quadrature.hpp"

namespace stopspa {

TransitionOperator::TransitionOperator(const TransitionKernel& kernel, std::vector<double> nodes,
                                       std::span<const double> sources, double limit, int workers)
    : nodes_(std::move(nodes)), first_(sources.size(), 0), weights_(sources.size()) {
    if (nodes_.empty()) throw std::invalid_argument("transition operator needs nodes");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1]))
            throw std::invalid_argument("operator nodes must be strictly increasing");
    parallel_for(sources.size(), workers,
                 [&](std::size_t i) { build_row(kernel, i, sources[i], limit); });
}

void TransitionOperator::build_row(const TransitionKernel& kernel, std::size_t i, double source,
                                   double limit) {
    const std::size_t n = nodes_.size();
    auto& w = weights_[i];

    if (const auto target = kernel.atom(source)) {
        const double y = *target;
        if (y >= limit) return;
        if (n == 1 || y <= nodes_.front()) {
            first_[i] = 0;
            w = {1.0};
        } else if (y >= nodes_.back()) {
            first_[i] = n - 1;
            w = {1.0};
        } else {
            const auto k = static_cast<std::size_t>(
                std::upper_bound(nodes_.begin(), nodes_.end(), y) - nodes_.begin() - 1);
            const double t = (y - nodes_[k]) / (nodes_[k + 1] - nodes_[k]);
            first_[i] = k;
            w = {1.0 - t, t};
        }
        return;
    }

    if (n == 1) return;
    const Interval support = kernel.support(source);
    const double a = std::max({support.lo, nodes_.front(), 0.0});
    const double b = std::min({support.hi, limit, nodes_.back()});
    if (!(b > a)) return;

    auto cell_of = [&](double x) {
        auto k = static_cast<std::size_t>(
            std::upper_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin());
        k = k == 0 ? 0 : k - 1;
        return std::min(k, n - 2);
    };
    const std::size_t k0 = cell_of(a);
    const std::size_t k1 = cell_of(std::nextafter(b, a));
    first_[i] = k0;
    w.assign(k1 - k0 + 2, 0.0);

    std::vector<double> cuts = kernel.discontinuities(source);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> pieces;
    for (std::size_t k = k0; k <= k1; ++k) {
        const double xl = nodes_[k];
        const double xr = nodes_[k + 1];
        const double lo = std::max(a, xl);
        const double hi = std::min(b, xr);
        if (!(hi > lo)) continue;
        pieces.assign({lo});
        for (double c : cuts)
            if (c > lo && c < hi) pieces.push_back(c);
        pieces.push_back(hi);
        const double width = xr - xl;
        // Two-panel Simpson per smooth piece; exact for piecewise-constant densities.
        for (std::size_t p = 0; p + 1 < pieces.size(); ++p) {
            const double u = pieces[p];
            const double v = pieces[p + 1];
            const double xs[3] = {u, 0.5 * (u + v), v};
            const double fx[3] = {kernel.density(std::nextafter(u, v), source),
                                  kernel.density(xs[1], source),
                                  kernel.density(std::nextafter(v, u), source)};
            constexpr double coef[3] = {1.0, 4.0, 1.0};
            double wl = 0.0;
            double wr = 0.0;
            for (int q = 0; q < 3; ++q) {
                const double right = (xs[q] - xl) / width;
                wl += coef[q] * fx[q] * (1.0 - right);
                wr += coef[q] * fx[q] * right;
            }
            const double scale = (v - u) / 6.0;
            w[k - k0] += scale * wl;
            w[k - k0 + 1] += scale * wr;
        }
    }
}

double TransitionOperator::row_dot(std::size_t i, std::span<const double> values) const {
    const auto& w = weights_[i];
    const double* v = values.data() + first_[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * v[j];
    return acc;
}

double TransitionOperator::row_mass(std::size_t i) const {
    double acc = 0.0;
    for (double x : weights_[i]) acc += x;
    return acc;
}

void TransitionOperator::apply(std::span<const double> values, std::span<double> out,
                               int workers) const {
    parallel_for(rows(), workers, [&](std::size_t i) { out[i] = row_dot(i, values); });
}

void TransitionOperator::apply_serial(std::span<const double> values, std::span<double> out) const {
    for (std::size_t i = 0; i < rows(); ++i) out[i] = row_dot(i, values);
}

// ---------------------------------------------------------------------------

double GridValueFunction::operator()(double h) const {
    if (nodes.empty()) return 0.0;
    if (h <= nodes.front()) return values.front();
    if (h >= nodes.back()) return values.back();
    const auto k = static_cast<std::size_t>(
        std::upper_bound(nodes.begin(), nodes.end(), h) - nodes.begin() - 1);
    const double t = (h - nodes[k]) / (nodes[k + 1] - nodes[k]);
    return (1.0 - t) * values[k] + t * values[k + 1];
}

std::vector<double> uniform_grid(const StoppingModel& model, std::size_t n) {
    auto grid = linspace(0.0, model.upper(), std::max<std::size_t>(n, 2));
    const double hd = model.death_threshold();
    if (!std::binary_search(grid.begin(), grid.end(), hd))
        grid.insert(std::upper_bound(grid.begin(), grid.end(), hd), hd);
    return grid;
}

namespace {

/// Live nodes below `end`, then `end` itself carrying the left limit there.
std::vector<double> solver_nodes(std::span<const double> grid, double end) {
    std::vector<double> nodes;
    for (double x : grid)
        if (x < end) nodes.push_back(x);
    nodes.push_back(end);
    return nodes;
}

/// The state used to evaluate the left-limit node. At H_D the kernel may put its
/// mass into the death region exactly there, so step one ulp inside.
double left_limit_source(const StoppingModel& model, double end) {
    return end >= model.death_threshold() ? std::nextafter(end, 0.0) : end;
}

double sup_diff(std::span<const double> a, std::span<const double> b, double* max_decrease) {
    double change = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        change = std::max(change, std::abs(b[i] - a[i]));
        if (max_decrease) *max_decrease = std::max(*max_decrease, a[i] - b[i]);
    }
    return change;
}

}  // namespace

// ---------------------------------------------------------------------------
// The Bellman operator acts on the solver nodes: grid nodes below H_D plus H_D
// itself (left limit). Grid nodes at or above H_D are reported as zero.

namespace {

std::vector<double> bellman_sources(const StoppingModel& model, const std::vector<double>& nodes) {
    std::vector<double> sources(nodes);
    sources.back() = left_limit_source(model, nodes.back());
    return sources;
}

}  // namespace

BellmanOperator::BellmanOperator(const StoppingModel& model, std::vector<double> nodes, int workers)
    : model_(model),
      op_(model.kernel(), solver_nodes(nodes, model.death_threshold()),
          bellman_sources(model, solver_nodes(nodes, model.death_threshold())),
          model.death_threshold(), workers) {
    const auto& sn = op_.nodes();
    wait_.resize(sn.size());
    transplant_.resize(sn.size());
    for (std::size_t i = 0; i < sn.size(); ++i) {
        // Raw rewards: the end node is the left limit at H_D, not a dead state.
        wait_[i] = model.wait_reward_fn()(sn[i]);
        transplant_[i] = model.transplant_reward_fn()(sn[i]);
    }
}

std::vector<double> BellmanOperator::continuation(std::span<const double> values,
                                                  int workers) const {
    std::vector<double> out(op_.rows());
    op_.apply(values, out, workers);
    const double lambda = model_.discount();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = wait_[i] + lambda * out[i];
    return out;
}

std::vector<double> BellmanOperator::backup(std::span<const double> values, int workers) const {
    auto out = continuation(values, workers);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(transplant_[i], out[i]);
    return out;
}

std::vector<double> BellmanOperator::backup_serial(std::span<const double> values) const {
    std::vector<double> out(op_.rows());
    op_.apply_serial(values, out);
    const double lambda = model_.discount();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::max(transplant_[i], wait_[i] + lambda * out[i]);
    return out;
}

namespace {

std::vector<double> to_solver(const StoppingModel& model, const GridValueFunction& v) {
    std::vector<double> out;
    for (std::size_t i = 0; i < v.nodes.size(); ++i)
        if (v.nodes[i] < model.death_threshold()) out.push_back(v.values[i]);
    out.push_back(v.left_limit);
    return out;
}

void from_solver(const StoppingModel& model, std::span<const double> solver, GridValueFunction& v) {
    std::size_t j = 0;
    for (std::size_t i = 0; i < v.nodes.size(); ++i)
        v.values[i] = v.nodes[i] < model.death_threshold() ? solver[j++] : 0.0;
    v.left_limit = solver.back();
}

}  // namespace

GridValueFunction bellman_backup(const StoppingModel& model, const GridValueFunction& v,
                                 int workers) {
    BellmanOperator op(model, v.nodes, workers);
    GridValueFunction out = v;
    from_solver(model, op.backup(to_solver(model, v), workers), out);
    out.iterations = v.iterations + 1;
    return out;
}

GridValueFunction value_iterate(const StoppingModel& model, const ValueIterationOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("value iteration tolerance must be positive");
    GridValueFunction v;
    v.nodes = uniform_grid(model, opts.nodes);
    v.values.assign(v.nodes.size(), 0.0);
    v.residual = std::numeric_limits<double>::infinity();

    BellmanOperator op(model, v.nodes, opts.workers);
    std::vector<double> current(op.nodes().size(), 0.0);
    for (std::size_t k = 0; k < opts.max_iter; ++k) {
        auto next = op.backup(current, opts.workers);
        double decrease = 0.0;
        v.residual = sup_diff(current, next, &decrease);
        v.max_decrease = std::max(v.max_decrease, decrease);
        if (decrease > 0.0) v.monotone_iterates = false;
        v.residuals.push_back(v.residual);
        current = std::move(next);
        v.iterations = k + 1;
        if (v.residual < opts.tol) {
            v.converged = true;
            break;
        }
    }
    from_solver(model, current, v);
    return v;
}

ControlLimitResult extract_control_limit(const StoppingModel& model, const GridValueFunction& v,
                                         double tol, int workers) {
    BellmanOperator op(model, v.nodes, workers);
    const auto cont = op.continuation(to_solver(model, v), workers);
    const auto& nodes = op.nodes();

    ControlLimitResult out;
    out.theta = model.upper();
    bool seen = false;
    // The last solver node is the left limit at H_D, not a live state.
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const bool transplant = model.transplant_reward(nodes[i]) >= cont[i] - tol;
        if (transplant) {
            out.transplant_set.push_back(nodes[i]);
            if (!seen) out.theta = nodes[i];
            seen = true;
        } else if (seen) {
            out.violations.push_back(nodes[i]);
        }
    }
    out.threshold_structure = out.violations.empty();
    return out;
}

// ---------------------------------------------------------------------------

PolicyEvaluation policy_value(const StoppingModel& model, double theta, double h0,
                              std::span<const double> grid, const PolicyValueOptions& opts) {
    model.require_state(theta, "policy threshold");
    model.require_state(h0, "initial state");
    PolicyEvaluation out;
    if (model.dead(h0)) {
        out.converged = true;
        return out;
    }
    if (h0 >= theta) {
        out.value = model.transplant_reward(h0);
        out.converged = true;
        return out;
    }

    const auto& kernel = model.kernel();
    const double hd = model.death_threshold();
    const double lambda = model.discount();
    const double end = std::min(theta, hd);
    auto nodes = solver_nodes(grid, end);
    std::vector<double> sources(nodes);
    sources.back() = left_limit_source(model, end);
    sources.push_back(h0);

    TransitionOperator op(kernel, nodes, sources, end, opts.workers);

    // Reward collected by landing in the transplant region [theta, H_D).
    auto transplant_mass = [&](double s) {
        if (const auto y = kernel.atom(s)) return (*y >= theta && *y < hd) ? model.transplant_reward(*y) : 0.0;
        if (theta >= hd) return 0.0;
        const Interval sup = kernel.support(s);
        const double lo = std::max(theta, sup.lo);
        const double hi = std::min(hd, sup.hi);
        if (!(hi > lo)) return 0.0;
        const auto cuts = kernel.discontinuities(s);
        return integrate([&](double x) { return model.transplant_reward(x) * kernel.density(x, s); },
                         lo, hi, cuts);
    };

    const std::size_t m = nodes.size();
    std::vector<double> base(sources.size());
    parallel_for(sources.size(), opts.workers, [&](std::size_t i) {
        base[i] = model.wait_reward_fn()(std::min(sources[i], end)) +
                  lambda * transplant_mass(sources[i]);
    });

    std::vector<double> current(m, 0.0);
    std::vector<double> next(m, 0.0);
    out.residual = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < opts.max_iter; ++k) {
        parallel_for(m, opts.workers,
                     [&](std::size_t i) { next[i] = base[i] + lambda * op.row_dot(i, current); });
        out.residual = sup_diff(current, next, nullptr);
        std::swap(current, next);
        out.iterations = k + 1;
        if (out.residual < opts.tol) {
            out.converged = true;
            break;
        }
    }
    out.value = base[m] + lambda * op.row_dot(m, current);
    return out;
}

std::size_t oracle_grid_nodes(const StoppingModel& model, double dtheta, std::size_t nodes) {
    std::size_t n = std::max(nodes, kOracleGridNodes);
    // Spacing below dtheta / 4 so that theta +- dtheta/2 always sit in distinct cells.
    while (model.upper() / static_cast<double>(n - 1) >= dtheta / 4.0) n = 2 * n - 1;
    return n;
}

double oracle_derivative(const StoppingModel& model, double theta, double h0, double dtheta,
                         std::size_t nodes, int workers) {
    if (!(dtheta > 0.0)) throw std::invalid_argument("dtheta must be positive");
    const double lo = theta - 0.5 * dtheta;
    const double hi = theta + 0.5 * dtheta;
    if (!(lo > 0.0 && hi < model.upper()))
        throw std::domain_error("theta +- dtheta/2 must lie inside (0, H)");
    const auto grid = uniform_grid(model, oracle_grid_nodes(model, dtheta, nodes));
    PolicyValueOptions opts;
    opts.workers = workers;
    const auto up = policy_value(model, hi, h0, grid, opts);
    const auto down = policy_value(model, lo, h0, grid, opts);
    if (!up.converged || !down.converged)
        throw NonConvergence("policy evaluation did not converge");
    return (up.value - down.value) / dtheta;
}

}  // namespace stopspa
