#include "stopspa/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stopspa/quadrature.hpp"

namespace stopspa {

const char* to_string(Action a) { return a == Action::wait ? "WAIT" : "TRANSPLANT"; }

RewardFunction RewardFunction::constant(double value) {
    if (!(value >= 0.0)) throw std::invalid_argument("reward must be nonnegative");
    return RewardFunction(Constant{value});
}

RewardFunction RewardFunction::linear_decreasing(double intercept, double slope) {
    if (!(intercept >= 0.0)) throw std::invalid_argument("reward intercept must be nonnegative");
    if (!std::isfinite(slope)) throw std::invalid_argument("reward slope must be finite");
    return RewardFunction(LinearDecreasing{intercept, slope});
}

RewardFunction RewardFunction::tabulated(std::vector<double> h, std::vector<double> value) {
    if (h.empty() || h.size() != value.size())
        throw std::invalid_argument("tabulated reward needs matching, non-empty columns");
    for (std::size_t i = 1; i < h.size(); ++i)
        if (!(h[i] > h[i - 1]))
            throw std::invalid_argument("tabulated reward nodes must be strictly increasing");
    for (double v : value)
        if (!(v >= 0.0)) throw std::invalid_argument("reward must be nonnegative");
    return RewardFunction(Tabulated{std::move(h), std::move(value)});
}

double RewardFunction::operator()(double h) const {
    struct Eval {
        double h;
        double operator()(const Constant& c) const { return c.value; }
        double operator()(const LinearDecreasing& l) const {
            return std::max(0.0, l.intercept - l.slope * h);
        }
        double operator()(const Tabulated& t) const {
            if (h <= t.h.front()) return t.value.front();
            if (h >= t.h.back()) return t.value.back();
            const auto it = std::upper_bound(t.h.begin(), t.h.end(), h);
            const std::size_t j = static_cast<std::size_t>(it - t.h.begin());
            const double w = (h - t.h[j - 1]) / (t.h[j] - t.h[j - 1]);
            return (1.0 - w) * t.value[j - 1] + w * t.value[j];
        }
    };
    return std::visit(Eval{h}, spec_);
}

// ---------------------------------------------------------------------------

StoppingModel::StoppingModel(double death_threshold, double discount, RewardFunction wait_reward,
                             RewardFunction transplant_reward, KernelPtr kernel)
    : death_threshold_(death_threshold),
      discount_(discount),
      wait_(std::move(wait_reward)),
      transplant_(std::move(transplant_reward)),
      kernel_(std::move(kernel)) {
    if (!kernel_) throw std::invalid_argument("model needs a kernel");
    if (!(discount_ > 0.0 && discount_ < 1.0))
        throw std::invalid_argument("discount factor must lie in (0, 1)");
    if (!(death_threshold_ > 0.0 && death_threshold_ <= upper()))
        throw std::invalid_argument("death threshold must lie in (0, H]");
    for (double h : linspace(0.0, upper(), 4097)) {
        sup_wait_ = std::max(sup_wait_, wait_(h));
        sup_transplant_ = std::max(sup_transplant_, transplant_(h));
    }
}

double StoppingModel::value_bound() const {
    return std::max(sup_wait_, sup_transplant_) / (1.0 - discount_);
}

void StoppingModel::require_state(double h, const char* what) const {
    if (!(h >= 0.0 && h <= upper()))
        throw std::domain_error(std::string(what) + " outside [0, H]: " + std::to_string(h));
}

double stage_reward(const StoppingModel& model, double h, Action action) {
    model.require_state(h, "stage_reward state");
    return action == Action::transplant ? model.transplant_reward(h) : model.wait_reward(h);
}

// ---------------------------------------------------------------------------

bool AssumptionReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const AssumptionCheck& AssumptionReport::get(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no assumption check named " + name);
}

std::vector<double> assumption_grid(const StoppingModel& model, std::size_t n) {
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = model.death_threshold() * static_cast<double>(i) / static_cast<double>(n);
    return grid;
}

namespace {

AssumptionCheck make_check(const char* name, const char* description) {
    AssumptionCheck c;
    c.name = name;
    c.description = description;
    return c;
}

AssumptionCheck check_monotone_rewards(const StoppingModel& model, std::span<const double> grid,
                                       double tol) {
    auto out = make_check("A1", "c and r nonincreasing in h");
    auto scan = [&](auto&& fn, const char* which) {
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double rise = fn(grid[i]) - fn(grid[i - 1]);
            if (rise > out.worst) {
                out.worst = rise;
                out.witness = {grid[i - 1], grid[i]};
                out.note = which;
            }
        }
    };
    scan([&](double h) { return model.wait_reward(h); }, "c increases");
    scan([&](double h) { return model.transplant_reward(h); }, "r increases");
    out.pass = out.worst <= tol;
    return out;
}

AssumptionCheck check_density(const StoppingModel& model, std::span<const double> grid) {
    auto out = make_check("A2", "kernel has a bounded, normalized density");
    const auto& k = model.kernel();
    double bound = 0.0;
    for (double h : grid) {
        if (k.atom(h)) {
            out.pass = false;
            out.witness = {h};
            out.note = "point-mass state has no density";
            return out;
        }
        const double m = k.density_bound(h);
        bound = std::max(bound, m);
        const auto cuts = k.discontinuities(h);
        const double mass =
            integrate([&](double x) { return k.density(x, h); }, 0.0, k.upper(), cuts);
        const double err = std::abs(mass - 1.0);
        if (err > out.worst) {
            out.worst = err;
            out.witness = {h};
        }
        for (double x : grid) {
            if (k.density(x, h) > m * (1.0 + 1e-12)) {
                out.pass = false;
                out.witness = {x, h};
                out.note = "density exceeds declared bound";
                return out;
            }
        }
    }
    out.pass = out.worst < 1e-8 && std::isfinite(bound);
    out.note = "M = " + std::to_string(bound) + " on grid";
    return out;
}

AssumptionCheck check_death_dominance(const StoppingModel& model, std::span<const double> grid,
                                      double tol) {
    auto out = make_check("A4", "mass in [h0, H_D) nondecreasing in current state");
    if (!model.has_death_region()) {
        out.applicable = false;
        out.note = "death interval empty (H_D = H)";
        return out;
    }
    const auto& k = model.kernel();
    const double hd = model.death_threshold();
    auto band = [&](double h0, double h) { return k.tail_mass(h0, h) - k.tail_mass(hd, h); };
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j)
            for (double h0 : grid) {
                const double excess = band(h0, grid[i]) - band(h0, grid[j]);
                if (excess > out.worst) {
                    out.worst = excess;
                    out.witness = {grid[i], grid[j], h0};
                }
            }
    out.pass = out.worst <= tol;
    return out;
}

AssumptionCheck check_reward_rate(const StoppingModel& model, std::span<const double> grid,
                                  double tol) {
    auto out = make_check("A5", "relative loss in r bounded by added death risk");
    if (!model.has_death_region()) {
        out.applicable = false;
        out.note = "death interval empty (H_D = H)";
        return out;
    }
    const auto& k = model.kernel();
    const double hd = model.death_threshold();
    const double lambda = model.discount();
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            const double r1 = model.transplant_reward(grid[i]);
            const double r2 = model.transplant_reward(grid[j]);
            if (!(r2 > 0.0)) continue;
            const double lhs = (r1 - r2) / r2;
            const double rhs = lambda * (k.tail_mass(hd, grid[j]) - k.tail_mass(hd, grid[i]));
            if (lhs - rhs > out.worst) {
                out.worst = lhs - rhs;
                out.witness = {grid[i], grid[j]};
            }
        }
    out.pass = out.worst <= tol;
    return out;
}

}  // namespace

AssumptionReport check_assumptions(const StoppingModel& model, std::span<const double> grid,
                                   double tol) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] < model.death_threshold()))
            throw std::invalid_argument("assumption grid must lie in [0, H_D)");
        if (i && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("assumption grid must be strictly increasing");
    }
    AssumptionReport report;
    report.checks.push_back(check_monotone_rewards(model, grid, tol));
    report.checks.push_back(check_density(model, grid));

    report.ifr = check_ifr(model.kernel(), grid, tol);
    auto ifr = make_check("A3", "kernel has the IFR property");
    ifr.pass = report.ifr.pass;
    ifr.worst = report.ifr.worst_drop;
    if (!ifr.pass) ifr.witness = {report.ifr.x0, report.ifr.x1, report.ifr.x2};
    report.checks.push_back(ifr);

    report.checks.push_back(check_death_dominance(model, grid, tol));
    report.checks.push_back(check_reward_rate(model, grid, tol));
    return report;
}

}  // namespace stopspa
