#include "stopspa/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stopspa/quadrature.hpp"
#include "stopspa/rng.hpp"

namespace stopspa {

void TransitionKernel::require_state(double h, const char* what) const {
    if (!(h >= 0.0 && h <= upper()))
        throw std::domain_error(std::string(what) + " outside [0, H]: " + std::to_string(h));
}

double TransitionKernel::tail_mass(double a, double h_cur) const {
    require_state(a, "tail_mass threshold");
    require_state(h_cur, "tail_mass state");
    if (auto target = atom(h_cur)) return *target >= a ? 1.0 : 0.0;
    const Interval s = support(h_cur);
    const double lo = std::max(a, s.lo);
    if (lo >= s.hi) return 0.0;
    const auto cuts = discontinuities(h_cur);
    const double mass = integrate([&](double x) { return density(x, h_cur); }, lo, s.hi, cuts);
    return std::clamp(mass, 0.0, 1.0);
}

double TransitionKernel::inverse_cdf(double u, double h_cur) const {
    if (auto target = atom(h_cur)) return *target;
    const Interval s = support(h_cur);
    // Smallest x with P(h' < x) >= u, i.e. 1 - tail_mass(x) >= u.
    double lo = s.lo;
    double hi = s.hi;
    for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (1.0 - tail_mass(mid, h_cur) >= u) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

double TransitionKernel::sample_next(double h_cur, RandomStream& rng) const {
    require_state(h_cur, "sample_next state");
    return inverse_cdf(rng.uniform(), h_cur);
}

// ---------------------------------------------------------------------------

double UniformDeteriorationKernel::density(double h_next, double h_cur) const {
    require_state(h_next, "density argument");
    require_state(h_cur, "density state");
    if (h_cur >= 1.0) return 0.0;
    return h_next >= h_cur ? 1.0 / (1.0 - h_cur) : 0.0;
}

double UniformDeteriorationKernel::tail_mass(double a, double h_cur) const {
    require_state(a, "tail_mass threshold");
    require_state(h_cur, "tail_mass state");
    if (h_cur >= 1.0) return 1.0;
    return (1.0 - std::max(a, h_cur)) / (1.0 - h_cur);
}

double UniformDeteriorationKernel::inverse_cdf(double u, double h_cur) const {
    if (h_cur >= 1.0) return 1.0;
    // 1 - h shrinks geometrically, so after a few dozen steps h + (1 - h) u
    // rounds to 1 and would land on the absorbing atom. Keep live paths live.
    return std::min(h_cur + (1.0 - h_cur) * u, std::nextafter(1.0, 0.0));
}

std::optional<double> UniformDeteriorationKernel::atom(double h_cur) const {
    if (h_cur >= 1.0) return 1.0;
    return std::nullopt;
}

double UniformDeteriorationKernel::density_bound(double h_cur) const {
    return h_cur >= 1.0 ? 0.0 : 1.0 / (1.0 - h_cur);
}

// ---------------------------------------------------------------------------

double UniformImprovingKernel::density(double h_next, double h_cur) const {
    require_state(h_next, "density argument");
    require_state(h_cur, "density state");
    if (h_cur >= 1.0) return 0.0;
    return h_next <= 1.0 - h_cur ? 1.0 / (1.0 - h_cur) : 0.0;
}

double UniformImprovingKernel::tail_mass(double a, double h_cur) const {
    require_state(a, "tail_mass threshold");
    require_state(h_cur, "tail_mass state");
    if (h_cur >= 1.0) return a <= 0.0 ? 1.0 : 0.0;
    const double top = 1.0 - h_cur;
    return std::max(0.0, top - a) / top;
}

double UniformImprovingKernel::inverse_cdf(double u, double h_cur) const {
    if (h_cur >= 1.0) return 0.0;
    return (1.0 - h_cur) * u;
}

std::optional<double> UniformImprovingKernel::atom(double h_cur) const {
    if (h_cur >= 1.0) return 0.0;
    return std::nullopt;
}

double UniformImprovingKernel::density_bound(double h_cur) const {
    return h_cur >= 1.0 ? 0.0 : 1.0 / (1.0 - h_cur);
}

// ---------------------------------------------------------------------------

DeterministicDriftKernel::DeterministicDriftKernel(double step, double upper)
    : step_(step), upper_(upper) {
    if (!(step >= 0.0)) throw std::invalid_argument("drift step must be nonnegative");
    if (!(upper > 0.0)) throw std::invalid_argument("state bound must be positive");
}

double DeterministicDriftKernel::tail_mass(double a, double h_cur) const {
    require_state(a, "tail_mass threshold");
    require_state(h_cur, "tail_mass state");
    return std::min(h_cur + step_, upper_) >= a ? 1.0 : 0.0;
}

double DeterministicDriftKernel::inverse_cdf(double, double h_cur) const {
    return std::min(h_cur + step_, upper_);
}

std::optional<double> DeterministicDriftKernel::atom(double h_cur) const {
    return std::min(h_cur + step_, upper_);
}

// ---------------------------------------------------------------------------

IfrReport check_ifr(const TransitionKernel& kernel, std::span<const double> grid, double tol) {
    IfrReport report;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("check_ifr: grid must be strictly increasing");

    std::vector<double> tails(grid.size());
    for (double x0 : grid) {
        for (std::size_t j = 0; j < grid.size(); ++j) tails[j] = kernel.tail_mass(x0, grid[j]);
        // Largest drop b(x1) - b(x2) over x1 < x2 via a running maximum.
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < grid.size(); ++j) {
            if (tails[j - 1] > tails[argmax]) argmax = j - 1;
            const double drop = tails[argmax] - tails[j];
            if (drop > report.worst_drop) {
                report.worst_drop = drop;
                report.x0 = x0;
                report.x1 = grid[argmax];
                report.x2 = grid[j];
            }
        }
    }
    report.pass = report.worst_drop <= tol;
    return report;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = hi;
    return out;
}

KernelPtr make_kernel(const std::string& name, double step) {
    if (name == "uniform-deterioration") return std::make_shared<UniformDeteriorationKernel>();
    if (name == "uniform-improving") return std::make_shared<UniformImprovingKernel>();
    if (name == "deterministic-drift") return std::make_shared<DeterministicDriftKernel>(step);
    throw std::invalid_argument("unknown kernel: " + name);
}

}  // namespace stopspa
