#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace stopspa {

/// Default panel count for composite Simpson integration.
inline constexpr std::size_t kDefaultPanels = 1024;

/// Composite Simpson rule on [a, b] with `panels` (even) subintervals.
/// Endpoints are sampled one ulp inside the interval, so a jump sitting exactly
/// on an endpoint contributes its one-sided limit.
template <class F>
double simpson(F&& f, double a, double b, std::size_t panels = kDefaultPanels) {
    if (b <= a) return 0.0;
    if (panels < 2) panels = 2;
    if (panels % 2) ++panels;
    const double step = (b - a) / static_cast<double>(panels);
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i < panels; ++i) {
        const double x = a + step * static_cast<double>(i);
        if (i % 2) odd += f(x);
        else even += f(x);
    }
    const double left = f(std::nextafter(a, b));
    const double right = f(std::nextafter(b, a));
    return step / 3.0 * (left + 4.0 * odd + 2.0 * even + right);
}

/// Integrates f over [a, b], splitting at every breakpoint strictly inside the
/// interval so that each piece is smooth. Each piece gets its own Simpson panel.
template <class F>
double integrate(F&& f, double a, double b, std::span<const double> breakpoints,
                 std::size_t panels = kDefaultPanels) {
    if (b <= a) return 0.0;
    std::vector<double> cuts;
    cuts.reserve(breakpoints.size() + 2);
    cuts.push_back(a);
    for (double p : breakpoints)
        if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin() + 1, cuts.end() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += simpson(f, cuts[i], cuts[i + 1], panels);
    return total;
}

template <class F>
double integrate(F&& f, double a, double b, std::size_t panels = kDefaultPanels) {
    return simpson(f, a, b, panels);
}

}  // namespace stopspa
