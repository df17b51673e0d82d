#pragma once

#include <cmath>
#include <functional>

#include "stopspa/model.hpp"

namespace fixtures {

// Uniform-deterioration transplant example: c = 0.5, r = 8(1 - h), H = H_D = 1.
inline stopspa::StoppingModel wsc(double lambda = 0.97, double death = 1.0) {
    using stopspa::RewardFunction;
    return stopspa::StoppingModel(death, lambda, RewardFunction::constant(0.5),
                                  RewardFunction::linear_decreasing(8.0, 8.0),
                                  stopspa::make_kernel("uniform-deterioration"));
}

// Infinite-horizon V_theta(0) for wsc, from the renewal equation of the
// uniform kernel solved by hand.
inline double wsc_policy_value(double theta, double lambda = 0.97) {
    const double c = 0.5;
    const double s = 1.0 - theta;
    return c + lambda * (4.0 * std::pow(s, 2.0 - lambda) + c * (1.0 - std::pow(s, 1.0 - lambda)) / (1.0 - lambda));
}

inline double wsc_derivative(double theta, double lambda = 0.97) {
    const double s = 1.0 - theta;
    return lambda * (-4.0 * (2.0 - lambda) * std::pow(s, 1.0 - lambda) + 0.5 * std::pow(s, -lambda));
}

// Plain composite Simpson, independent of the library quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 2000) {
    if (b <= a) return 0.0;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace fixtures
