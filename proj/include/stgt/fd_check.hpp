#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "stgt/tensor.hpp"

namespace stgt {

// Central-difference gradient oracle. `value_fn` evaluates the scalar map at
// an arbitrary point; `analytic_grad` is the gradient under test at `point`.
// Returns max over coordinates of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
inline double finite_difference_check(
    const std::function<double(std::span<const double>)>& value_fn,
    std::span<const double> point,
    std::span<const double> analytic_grad,
    double epsilon = 1e-5) {
    if (point.size() != analytic_grad.size()) {
        throw ConfigError("finite_difference_check: point/grad size mismatch");
    }
    for (double g : analytic_grad) {
        if (!std::isfinite(g)) throw NumericError("finite_difference_check: non-finite gradient");
    }
    std::vector<double> x(point.begin(), point.end());
    double max_rel = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double saved = x[i];
        x[i] = saved + epsilon;
        double fp = value_fn(x);
        x[i] = saved - epsilon;
        double fm = value_fn(x);
        x[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NumericError("finite_difference_check: non-finite function value");
        }
        double numeric = (fp - fm) / (2.0 * epsilon);
        double denom = std::max({std::fabs(analytic_grad[i]), std::fabs(numeric), 1e-8});
        double rel = std::fabs(analytic_grad[i] - numeric) / denom;
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace stgt
