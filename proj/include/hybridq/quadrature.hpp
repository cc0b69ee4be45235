#pragma once

#include <functional>

namespace hybridq {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // Kronrod error estimate
  int intervals = 0;
};

// Globally adaptive Gauss-Kronrod 7/15 on [a, b]. Bisects the interval with
// the largest error until the summed estimate drops below abs_tol.
// Throws NumericalError when max_intervals is hit first.
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                double abs_tol = 1e-9, int max_intervals = 2000);

}  // namespace hybridq
