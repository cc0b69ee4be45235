#pragma once

// Explicit Runge-Kutta drivers for Eigen-valued states (vectors or matrices).
//
// dormand_prince: embedded 5(4) pair, FSAL, PI step-size control
// (Hairer, Norsett & Wanner, Solving ODEs I, section II.4).
// rk4: classical fixed-step fourth order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>

#include "hybridq/error.hpp"

namespace hybridq::ode {

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double smallest_step = std::numeric_limits<double>::infinity();
  double largest_step = 0.0;
};

struct Control {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double max_step = std::numeric_limits<double>::infinity();
  double fixed_step = 0.0;  // rk4 only
  std::size_t max_steps = 50'000'000;
};

// Scaled RMS error over all (complex) entries.
template <typename State>
double error_norm(const State& err, const State& y0, const State& y1, const Control& c) {
  double acc = 0.0;
  const auto n = err.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = c.abs_tol + c.rel_tol * std::max(std::abs(y0.data()[i]), std::abs(y1.data()[i]));
    const double r = std::abs(err.data()[i]) / sc;
    acc += r * r;
  }
  return n > 0 ? std::sqrt(acc / double(n)) : 0.0;
}

// Integrates y' = rhs(t, y, dy) over [t0, t1], landing exactly on every time in
// `stops` (sorted, inside (t0, t1]) and calling on_stop(t, y) there.
// post_step(y) runs after every accepted step.
template <typename State, typename Rhs, typename Post, typename OnStop>
StepStats dormand_prince(Rhs&& rhs, State& y, double t0, std::span<const double> stops, const Control& c,
                         Post&& post_step, OnStop&& on_stop) {
  // Butcher tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double safe = 0.9, beta = 0.04, alpha = 0.2 - 0.75 * beta;

  StepStats stats;
  State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
  double t = t0;
  rhs(t, y, k1);
  ++stats.rhs_evaluations;

  // Initial step from the scale of y and y'.
  double h;
  {
    const double d0 = error_norm(y, y, y, c), d1 = error_norm(k1, y, y, c);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, c.max_step);
  }
  double err_prev = 1e-4;
  bool last_rejected = false;

  for (double target : stops) {
    while (t < target) {
      const double remaining = target - t;
      bool lands = false;
      double step = h;
      if (step >= remaining * (1.0 - 1e-12)) {
        step = remaining;
        lands = true;
      }
      // A short final step onto a stop is fine; a collapsing controller is not.
      if (h < 1e-13 * std::max(1.0, std::abs(t))) {
        std::ostringstream os;
        os << "step-size underflow at t=" << t << " (h=" << h << ", tolerances rel=" << c.rel_tol
           << " abs=" << c.abs_tol << "); generator too stiff for the explicit integrator";
        throw NumericalError(os.str());
      }
      if (stats.accepted + stats.rejected >= c.max_steps) throw NumericalError("step budget exhausted");

      ytmp = y + step * a21 * k1;
      rhs(t + c2 * step, ytmp, k2);
      ytmp = y + step * (a31 * k1 + a32 * k2);
      rhs(t + c3 * step, ytmp, k3);
      ytmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * step, ytmp, k4);
      ytmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * step, ytmp, k5);
      ytmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      const double t_new = lands ? target : t + step;
      // Controls may jump exactly at a stop: the stages that sit on it see
      // the left limit, taken slightly inside so rounding in the joins of
      // piecewise schedules cannot put it across.
      const double t_end = lands ? std::max(t, t_new - 1e-12 * std::max(1.0, std::abs(t_new))) : t_new;
      rhs(t_end, ytmp, k6);
      ynew = y + step * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      rhs(t_end, ynew, k7);
      stats.rhs_evaluations += 6;

      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double en = error_norm(err, y, ynew, c);

      if (en <= 1.0 && std::isfinite(en)) {
        const double e = std::max(en, 1e-10);
        double fac = safe * std::pow(e, -alpha) * std::pow(err_prev, beta);
        fac = std::clamp(fac, 0.2, 10.0);
        if (last_rejected) fac = std::min(fac, 1.0);
        err_prev = e;
        last_rejected = false;
        ++stats.accepted;
        stats.smallest_step = std::min(stats.smallest_step, step);
        stats.largest_step = std::max(stats.largest_step, step);
        y.swap(ynew);
        post_step(y);
        t = t_new;
        // FSAL; post_step only removes rounding-level drift.
        if (lands) {
          rhs(t, y, k1);
          ++stats.rhs_evaluations;
        } else {
          k1.swap(k7);
        }
        // Keep the controller's proposal when the step was shortened to land.
        if (!lands || step * fac > h) h = std::min(step * fac, c.max_step);
      } else {
        ++stats.rejected;
        last_rejected = true;
        const double fac = std::isfinite(en) ? std::max(0.2, safe * std::pow(en, -0.2)) : 0.2;
        h = step * fac;
      }
    }
    on_stop(t, y);
  }
  return stats;
}

template <typename State, typename Rhs, typename Post, typename OnStop>
StepStats rk4(Rhs&& rhs, State& y, double t0, std::span<const double> stops, const Control& c, Post&& post_step,
              OnStop&& on_stop) {
  if (!(c.fixed_step > 0.0)) throw PreconditionError("rk4_fixed needs a positive fixed step");
  StepStats stats;
  State k1, k2, k3, k4, ytmp;
  double t = t0;
  for (double target : stops) {
    const double span = target - t;
    if (span > 0.0) {
      const auto n = std::size_t(std::ceil(span / c.fixed_step - 1e-12));
      const double h = span / double(n);
      const double start = t;
      for (std::size_t i = 0; i < n; ++i) {
        rhs(t, y, k1);
        ytmp = y + 0.5 * h * k1;
        rhs(t + 0.5 * h, ytmp, k2);
        ytmp = y + 0.5 * h * k2;
        rhs(t + 0.5 * h, ytmp, k3);
        ytmp = y + h * k3;
        rhs(t + h, ytmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        post_step(y);
        t = (i + 1 == n) ? target : start + double(i + 1) * h;
        stats.rhs_evaluations += 4;
        ++stats.accepted;
      }
      stats.smallest_step = std::min(stats.smallest_step, h);
      stats.largest_step = std::max(stats.largest_step, h);
    }
    on_stop(t, y);
  }
  return stats;
}

}  // namespace hybridq::ode
