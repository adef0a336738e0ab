#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "flowtrace/geometry.hpp"

namespace flowtrace {

/// Adaptive explicit one-step integration settings. The only method shipped
/// is "dopri5", the Dormand-Prince 5(4) pair.
struct FlowSolverConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  double max_step = 0.1;
  std::string method = "dopri5";
  /// Working box: integration fails when an accepted step leaves it.
  std::optional<Box> bounds;

  FlowSolverConfig with_bounds(const Box& b) const {
    FlowSolverConfig c = *this;
    c.bounds = b;
    return c;
  }
  FlowSolverConfig unbounded() const {
    FlowSolverConfig c = *this;
    c.bounds.reset();
    return c;
  }
};

class FlowEscape : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace ode {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-order minus embedded 4th-order weights (error estimator).
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace ode

/// Integrates y' = f(t, y) from t0 to t1 in place with the Dormand-Prince
/// 5(4) pair (FSAL). RHS signature: f(double t, std::span<const double> y,
/// std::span<double> dy). Throws FlowEscape if an accepted step leaves
/// cfg.bounds and StepUnderflow if error control collapses the step size.
template <class RHS>
void integrate(RHS&& f, double t0, double t1, Point& y, const FlowSolverConfig& cfg) {
  if (t0 == t1) return;
  const int n = y.dim();
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span_len = std::abs(t1 - t0);

  if (cfg.rel_tol <= 0 || cfg.abs_tol <= 0)
    throw std::invalid_argument("FlowSolverConfig: tolerances must be positive");
  if (cfg.bounds && !cfg.bounds->contains(y.view(), 1e-12))
    throw FlowEscape("integrate: start point outside the working box");

  Point k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  double t = t0;
  double h = dir * std::min(cfg.max_step, span_len);
  const double hmin = std::max(1e-14, 1e-13 * span_len);

  f(t, y.view(), k1.view());

  for (int iter = 0;; ++iter) {
    if (iter > 100000) throw StepUnderflow("integrate: step limit exceeded");
    if (dir * (t - t1) >= 0) return;
    bool final_step = dir * (t + h - t1) > 0;
    if (final_step) h = t1 - t;
    if (!final_step && std::abs(h) < hmin)
      throw StepUnderflow("integrate: step size underflow");

    using namespace ode;
    for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    f(t + c2 * h, ytmp.view(), k2.view());
    for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * h, ytmp.view(), k3.view());
    for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * h, ytmp.view(), k4.view());
    for (int i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * h, ytmp.view(), k5.view());
    for (int i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(t + h, ytmp.view(), k6.view());
    for (int i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(t + h, ynew.view(), k7.view());

    double err = 0;
    for (int i = 0; i < n; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / n);

    if (!std::isfinite(err)) {
      h *= 0.5;
      continue;
    }

    if (err <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;  // FSAL
      if (cfg.bounds && !cfg.bounds->contains(y.view(), 1e-12))
        throw FlowEscape("integrate: trajectory left the working box");
      double factor = err == 0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      h = dir * std::min(std::abs(h) * factor, cfg.max_step);
    } else {
      double factor = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= factor;
    }
  }
}

}  // namespace flowtrace
