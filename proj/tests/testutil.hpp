#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "flowtrace/geometry.hpp"
#include "flowtrace/vector_field.hpp"

namespace testutil {

using flowtrace::Point;

inline std::mt19937_64 rng(std::uint64_t seed = 0x5eed) { return std::mt19937_64(seed); }

inline Point random_point(std::mt19937_64& gen, int dim, double radius = 1.0) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Point p(dim);
  for (int i = 0; i < dim; ++i) p[i] = u(gen);
  return p;
}

/// Central finite difference of a scalar function along one axis.
inline double central_diff(const std::function<double(std::span<const double>)>& f, Point at,
                           int axis, double h = 1e-5) {
  Point lo = at, hi = at;
  lo[axis] -= h;
  hi[axis] += h;
  return (f(hi.view()) - f(lo.view())) / (2 * h);
}

/// Classic fixed-step RK4 integrator, the reference oracle kept independent
/// of the library's adaptive path.
inline Point rk4_reference(const std::function<Point(double, const Point&)>& f, Point y,
                           double t0, double t1, int steps = 4000) {
  double h = (t1 - t0) / steps;
  double t = t0;
  for (int i = 0; i < steps; ++i) {
    Point k1 = f(t, y);
    Point k2 = f(t + h / 2, y + (h / 2) * k1);
    Point k3 = f(t + h / 2, y + (h / 2) * k2);
    Point k4 = f(t + h, y + h * k3);
    y = y + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  return y;
}

inline Point rk4_flow(const flowtrace::VectorField& Z, const Point& x, double tau,
                      int steps = 4000) {
  auto f = [&](double, const Point& y) { return Z(y.view()); };
  return rk4_reference(f, x, 0, tau, steps);
}

/// Richardson-extrapolated one-sided first derivatives in the last
/// coordinate at t = 0, from both sides. The O(h^2) one-sided stencils are
/// extrapolated once, leaving truncation near 1e-7 at h = 5e-5 for the
/// fields this toolkit produces.
struct OneSidedDerivatives {
  double right;
  double left;
};

inline OneSidedDerivatives one_sided_t_derivatives(
    const std::function<double(double)>& value_at_t, double h = 5e-5) {
  auto stencil = [&](double hh) {
    double r = (-3 * value_at_t(0.0) + 4 * value_at_t(hh) - value_at_t(2 * hh)) / (2 * hh);
    double l = (3 * value_at_t(0.0) - 4 * value_at_t(-hh) + value_at_t(-2 * hh)) / (2 * hh);
    return OneSidedDerivatives{r, l};
  };
  auto d1 = stencil(h);
  auto d2 = stencil(h / 2);
  return {(4 * d2.right - d1.right) / 3, (4 * d2.left - d1.left) / 3};
}

/// Adaptive Simpson quadrature, test-side oracle for integrals.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10, int depth = 30) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole,
          int d) -> double {
    double mid = (lo + hi) / 2;
    double lm = (lo + mid) / 2, rm = (mid + hi) / 2;
    double flm = f(lm), frm = f(rm);
    double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
    double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
    if (d <= 0 || std::abs(left + right - whole) < 15 * tol) {
      return left + right + (left + right - whole) / 15;
    }
    return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
  };
  double flo = f(a), fhi = f(b), fmid = f((a + b) / 2);
  double whole = (b - a) / 6 * (flo + 4 * fmid + fhi);
  return rec(a, b, flo, fmid, fhi, whole, depth);
}

}  // namespace testutil
