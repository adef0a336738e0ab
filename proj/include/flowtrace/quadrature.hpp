#pragma once

#include <functional>
#include <span>
#include <vector>

namespace flowtrace {

/// Gauss-Legendre rule on [-1, 1], nodes ascending. Computed once per order
/// by Newton iteration and cached.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

/// Nodes/weights of the order-point rule mapped to [a, b].
GaussRule gauss_on_interval(int order, double a, double b);

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
/// Throws on non-convergence (depth exhausted with the local error still
/// above tolerance).
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-9, int max_depth = 40);

/// Trapezoid rule over explicit sample points (irregular spacing allowed).
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace flowtrace
