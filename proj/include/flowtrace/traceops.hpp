#pragma once

#include <vector>

#include "flowtrace/basis.hpp"
#include "flowtrace/domain.hpp"
#include "flowtrace/ode.hpp"

namespace flowtrace {

struct SeeleyTerm {
  double a;
  double b;
};

/// Configuration of the Hardy averaging / extension pipeline.
struct ExtensionConfig {
  Basis basis;      // completed frame Z_1..Z_n, first_layer = k
  double delta = 0.1;  // cutoff half-width of rho_delta
  int quad_order = 12; // Gauss nodes per tau axis
  /// Reflection terms of the Seeley extension: value and first-derivative
  /// matching at t = 0 requires sum a_i = 1 and sum a_i (-b_i) = 1.
  std::vector<SeeleyTerm> seeley = {{3, 1}, {-2, 2}};
  Box V;   // working box for flows
  Box V1;  // x-support of H psi must stay here
  Box V2;  // corpus support box
  FlowSolverConfig ode;

  double b_max() const;
  /// delta_E = b_max * delta: E psi must be evaluable on [0, delta_E) so the
  /// reflection S(E psi)(., t) reaches down to t = -delta.
  double extension_reach() const { return b_max() * delta; }
  void validate() const;
};

/// R phi (x) = phi(x, 0).
ScalarField restrict_to_trace(const ScalarField& phi);

/// H_i: sliding average of psi along the flow of Z_i over [0, t] scaled 1/t
/// for first-layer i, over [0, t^2] scaled 1/t^2 for bracket-layer i
/// (0-based index into cfg.basis).
double hardy_average(const ScalarField& psi, int i, const ExtensionConfig& cfg, const Point& x,
                     double t);

/// H psi (x, t): tensor Gauss quadrature of psi(eta(tau, x)) over the box
/// [0,t]^k x [0,t^2]^{n-k}, eta applied right to left (e^{tau_n Z_n} first).
double extend_H(const ScalarField& psi, const ExtensionConfig& cfg, const Point& x, double t);

/// E psi: H psi for t > 0, psi itself at t = 0. The evaluator accepts
/// t in [0, extension_reach()).
ScalarField extend_E(const ScalarField& psi, const ExtensionConfig& cfg);

/// Seeley reflection: S phi = phi for t >= 0 and sum_i a_i phi(x, -b_i t)
/// for t < 0, defined for t > -delta_E / b_max.
ScalarField seeley_extend(const ScalarField& phi_halfspace, const ExtensionConfig& cfg);

/// rho_delta(t) * S(E psi)(x, t), extended by 0 for |t| >= delta.
ScalarField full_extension(const ScalarField& psi, const ExtensionConfig& cfg);

}  // namespace flowtrace
