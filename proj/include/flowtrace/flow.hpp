#pragma once

#include <span>
#include <vector>

#include "flowtrace/basis.hpp"
#include "flowtrace/ode.hpp"
#include "flowtrace/vector_field.hpp"

namespace flowtrace {

/// e^{tau Z} x: the integral curve of Z through x, evaluated at time tau.
Point flow(const VectorField& Z, const Point& x, double tau, const FlowSolverConfig& cfg);

/// eta(tau, x) = e^{tau_1 Z_1} o ... o e^{tau_n Z_n} x, applied right to
/// left (e^{tau_n Z_n} first).
Point flow_compose(const Basis& basis, std::span<const double> taus, const Point& x,
                   const FlowSolverConfig& cfg);

/// Group-commutator approximation of e^{s [Z1, Z2]}: the four-fold flow
/// composition with sqrt(|s|) time steps, branch chosen by sign(s). For
/// s >= 0 this is e^{-r Z2} e^{-r Z1} e^{r Z2} e^{r Z1}(y), r = sqrt(s).
Point commutator_flow(const VectorField& Z1, const VectorField& Z2, double s, const Point& y,
                      const FlowSolverConfig& cfg);

struct ResidualFit {
  double slope = 0;                 // log-log least-squares slope
  bool degenerate = false;          // every residual sat below the noise floor
  std::vector<double> included_s;
  std::vector<double> residuals;    // aligned with included_s
  std::vector<double> excluded_s;   // points below the noise floor
  double noise_floor = 0;
};

/// Slope of log(residual) against log(s) where residual(s) is the distance
/// between commutator_flow and the exact bracket flow e^{s [Z1,Z2]} y.
/// Points with residual below 100 x abs_tol are excluded (nilpotent pairs
/// are exact and would corrupt the fit); all excluded => degenerate. Throws
/// when one or two points remain, too few for a fit.
ResidualFit residual_exponent(const VectorField& Z1, const VectorField& Z2, const Point& y,
                              std::span<const double> s_grid, const FlowSolverConfig& cfg);

/// Least-squares slope of log r against log s. Shared by the residual
/// diagnostics.
double loglog_slope(std::span<const double> s, std::span<const double> r);

struct FrameCheckReport {
  std::vector<double> column_errors;  // |d eta/d tau_j (0) - Z_j(x)| per j
  int jacobian_rank = 0;
  bool frame_ok = false;  // first-layer columns within tol and full rank
};

/// Central-difference Jacobian of tau -> eta(tau, x) at tau = 0; column j
/// must reproduce Z_j(x). Several difference scales may be supplied, the
/// smallest error per column wins.
FrameCheckReport eta_frame_check(const Basis& basis, const Point& x,
                                 std::span<const double> tau_scales,
                                 const FlowSolverConfig& cfg, double tol = 1e-6);

}  // namespace flowtrace
