#pragma once

#include <span>

#include "flowtrace/domain.hpp"
#include "flowtrace/flow.hpp"

namespace flowtrace {

/// Solution of the transport problem L p = 0, p(x, 0) = x for
/// L = d/dt - X, where X is a pure x-direction field on R^{n+1} with
/// possibly t-dependent coefficients. forward() is p(x,t), inverse() is
/// h(y,s) with h(p(x,t), t) = x; both follow the characteristic
/// xi'(s) = -a(xi(s), s), a being X's coefficient vector.
class Straightening {
 public:
  Straightening(VectorField X, Box slice_box, FlowSolverConfig cfg);

  Point forward(const Point& x, double t) const;
  Point inverse(const Point& y, double s) const;

  const VectorField& field() const { return X_; }
  const Box& box() const { return box_; }
  const FlowSolverConfig& config() const { return cfg_; }

 private:
  VectorField X_;
  Box box_;
  FlowSolverConfig cfg_;
};

/// Builds the straightening for X on R^{n+1} over the given slice box.
/// Throws when X has a d/dt component.
Straightening straighten(const VectorField& X, const Box& slice_box,
                         const FlowSolverConfig& cfg);

/// phi(x,t) = phi0(p(x,t)) + integral_0^t f(h(p(x,t),tau), tau) dtau, the
/// transport reconstruction from the trace phi0 = phi(.,0) and source
/// f = L phi. The t-integral runs adaptively to `quad_tol`.
double reconstruct(const ScalarField& phi0, const ScalarField& f, const Straightening& st,
                   const Point& x, double t, double quad_tol = 1e-9);

/// Residual of R(t) x = e^{-t Y} p(x, t) against x on a decreasing positive
/// t grid, with the same noise-floor/exclusion semantics as
/// residual_exponent. Y must be the t=0 slice of X.
ResidualFit defect_residual(const VectorField& Y, const VectorField& X, const Point& x,
                            std::span<const double> t_grid, const Box& slice_box,
                            const FlowSolverConfig& cfg);

}  // namespace flowtrace
