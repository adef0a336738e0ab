#include "flowtrace/straighten.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "flowtrace/quadrature.hpp"

namespace flowtrace {

namespace {

// Characteristic RHS: xi'(s) = -a(xi, s), with a read from the x-slots of X.
struct CharacteristicRhs {
  const VectorField& X;
  void operator()(double s, std::span<const double> y, std::span<double> dy) const {
    Point p(X.dim());
    int n = X.dim() - 1;
    for (int i = 0; i < n; ++i) p[i] = y[static_cast<size_t>(i)];
    p[n] = s;
    for (int i = 0; i < n; ++i) dy[static_cast<size_t>(i)] = -X.coeff(i)(p.view());
  }
};

void require_pure_x(const VectorField& X) {
  int n = X.dim() - 1;
  if (X.dim() < 2) throw std::invalid_argument("straighten: field must live on R^{n+1}");
  if (X.coeff(n).is_zero()) return;
  TensorGrid grid(Box::cube(n, -1, 1), 5);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    Point q = grid.point(i);
    Point p(n + 1);
    for (int j = 0; j < n; ++j) p[j] = q[j];
    for (double t : {-0.5, 0.0, 0.5}) {
      p[n] = t;
      if (std::abs(X.coeff(n)(p.view())) > 1e-10)
        throw std::invalid_argument("straighten: field has a d/dt component");
    }
  }
}

}  // namespace

Straightening::Straightening(VectorField X, Box slice_box, FlowSolverConfig cfg)
    : X_(std::move(X)), box_(std::move(slice_box)), cfg_(std::move(cfg)) {
  require_pure_x(X_);
  if (box_.dim() != X_.dim() - 1)
    throw std::invalid_argument("straighten: slice box dimension must be n");
  cfg_.bounds = box_;
}

Point Straightening::forward(const Point& x, double t) const {
  if (x.dim() != box_.dim()) throw std::invalid_argument("straighten forward: bad point");
  Point xi = x;
  integrate(CharacteristicRhs{X_}, t, 0.0, xi, cfg_);
  return xi;
}

Point Straightening::inverse(const Point& y, double s) const {
  if (y.dim() != box_.dim()) throw std::invalid_argument("straighten inverse: bad point");
  Point xi = y;
  integrate(CharacteristicRhs{X_}, 0.0, s, xi, cfg_);
  return xi;
}

Straightening straighten(const VectorField& X, const Box& slice_box,
                         const FlowSolverConfig& cfg) {
  return Straightening(X, slice_box, cfg);
}

double reconstruct(const ScalarField& phi0, const ScalarField& f, const Straightening& st,
                   const Point& x, double t, double quad_tol) {
  int n = st.box().dim();
  if (phi0.dim() != n || f.dim() != n + 1)
    throw std::invalid_argument("reconstruct: phi0 must live on R^n and f on R^{n+1}");
  Point p = st.forward(x, t);
  double head = phi0(p.view());
  if (t == 0) return head;
  auto integrand = [&](double tau) {
    Point h = st.inverse(p, tau);
    Point q(n + 1);
    for (int i = 0; i < n; ++i) q[i] = h[i];
    q[n] = tau;
    return f(q.view());
  };
  return head + adaptive_integrate(integrand, 0.0, t, quad_tol);
}

ResidualFit defect_residual(const VectorField& Y, const VectorField& X, const Point& x,
                            std::span<const double> t_grid, const Box& slice_box,
                            const FlowSolverConfig& cfg) {
  if (Y.dim() + 1 != X.dim())
    throw std::invalid_argument("defect_residual: Y must be the slice of X");
  Straightening st = straighten(X, slice_box, cfg);

  ResidualFit fit;
  fit.noise_floor = 100.0 * cfg.abs_tol;
  FlowSolverConfig slice_cfg = cfg.with_bounds(slice_box);
  for (double t : t_grid) {
    if (t <= 0) throw std::invalid_argument("defect_residual: t grid must be positive");
    Point p = st.forward(x, t);
    Point back = flow(Y, p, -t, slice_cfg);
    double res = back.dist(x);
    if (res < fit.noise_floor) {
      fit.excluded_s.push_back(t);
    } else {
      fit.included_s.push_back(t);
      fit.residuals.push_back(res);
    }
  }
  if (fit.included_s.empty()) {
    fit.degenerate = true;
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  if (fit.included_s.size() < 3)
    throw std::runtime_error("defect_residual: fewer than 3 points above the noise floor");
  fit.slope = loglog_slope(fit.included_s, fit.residuals);
  return fit;
}

}  // namespace flowtrace
