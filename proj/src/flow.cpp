#include "flowtrace/flow.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flowtrace {

namespace {

struct FieldRhs {
  const VectorField& Z;
  void operator()(double, std::span<const double> y, std::span<double> dy) const {
    Z.eval_into(y, dy);
  }
};

}  // namespace

Point flow(const VectorField& Z, const Point& x, double tau, const FlowSolverConfig& cfg) {
  if (Z.dim() != x.dim()) throw std::invalid_argument("flow: point dimension mismatch");
  Point y = x;
  integrate(FieldRhs{Z}, 0.0, tau, y, cfg);
  return y;
}

Point flow_compose(const Basis& basis, std::span<const double> taus, const Point& x,
                   const FlowSolverConfig& cfg) {
  if (static_cast<int>(taus.size()) != basis.size())
    throw std::invalid_argument("flow_compose: one tau per basis field required");
  Point y = x;
  for (int j = basis.size() - 1; j >= 0; --j)
    y = flow(basis[j], y, taus[static_cast<size_t>(j)], cfg);
  return y;
}

Point commutator_flow(const VectorField& Z1, const VectorField& Z2, double s, const Point& y,
                      const FlowSolverConfig& cfg) {
  if (s == 0) return y;
  double r = std::sqrt(std::abs(s));
  Point p = y;
  if (s > 0) {
    p = flow(Z1, p, r, cfg);
    p = flow(Z2, p, r, cfg);
    p = flow(Z1, p, -r, cfg);
    p = flow(Z2, p, -r, cfg);
  } else {
    p = flow(Z2, p, r, cfg);
    p = flow(Z1, p, r, cfg);
    p = flow(Z2, p, -r, cfg);
    p = flow(Z1, p, -r, cfg);
  }
  return p;
}

double loglog_slope(std::span<const double> s, std::span<const double> r) {
  size_t m = s.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    double lx = std::log(s[i]);
    double ly = std::log(r[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double denom = m * sxx - sx * sx;
  return (m * sxy - sx * sy) / denom;
}

ResidualFit residual_exponent(const VectorField& Z1, const VectorField& Z2, const Point& y,
                              std::span<const double> s_grid, const FlowSolverConfig& cfg) {
  ResidualFit fit;
  fit.noise_floor = 100.0 * cfg.abs_tol;
  VectorField bracket = lie_bracket(Z1, Z2);
  for (double s : s_grid) {
    if (s <= 0) throw std::invalid_argument("residual_exponent: s grid must be positive");
    Point approx = commutator_flow(Z1, Z2, s, y, cfg);
    Point exact = flow(bracket, y, s, cfg);
    double res = approx.dist(exact);
    if (res < fit.noise_floor) {
      fit.excluded_s.push_back(s);
    } else {
      fit.included_s.push_back(s);
      fit.residuals.push_back(res);
    }
  }
  if (fit.included_s.empty()) {
    fit.degenerate = true;
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  if (fit.included_s.size() < 3)
    throw std::runtime_error("residual_exponent: fewer than 3 points above the noise floor");
  fit.slope = loglog_slope(fit.included_s, fit.residuals);
  return fit;
}

FrameCheckReport eta_frame_check(const Basis& basis, const Point& x,
                                 std::span<const double> tau_scales,
                                 const FlowSolverConfig& cfg, double tol) {
  int n = basis.size();
  if (n != basis.dim())
    throw std::invalid_argument("eta_frame_check: basis must be a full frame (n fields on R^n)");
  if (tau_scales.empty()) throw std::invalid_argument("eta_frame_check: no tau scales");

  FrameCheckReport report;
  report.column_errors.assign(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
  Eigen::MatrixXd jac(n, n);

  std::vector<double> taus(static_cast<size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    Point target = basis[j](x.view());
    for (double h : tau_scales) {
      taus.assign(static_cast<size_t>(n), 0.0);
      taus[static_cast<size_t>(j)] = h;
      Point plus = flow_compose(basis, taus, x, cfg);
      taus[static_cast<size_t>(j)] = -h;
      Point minus = flow_compose(basis, taus, x, cfg);
      Point col = (1.0 / (2 * h)) * (plus - minus);
      double err = col.dist(target);
      if (err < report.column_errors[static_cast<size_t>(j)]) {
        report.column_errors[static_cast<size_t>(j)] = err;
        for (int i = 0; i < n; ++i) jac(i, j) = col[i];
      }
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  report.jacobian_rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-8 * sv(0)) ++report.jacobian_rank;

  report.frame_ok = report.jacobian_rank == n;
  for (int j = 0; j < basis.first_layer; ++j)
    if (report.column_errors[static_cast<size_t>(j)] > tol) report.frame_ok = false;
  return report;
}

}  // namespace flowtrace
