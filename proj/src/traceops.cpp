#include "flowtrace/traceops.hpp"

#include <cmath>
#include <stdexcept>

#include "flowtrace/flow.hpp"
#include "flowtrace/quadrature.hpp"

namespace flowtrace {

double ExtensionConfig::b_max() const {
  double m = 0;
  for (const auto& term : seeley) m = std::max(m, term.b);
  return m;
}

void ExtensionConfig::validate() const {
  if (basis.size() == 0 || basis.size() != basis.dim())
    throw std::invalid_argument("ExtensionConfig: basis must be a full frame");
  if (delta <= 0) throw std::invalid_argument("ExtensionConfig: delta must be positive");
  if (quad_order < 2) throw std::invalid_argument("ExtensionConfig: quad_order must be >= 2");
  if (seeley.empty()) throw std::invalid_argument("ExtensionConfig: no Seeley terms");
  double sum_a = 0, sum_ab = 0;
  for (const auto& term : seeley) {
    if (term.b <= 0) throw std::invalid_argument("ExtensionConfig: Seeley b must be positive");
    sum_a += term.a;
    sum_ab += term.a * -term.b;
  }
  if (std::abs(sum_a - 1) > 1e-12 || std::abs(sum_ab - 1) > 1e-12)
    throw std::invalid_argument(
        "ExtensionConfig: Seeley coefficients must satisfy sum a_i = 1 and sum a_i(-b_i) = 1");
}

ScalarField restrict_to_trace(const ScalarField& phi) {
  int n = phi.dim() - 1;
  if (n < 1) throw std::invalid_argument("restrict_to_trace: field must live on R^{n+1}");
  auto eval = [phi, n](std::span<const double> x) {
    Point q(n + 1);
    for (int i = 0; i < n; ++i) q[i] = x[static_cast<size_t>(i)];
    q[n] = 0;
    return phi(q.view());
  };
  ScalarField out(n, eval);
  if (phi.closed_form()) {
    out.set_gradient([phi, n](std::span<const double> x, std::span<double> g) {
      Point q(n + 1);
      for (int i = 0; i < n; ++i) q[i] = x[static_cast<size_t>(i)];
      q[n] = 0;
      Point full(n + 1);
      phi.gradient(q.view(), full.view());
      for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = full[i];
    });
  }
  if (phi.support()) out.set_support(phi.support()->slice());
  out.set_sup_bound(phi.sup_bound());
  out.set_id("R(" + phi.id() + ")");
  return out;
}

namespace {

double window_length(const ExtensionConfig& cfg, int i, double t) {
  return i < cfg.basis.first_layer ? t : t * t;
}

}  // namespace

double hardy_average(const ScalarField& psi, int i, const ExtensionConfig& cfg, const Point& x,
                     double t) {
  cfg.validate();
  if (i < 0 || i >= cfg.basis.size()) throw std::invalid_argument("hardy_average: bad index");
  if (t <= 0) throw std::invalid_argument("hardy_average: t must be positive");
  double T = window_length(cfg, i, t);
  GaussRule rule = gauss_on_interval(cfg.quad_order, 0, T);
  FlowSolverConfig monitored = cfg.ode.with_bounds(cfg.V);
  double acc = 0;
  for (size_t j = 0; j < rule.nodes.size(); ++j) {
    Point y = flow(cfg.basis[i], x, rule.nodes[j], monitored);
    acc += rule.weights[j] * psi(y.view());
  }
  return acc / T;
}

namespace {

// Recursive tensor quadrature of psi(eta(tau, x)): the innermost factor
// e^{tau_n Z_n} is shared across all outer nodes, so flows cost
// q + q^2 + ... + q^n instead of n q^n.
double eta_quadrature(const ScalarField& psi, const ExtensionConfig& cfg,
                      const std::vector<GaussRule>& rules, int axis, const Point& y,
                      const FlowSolverConfig& monitored) {
  if (axis < 0) return psi(y.view());
  const GaussRule& rule = rules[static_cast<size_t>(axis)];
  double acc = 0;
  for (size_t j = 0; j < rule.nodes.size(); ++j) {
    Point z = flow(cfg.basis[axis], y, rule.nodes[j], monitored);
    acc += rule.weights[j] * eta_quadrature(psi, cfg, rules, axis - 1, z, monitored);
  }
  return acc;
}

}  // namespace

double extend_H(const ScalarField& psi, const ExtensionConfig& cfg, const Point& x, double t) {
  cfg.validate();
  if (t <= 0) throw std::invalid_argument("extend_H: t must be positive");
  int n = cfg.basis.size();
  if (psi.dim() != n || x.dim() != n) throw std::invalid_argument("extend_H: dimension mismatch");

  std::vector<GaussRule> rules;
  rules.reserve(static_cast<size_t>(n));
  double volume = 1;
  for (int i = 0; i < n; ++i) {
    double T = window_length(cfg, i, t);
    rules.push_back(gauss_on_interval(cfg.quad_order, 0, T));
    volume *= T;
  }
  FlowSolverConfig monitored = cfg.ode.with_bounds(cfg.V);
  return eta_quadrature(psi, cfg, rules, n - 1, x, monitored) / volume;
}

ScalarField extend_E(const ScalarField& psi, const ExtensionConfig& cfg) {
  cfg.validate();
  int n = cfg.basis.size();
  if (psi.dim() != n) throw std::invalid_argument("extend_E: dimension mismatch");
  if (psi.support() && !cfg.V2.contains_box(*psi.support(), -1e-12))
    throw std::invalid_argument("extend_E: support of psi must lie in V2");

  double reach = cfg.extension_reach();

  // x-support of H psi: sweep the support of psi backward through the
  // composition chain (e^{-tau_1 Z_1} first, matching the eta preimage).
  std::optional<Box> support;
  if (psi.support()) {
    Box xsupp = *psi.support();
    for (int i = 0; i < n; ++i)
      xsupp = swept_flow_box(xsupp, cfg.basis[i], -window_length(cfg, i, reach), cfg.ode);
    if (!cfg.V1.contains_box(xsupp, -1e-12))
      throw std::invalid_argument(
          "extend_E: x-support of H psi would leave V1 (shrink delta or the corpus support)");
    support = xsupp.with_axis(0, reach);
  }

  auto eval = [psi, cfg, reach](std::span<const double> p) {
    int n = cfg.basis.size();
    double t = p[static_cast<size_t>(n)];
    Point x(n);
    for (int i = 0; i < n; ++i) x[i] = p[static_cast<size_t>(i)];
    if (t < 0 || t >= reach)
      throw std::out_of_range("extend_E: t outside [0, extension reach)");
    if (t == 0) return psi(x.view());
    return extend_H(psi, cfg, x, t);
  };
  ScalarField out(n + 1, eval);
  if (support) out.set_support(*support);
  out.set_sup_bound(psi.sup_bound());  // averaging does not increase the sup
  out.set_id("E(" + psi.id() + ")");
  return out;
}

ScalarField seeley_extend(const ScalarField& phi_halfspace, const ExtensionConfig& cfg) {
  cfg.validate();
  int d = phi_halfspace.dim();
  double reach = cfg.extension_reach();
  double b_max = cfg.b_max();
  auto terms = cfg.seeley;

  auto eval = [phi_halfspace, terms, reach, b_max, d](std::span<const double> p) {
    double t = p[static_cast<size_t>(d - 1)];
    if (t >= reach || t <= -reach / b_max)
      throw std::out_of_range("seeley_extend: t outside (-delta_E/b_max, delta_E)");
    if (t >= 0) return phi_halfspace(p);
    Point q = Point::from(p);
    double acc = 0;
    for (const auto& term : terms) {
      q[d - 1] = -term.b * t;
      acc += term.a * phi_halfspace(q.view());
    }
    return acc;
  };
  ScalarField out(d, eval);
  if (phi_halfspace.support()) {
    Box b = *phi_halfspace.support();
    b.lo[d - 1] = -b.hi[d - 1] / b_max;
    out.set_support(b);
  }
  double coeff_mass = 0;
  for (const auto& term : terms) coeff_mass += std::abs(term.a);
  out.set_sup_bound(coeff_mass * phi_halfspace.sup_bound());
  out.set_id("S(" + phi_halfspace.id() + ")");
  return out;
}

ScalarField full_extension(const ScalarField& psi, const ExtensionConfig& cfg) {
  cfg.validate();
  ScalarField extended = seeley_extend(extend_E(psi, cfg), cfg);
  ScalarField cutoff = time_cutoff(cfg.delta);
  int n = psi.dim();
  double delta = cfg.delta;

  auto eval = [extended, cutoff, n, delta](std::span<const double> p) {
    double t = p[static_cast<size_t>(n)];
    if (std::abs(t) >= delta) return 0.0;
    double rho = cutoff(std::span<const double>(&t, 1));
    return rho * extended(p);
  };
  ScalarField out(n + 1, eval);
  if (extended.support()) {
    Box b = *extended.support();
    b.lo[n] = -delta;
    b.hi[n] = delta;
    out.set_support(b);
  }
  out.set_sup_bound(extended.sup_bound());
  out.set_id("ext(" + psi.id() + ")");
  return out;
}

}  // namespace flowtrace
