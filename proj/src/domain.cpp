#include "flowtrace/domain.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "flowtrace/flow.hpp"

namespace flowtrace {

void ScalarField::gradient(std::span<const double> p, std::span<double> out) const {
  if (!grad_) throw std::runtime_error("ScalarField '" + id_ + "' has no analytic gradient");
  if (support_ && !support_->contains(p)) {
    for (auto& v : out) v = 0;
    return;
  }
  grad_(p, out);
}

ScalarField ScalarField::from_expression(const Expression& e, int dim, std::string id) {
  if (e.max_variable() >= dim)
    throw std::invalid_argument("from_expression: expression uses variable beyond dimension");
  std::vector<Expression> partials;
  partials.reserve(static_cast<size_t>(dim));
  for (int j = 0; j < dim; ++j) partials.push_back(e.derivative(j));

  ScalarField f(dim, [e](std::span<const double> p) { return e(p); });
  f.set_gradient([partials](std::span<const double> p, std::span<double> out) {
    for (size_t j = 0; j < partials.size(); ++j) out[j] = partials[j](p);
  });
  f.set_id(std::move(id));
  return f;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("ScalarField +: dimension mismatch");
  ScalarField f(a.dim(), [a, b](std::span<const double> p) { return a(p) + b(p); });
  if (a.closed_form() && b.closed_form()) {
    int d = a.dim();
    f.set_gradient([a, b, d](std::span<const double> p, std::span<double> out) {
      std::array<double, kMaxDim> gb;
      a.gradient(p, out);
      b.gradient(p, std::span<double>(gb.data(), static_cast<size_t>(d)));
      for (int j = 0; j < d; ++j) out[static_cast<size_t>(j)] += gb[static_cast<size_t>(j)];
    });
  }
  if (a.support() && b.support()) {
    Box u = *a.support();
    for (int i = 0; i < u.dim(); ++i) {
      u.lo[i] = std::min(u.lo[i], b.support()->lo[i]);
      u.hi[i] = std::max(u.hi[i], b.support()->hi[i]);
    }
    f.set_support(u);
  }
  f.set_sup_bound(a.sup_bound() + b.sup_bound());
  f.set_id(a.id() + "+" + b.id());
  return f;
}

ScalarField operator*(double s, const ScalarField& a) {
  ScalarField f(a.dim(), [s, a](std::span<const double> p) { return s * a(p); });
  if (a.closed_form()) {
    int d = a.dim();
    f.set_gradient([s, a, d](std::span<const double> p, std::span<double> out) {
      a.gradient(p, out);
      for (int j = 0; j < d; ++j) out[static_cast<size_t>(j)] *= s;
    });
  }
  if (a.support()) f.set_support(*a.support());
  f.set_sup_bound(std::abs(s) * a.sup_bound());
  f.set_id(a.id());
  return f;
}

ScalarField ScalarField::tensor_with_time(const ScalarField& psi, const ScalarField& rho) {
  if (rho.dim() != 1) throw std::invalid_argument("tensor_with_time: rho must live on R");
  int n = psi.dim();
  auto eval = [psi, rho, n](std::span<const double> p) {
    double t = p[static_cast<size_t>(n)];
    return psi(p.first(static_cast<size_t>(n))) * rho(std::span<const double>(&t, 1));
  };
  ScalarField f(n + 1, eval);
  if (psi.closed_form() && rho.closed_form()) {
    f.set_gradient([psi, rho, n](std::span<const double> p, std::span<double> out) {
      double t = p[static_cast<size_t>(n)];
      auto x = p.first(static_cast<size_t>(n));
      std::span<const double> ts(&t, 1);
      double rv = rho(ts);
      double pv = psi(x);
      psi.gradient(x, out.first(static_cast<size_t>(n)));
      for (int j = 0; j < n; ++j) out[static_cast<size_t>(j)] *= rv;
      double dr;
      rho.gradient(ts, std::span<double>(&dr, 1));
      out[static_cast<size_t>(n)] = pv * dr;
    });
  }
  if (psi.support() && rho.support())
    f.set_support(psi.support()->with_axis(rho.support()->lo[0], rho.support()->hi[0]));
  f.set_sup_bound(psi.sup_bound() * rho.sup_bound());
  f.set_id(psi.id() + "*rho");
  return f;
}

ScalarField ScalarField::axis_modulated(const ScalarField& g, int axis, double center,
                                        double scale) {
  if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("axis_modulated: bad axis");
  auto u = [axis, center, scale](std::span<const double> p) {
    return (p[static_cast<size_t>(axis)] - center) / scale;
  };
  ScalarField f(g.dim(), [g, u](std::span<const double> p) { return u(p) * g(p); });
  if (g.closed_form()) {
    int d = g.dim();
    f.set_gradient([g, u, axis, scale, d](std::span<const double> p, std::span<double> out) {
      g.gradient(p, out);
      double uv = u(p);
      for (int j = 0; j < d; ++j) out[static_cast<size_t>(j)] *= uv;
      out[static_cast<size_t>(axis)] += g(p) / scale;
    });
  }
  double umax = std::numeric_limits<double>::infinity();
  if (g.support()) {
    f.set_support(*g.support());
    umax = std::max(std::abs(g.support()->lo[axis] - center),
                    std::abs(g.support()->hi[axis] - center)) /
           scale;
  }
  f.set_sup_bound(g.sup_bound() * umax);
  f.set_id("mod" + std::to_string(axis + 1) + "_" + g.id());
  return f;
}

ScalarField bump(const Point& center, double scale) {
  if (scale <= 0) throw std::invalid_argument("bump: scale must be positive");
  int d = center.dim();
  auto r2 = [center, scale, d](std::span<const double> p) {
    double s = 0;
    for (int i = 0; i < d; ++i) {
      double u = (p[static_cast<size_t>(i)] - center[i]) / scale;
      s += u * u;
    }
    return s;
  };
  auto eval = [r2](std::span<const double> p) {
    double u = r2(p);
    return u < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u)) : 0.0;
  };
  ScalarField f(d, eval);
  f.set_gradient([r2, center, scale, d](std::span<const double> p, std::span<double> out) {
    double u = r2(p);
    if (u >= 1.0) {
      for (int i = 0; i < d; ++i) out[static_cast<size_t>(i)] = 0;
      return;
    }
    double b = std::exp(1.0 - 1.0 / (1.0 - u));
    double q = (1.0 - u) * (1.0 - u);
    for (int i = 0; i < d; ++i)
      out[static_cast<size_t>(i)] =
          -b * 2.0 * (p[static_cast<size_t>(i)] - center[i]) / (scale * scale * q);
  });
  Box suppt(center, center);
  suppt = suppt.inflate(scale);
  f.set_support(suppt);
  f.set_sup_bound(1.0);
  f.set_id("bump");
  return f;
}

ScalarField time_cutoff(double delta) {
  ScalarField f = bump(Point{0.0}, delta);
  f.set_id("rho_delta");
  return f;
}

DomainSpec DomainSpec::defaults(int n) {
  DomainSpec s;
  s.V = Box::cube(n, -1, 1);
  s.V1 = Box::cube(n, -0.6, 0.6);
  s.V2 = Box::cube(n, -0.4, 0.4);
  s.eps = 0.5;
  s.delta = 0.25;
  s.grid_res = 33;
  s.t_res = 24;
  return s;
}

void DomainSpec::validate() const {
  if (!V.contains_box(V1, 1e-12) || !V1.contains_box(V2, 1e-12))
    throw std::invalid_argument("DomainSpec: boxes must nest strictly (V2 cc V1 cc V)");
  if (delta <= 0) throw std::invalid_argument("DomainSpec: delta must be positive");
  if (eps <= 0) throw std::invalid_argument("DomainSpec: eps must be positive");
  if (grid_res < 8) throw std::invalid_argument("DomainSpec: grid_res must be >= 8");
  if (t_res < 4) throw std::invalid_argument("DomainSpec: t_res must be >= 4");
}

namespace {

// Tensor sample of one face of the box (axis pinned at lo or hi side).
void face_points(const Box& box, int axis, bool high, int res, std::vector<Point>& out) {
  int n = box.dim();
  std::vector<int> idx(static_cast<size_t>(n - 1), 0);
  for (;;) {
    Point p(n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
      if (i == axis) {
        p[i] = high ? box.hi[i] : box.lo[i];
      } else {
        int j = idx[static_cast<size_t>(k++)];
        p[i] = res == 1 ? box.center()[i]
                        : box.lo[i] + box.width(i) * j / (res - 1);
      }
    }
    out.push_back(p);
    int c = 0;
    while (c < n - 1 && ++idx[static_cast<size_t>(c)] == res) idx[static_cast<size_t>(c++)] = 0;
    if (c == n - 1) return;
  }
}

}  // namespace

double admissible_delta(std::span<const VectorField> fields, const Box& V1, const Box& V,
                        double delta_max, const FlowSolverConfig& cfg, int boundary_res) {
  if (!V.contains_box(V1, 1e-12))
    throw std::invalid_argument("admissible_delta: V1 must nest strictly inside V");
  if (delta_max <= 0) throw std::invalid_argument("admissible_delta: delta_max must be positive");

  int n = V1.dim();
  // Keep the boundary sample tractable in higher dimension.
  int res = boundary_res;
  while (n > 2 && std::pow(res, n - 1) > 4500.0) res = res / 2 + 1;
  std::vector<Point> boundary;
  for (int axis = 0; axis < n; ++axis) {
    face_points(V1, axis, false, res, boundary);
    face_points(V1, axis, true, res, boundary);
  }

  FlowSolverConfig monitored = cfg.with_bounds(V);
  auto stays_inside = [&](double d) {
    for (const auto& Z : fields) {
      if (Z.is_zero()) continue;
      for (const Point& b : boundary) {
        for (double tau : {d, -d, d / 2, -d / 2}) {
          try {
            flow(Z, b, tau, monitored);
          } catch (const FlowEscape&) {
            return false;
          } catch (const StepUnderflow&) {
            return false;
          }
        }
      }
    }
    return true;
  };

  double lo = 0, hi = delta_max;
  if (stays_inside(delta_max)) return delta_max;
  for (int iter = 0; iter < 10; ++iter) {
    double mid = (lo + hi) / 2;
    if (stays_inside(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (lo == 0)
    throw std::runtime_error("admissible_delta: no positive radius at resolution delta_max/2^10");
  return lo;
}

std::vector<ScalarField> test_corpus(const DomainSpec& spec, int count) {
  if (count < 1) throw std::invalid_argument("test_corpus: count must be >= 1");
  spec.validate();
  int n = spec.n();
  Point c = spec.V2.center();
  double r = spec.V2.inradius() / 2;

  auto scaled_bump = [&](int j) -> ScalarField {
    double rj = r * std::pow(0.5, j);
    ScalarField f = bump(c, rj);
    f.set_id("bump_s" + std::to_string(j));
    return f;
  };
  auto modulated = [&](int j) -> ScalarField {
    double rj = r * std::pow(0.5, j);
    int axis = j % n;
    ScalarField f = ScalarField::axis_modulated(scaled_bump(j), axis, c[axis], rj);
    f.set_id("mod" + std::to_string(axis + 1) + "_s" + std::to_string(j));
    return f;
  };
  auto shifted = [&](int j) -> ScalarField {
    double rj = r * std::pow(0.5, j);
    int axis = j % n;
    Point cc = c;
    cc[axis] += r - rj;  // support stays inside the inradius ball of V2
    ScalarField f = bump(cc, rj);
    f.set_id("shift" + std::to_string(axis + 1) + "_s" + std::to_string(j));
    return f;
  };

  // Fixed generation order: bump_s0, bump_s1, then raw/modulated/translated
  // triples marching down the dyadic scales.
  std::vector<ScalarField> corpus;
  corpus.push_back(scaled_bump(0));
  if (count > 1) corpus.push_back(scaled_bump(1));
  for (int j = 0; static_cast<int>(corpus.size()) < count; ++j) {
    corpus.push_back(modulated(j));
    if (static_cast<int>(corpus.size()) < count) corpus.push_back(shifted(j + 1));
    if (static_cast<int>(corpus.size()) < count) corpus.push_back(scaled_bump(j + 2));
  }
  return corpus;
}

FieldEnvelope field_envelope(const VectorField& Z, const Box& box, double tau_max) {
  FieldEnvelope env;
  double s0 = sup_norm_on(Z, box);
  Box reach = box.inflate(2 * tau_max * s0 + 1e-9);
  env.sup = sup_norm_on(Z, reach);
  env.lip = lipschitz_on(Z, reach);
  return env;
}

Box swept_flow_box(const Box& box, const VectorField& Z, double tau, const FlowSolverConfig& cfg) {
  int n = box.dim();
  FlowSolverConfig free_cfg = cfg.unbounded();
  Box out = box;
  double max_disp = 0;
  int samples = 1;
  for (int i = 0; i < n; ++i) samples *= 3;
  for (double frac : {0.5, 1.0}) {
    double s = tau * frac;
    for (int c = 0; c < samples; ++c) {
      Point p(n);
      int code = c;
      for (int i = 0; i < n; ++i) {
        p[i] = box.lo[i] + box.width(i) * (code % 3) / 2.0;
        code /= 3;
      }
      Point mapped = flow(Z, p, s, free_cfg);
      for (int i = 0; i < n; ++i) {
        out.lo[i] = std::min(out.lo[i], mapped[i]);
        out.hi[i] = std::max(out.hi[i], mapped[i]);
        max_disp = std::max(max_disp, std::abs(mapped[i] - p[i]));
      }
    }
  }
  out = out.inflate(0.1 * max_disp + 100 * cfg.abs_tol);
  double sup = sup_norm_on(Z, out, 12, 1.15);
  double lip = lipschitz_on(Z, out, 12, 1.15);
  Box cap = box.inflate(std::abs(tau) * sup * std::exp(std::abs(tau) * lip) + 100 * cfg.abs_tol);
  return out.intersect(cap);
}

}  // namespace flowtrace
