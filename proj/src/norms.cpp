#include "flowtrace/norms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "flowtrace/flow.hpp"
#include "flowtrace/parallel.hpp"
#include "flowtrace/quadrature.hpp"

namespace flowtrace {

void NormParams::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("NormParams: need 1 < p < inf");
  if (delta <= 0) throw std::invalid_argument("NormParams: delta must be positive");
  if (t_nodes < 2) throw std::invalid_argument("NormParams: t_nodes must be >= 2");
  if (tau_samples < 1) throw std::invalid_argument("NormParams: tau_samples must be >= 1");
}

namespace {

// Raw p-th power sum over one grid (no ^{1/p}); deterministic parallel
// pairwise summation.
double power_sum(const std::function<double(const Point&)>& f, const TensorGrid& grid, double p) {
  double cell = grid.cell_volume();
  if (cell == 0 || grid.size() == 0) return 0;
  double sum = parallel_sum(grid.size(), [&](std::int64_t i) {
    double v = f(grid.point(i));
    if (!std::isfinite(v)) throw std::runtime_error("lp_norm: non-finite sample");
    return std::pow(std::abs(v), p);
  });
  return sum * cell;
}

std::vector<int> uniform_res(int dim, int res) {
  return std::vector<int>(static_cast<size_t>(dim), res);
}

}  // namespace

double lp_norm(const ScalarField& f, const Box& box, double p, std::span<const int> res) {
  if (f.dim() != box.dim()) throw std::invalid_argument("lp_norm: dimension mismatch");
  Box domain = box;
  if (f.support()) domain = f.support()->intersect(box);
  TensorGrid grid(domain, res);
  double s = power_sum([&](const Point& x) { return f(x.view()); }, grid, p);
  return std::pow(s, 1.0 / p);
}

double lp_norm(const ScalarField& f, const Box& box, double p, int res) {
  auto r = uniform_res(box.dim(), res);
  return lp_norm(f, box, p, std::span<const int>(r));
}

namespace {

// True when the two boxes are close enough that one common grid resolves
// both: every face within 35% of the (larger) width.
bool nearly_coincident(const Box& a, const Box& b) {
  for (int i = 0; i < a.dim(); ++i) {
    double w = std::max(a.width(i), b.width(i));
    if (std::abs(a.lo[i] - b.lo[i]) > 0.35 * w) return false;
    if (std::abs(a.hi[i] - b.hi[i]) > 0.35 * w) return false;
  }
  return true;
}

Box bounding_box(const Box& a, const Box& b) {
  Box u = a;
  for (int i = 0; i < a.dim(); ++i) {
    u.lo[i] = std::min(a.lo[i], b.lo[i]);
    u.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  return u;
}

bool is_degenerate(const Box& b) {
  for (int i = 0; i < b.dim(); ++i)
    if (b.width(i) <= 0) return true;
  return false;
}

}  // namespace

double displaced_difference_lp(const ScalarField& psi,
                               const std::function<double(const Point&)>& displaced_value,
                               const std::optional<Box>& image_of_support, const Box& V, double p,
                               int res) {
  auto g = [&](const Point& x) { return displaced_value(x) - psi(x.view()); };
  auto r = uniform_res(V.dim(), res);

  if (!psi.support() || !image_of_support) {
    TensorGrid grid(V, std::span<const int>(r));
    return std::pow(power_sum(g, grid, p), 1.0 / p);
  }

  // Two-region quadrature: |g|^p vanishes outside supp(psi) and the preimage
  // box; each region keeps its own `res`-point grid so small supports stay
  // resolved. Overlap is subtracted (inclusion-exclusion).
  Box direct = psi.support()->intersect(V);
  Box image = image_of_support->intersect(V);

  if (nearly_coincident(direct, image)) {
    TensorGrid grid(bounding_box(direct, image), std::span<const int>(r));
    return std::pow(power_sum(g, grid, p), 1.0 / p);
  }

  double total = 0;
  TensorGrid grid_a(direct, std::span<const int>(r));
  total += power_sum(g, grid_a, p);
  TensorGrid grid_b(image, std::span<const int>(r));
  total += power_sum(g, grid_b, p);
  Box overlap = direct.intersect(image);
  if (!is_degenerate(overlap)) {
    TensorGrid grid_ab(overlap, std::span<const int>(r));
    total -= power_sum(g, grid_ab, p);
  }
  return std::pow(std::max(total, 0.0), 1.0 / p);
}

namespace {

}  // namespace

double flow_modulus(double t, const ScalarField& psi, const VectorField& Z, const Box& V1,
                    const Box& V, const NormParams& params, int res, const FlowSolverConfig& cfg,
                    const FieldEnvelope* env) {
  if (t < 0) throw std::invalid_argument("flow_modulus: t must be >= 0");
  if (t == 0) return 0;
  if (psi.support() && !V1.contains_box(*psi.support(), -1e-12))
    throw std::invalid_argument("flow_modulus: support of psi must lie in V1");
  params.validate();

  FieldEnvelope local;
  if (!env) {
    local = field_envelope(Z, V, t);
    env = &local;
  }
  // Compactly supported psi: trajectories that leave this enlarged box
  // cannot re-enter the support within time t (the return trip would need
  // speed far above the sampled envelope), so the displaced term vanishes
  // there. Without a declared support an escape is a hard error.
  Box enlarged = V.inflate(1.0 + env->sup * t);
  FlowSolverConfig monitored =
      psi.support() ? cfg.with_bounds(enlarged) : cfg.with_bounds(V.inflate(1e-9));

  int m = params.tau_samples;
  double sup = 0;
  for (int i = m; i >= 1; --i) {
    for (int sign = -1; sign <= 1; sign += 2) {
      double tau = sign * t * i / m;
      std::optional<Box> image;
      if (psi.support()) image = swept_flow_box(*psi.support(), Z, -tau, cfg);
      auto displaced_value = [&](const Point& x) -> double {
        if (psi.support()) {
          try {
            return psi(flow(Z, x, tau, monitored).view());
          } catch (const FlowEscape&) {
            return 0.0;
          }
        }
        return psi(flow(Z, x, tau, monitored).view());
      };
      sup = std::max(sup, displaced_difference_lp(psi, displaced_value, image, V, params.p, res));
    }
  }
  return sup;
}

double classical_modulus(double t, const ScalarField& psi, const Box& V, double p, int res) {
  if (t < 0) throw std::invalid_argument("classical_modulus: t must be >= 0");
  if (t == 0) return 0;
  int n = psi.dim();

  // Shift directions: all nonzero {-1,0,1}^n combinations scaled to length t.
  std::vector<Point> shifts;
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    Point dir(n);
    int c = code;
    double len2 = 0;
    for (int i = 0; i < n; ++i) {
      dir[i] = static_cast<double>(c % 3 - 1);
      len2 += dir[i] * dir[i];
      c /= 3;
    }
    if (len2 == 0) continue;
    shifts.push_back((t / std::sqrt(len2)) * dir);
  }

  double sup = 0;
  for (const Point& s : shifts) {
    std::optional<Box> image;
    if (psi.support()) {
      Box b = *psi.support();
      for (int i = 0; i < n; ++i) {
        b.lo[i] -= s[i];
        b.hi[i] -= s[i];
      }
      image = b;
    }
    auto displaced_value = [&](const Point& x) { return psi((x + s).view()); };
    sup = std::max(sup, displaced_difference_lp(psi, displaced_value, image, V, p, res));
  }
  return sup;
}

double besov_time_integral(const std::function<double(double)>& omega, double exponent,
                           const NormParams& params) {
  params.validate();
  double hi = std::log(params.delta);
  double lo = hi - 16.0 * std::log(2.0);
  std::vector<double> us(static_cast<size_t>(params.t_nodes));
  std::vector<double> vals(static_cast<size_t>(params.t_nodes));
  for (int k = 0; k < params.t_nodes; ++k) {
    double u = lo + (hi - lo) * k / (params.t_nodes - 1);
    double tk = std::exp(u);
    double w = omega(tk);
    us[static_cast<size_t>(k)] = u;
    vals[static_cast<size_t>(k)] = std::pow(std::pow(tk, -exponent) * w, params.p);
  }
  return std::pow(trapezoid(us, vals), 1.0 / params.p);
}

double flow_besov_norm(const ScalarField& psi, std::span<const VectorField> first_layer,
                       const Box& V1, const Box& V, const NormParams& params, int res,
                       const FlowSolverConfig& cfg) {
  double total = lp_norm(psi, V, params.p, res);
  for (const auto& Z : first_layer) {
    FieldEnvelope env = field_envelope(Z, V, params.delta);
    total += besov_time_integral(
        [&](double t) { return flow_modulus(t, psi, Z, V1, V, params, res, cfg, &env); },
        params.theta(), params);
  }
  return total;
}

double classical_besov_seminorm(const ScalarField& psi, const Box& V, const NormParams& params,
                                int res) {
  return besov_time_integral(
      [&](double t) { return classical_modulus(t, psi, V, params.p, res); }, params.sigma(),
      params);
}

double sobolev_norm(const ScalarField& phi, std::span<const VectorField> frame, const Box& U,
                    double p, std::span<const int> res, const SobolevOptions& opts) {
  if (phi.dim() != U.dim()) throw std::invalid_argument("sobolev_norm: dimension mismatch");
  int d = phi.dim();
  for (const auto& Y : frame)
    if (Y.dim() != d) throw std::invalid_argument("sobolev_norm: frame dimension mismatch");
  if (!phi.closed_form() && !opts.allow_finite_difference)
    throw std::invalid_argument(
        "sobolev_norm: operator-composed field needs allow_finite_difference");

  double total = lp_norm(phi, U, p, res);

  Point h(d);
  for (int i = 0; i < d; ++i) h[i] = U.width(i) / (opts.fd_refine * res[static_cast<size_t>(i)]);

  for (const auto& Y : frame) {
    auto directional = [&, Y](std::span<const double> pt) {
      Point a = Y(pt);
      double val = 0;
      if (phi.closed_form()) {
        Point g(d);
        phi.gradient(pt, g.view());
        for (int i = 0; i < d; ++i) val += a[i] * g[i];
      } else {
        Point q = Point::from(pt);
        for (int i = 0; i < d; ++i) {
          if (a[i] == 0) continue;
          double keep = q[i];
          q[i] = keep + h[i];
          double fp = phi(q.view());
          q[i] = keep - h[i];
          double fm = phi(q.view());
          q[i] = keep;
          val += a[i] * (fp - fm) / (2 * h[i]);
        }
      }
      return val;
    };
    ScalarField deriv(d, directional);
    if (phi.support()) deriv.set_support(*phi.support());
    total += lp_norm(deriv, U, p, res);
  }
  return total;
}

HardyCheck hardy_littlewood_check(std::span<const double> h, double T, double q) {
  if (!(q > 1.0) || !std::isfinite(q))
    throw std::invalid_argument("hardy_littlewood_check: need 1 < q < inf");
  if (T <= 0 || h.empty()) throw std::invalid_argument("hardy_littlewood_check: bad sample grid");
  size_t n = h.size();
  for (double v : h)
    if (v < 0 || !std::isfinite(v))
      throw std::invalid_argument("hardy_littlewood_check: samples must be nonnegative");

  double dt = T / static_cast<double>(n);
  // Nodes t_0 = 0 (constant extension) and t_i = i dt.
  std::vector<double> ts(n + 1), hv(n + 1), avg_q(n + 1), h_q(n + 1);
  ts[0] = 0;
  hv[0] = h[0];
  for (size_t i = 1; i <= n; ++i) {
    ts[i] = static_cast<double>(i) * dt;
    hv[i] = h[i - 1];
  }
  double cum = 0;
  avg_q[0] = std::pow(hv[0], q);  // limit of the average at t -> 0+
  for (size_t i = 1; i <= n; ++i) {
    cum += dt * (hv[i] + hv[i - 1]) / 2;
    avg_q[i] = std::pow(cum / ts[i], q);
  }
  for (size_t i = 0; i <= n; ++i) h_q[i] = std::pow(hv[i], q);

  HardyCheck out;
  out.lhs = std::pow(trapezoid(ts, avg_q), 1.0 / q);
  out.rhs = std::pow(trapezoid(ts, h_q), 1.0 / q);
  if (out.rhs == 0) {
    if (out.lhs > 0)
      throw std::runtime_error("hardy_littlewood_check: zero right side with positive left side");
    out.ratio = 0;
  } else {
    out.ratio = out.lhs / out.rhs;
  }
  return out;
}

}  // namespace flowtrace
