#include "flowtrace/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>

#include "flowtrace/flow.hpp"
#include "flowtrace/straighten.hpp"
#include "flowtrace/traceops.hpp"

namespace flowtrace {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void progress(bool verbose, const std::string& line) {
  if (verbose) std::cerr << "  " << line << "\n";
}

std::vector<int> ures(int n, int x_res, int t_res) {
  std::vector<int> r(static_cast<size_t>(n), x_res);
  r.push_back(t_res);
  return r;
}

// Corpus member ids end in "_s<scale index>".
int scale_of(const std::string& id) {
  size_t pos = id.rfind("_s");
  return pos == std::string::npos ? 0 : std::atoi(id.c_str() + pos + 2);
}

ScalarField time_window(const DomainSpec& dom) { return bump(Point{0.0}, dom.eps / 2); }

}  // namespace

ResolvedGeometry resolve_geometry(const Manifest& m) {
  ResolvedGeometry g;
  g.domain = m.domain;
  g.norms = m.norms;
  g.ode.rel_tol = g.ode.abs_tol = 1e-10;
  g.ode.max_step = 0.1;

  if (m.fields.empty()) throw ManifestError("manifest declares no fields");
  int n = m.domain.n();
  for (const auto& nf : m.fields) {
    if (nf.field.dim() == n + 1) {
      g.ambient.push_back(nf.field);
      g.slice.push_back(restrict_to_slice(nf.field));
    } else if (nf.field.dim() == n) {
      g.slice.push_back(nf.field);
      g.ambient.push_back(lift_to_ambient(nf.field));
    } else {
      throw ManifestError("field '" + nf.name + "' must live on R^n or R^{n+1}");
    }
  }
  g.dt = VectorField::axis(n + 1, n);

  Point origin(n);
  g.completed = complete_basis(g.slice, origin);

  std::vector<VectorField> monitored = g.completed.fields;
  for (const auto& nf : m.fields_prime)
    if (nf.field.dim() == n) monitored.push_back(nf.field);
  g.admissible = admissible_delta(monitored, m.domain.V1, m.domain.V, m.delta_max, g.ode,
                                  2 * m.domain.grid_res);
  if (m.norms_delta_auto) g.norms.delta = 0.9 * g.admissible;
  g.norms.validate();
  return g;
}

// ---------------------------------------------------------------------------

ExperimentReport verify_restriction(const Manifest& m, bool verbose) {
  Stopwatch watch;
  ResolvedGeometry g = resolve_geometry(m);
  const DomainSpec& dom = g.domain;
  int n = dom.n();

  ExperimentReport rep;
  rep.experiment = "restriction";
  rep.params = m.echo();
  rep.params.emplace_back("resolved.admissible", format_double(g.admissible));
  rep.params.emplace_back("resolved.delta", format_double(g.norms.delta));
  rep.columns = {"trace_lp", "trace_besov", "sobolev"};

  std::vector<VectorField> frame = g.ambient;
  frame.push_back(g.dt);
  auto rho = time_window(dom);
  auto corpus = test_corpus(dom, m.experiment.corpus);
  auto res_U = ures(n, dom.grid_res, dom.t_res);

  for (const auto& psi : corpus) {
    auto phi = ScalarField::tensor_with_time(psi, rho);
    auto trace = restrict_to_trace(phi);
    double lp = lp_norm(trace, dom.V, g.norms.p, dom.grid_res);
    double num = flow_besov_norm(trace, g.slice, dom.V1, dom.V, g.norms, dom.grid_res, g.ode);
    double den = sobolev_norm(phi, frame, dom.U(), g.norms.p, res_U);
    rep.rows.push_back({psi.id(), {lp, num, den}, num, den, num / den});
    progress(verbose, psi.id() + " ratio " + format_double(num / den));
  }

  rep.finalize_ratios();
  rep.pass = rep.maxmin <= m.experiment.ratio_bound;
  rep.wall_seconds = watch.seconds();
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

// Section 2 requires the special form X_i = d/dx_i + sum_{j>k} a_ij d/dx_j.
void require_special_form(const std::vector<VectorField>& slice) {
  int k = static_cast<int>(slice.size());
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const Expression& c = slice[static_cast<size_t>(i)].coeff(j);
      bool ok = (i == j) ? (c.is_constant() && c.constant_value() == 1.0) : c.is_zero();
      if (!ok)
        throw ManifestError(
            "extension requires the special basis form X_i = d/dx_i + sum_{j>k} a_ij d/dx_j "
            "(permute coordinates first)");
    }
  }
}

}  // namespace

ExperimentReport verify_extension(const Manifest& m, bool verbose) {
  Stopwatch watch;
  ResolvedGeometry g = resolve_geometry(m);
  const DomainSpec& dom = g.domain;
  int n = dom.n();
  require_special_form(g.slice);

  ExtensionConfig cfg;
  cfg.basis = g.completed;
  cfg.quad_order = m.extension.quad_order;
  cfg.seeley = m.extension.seeley;
  cfg.V = dom.V;
  cfg.V1 = dom.V1;
  cfg.V2 = dom.V2;
  cfg.ode = g.ode;
  cfg.delta = m.extension.delta_auto ? 0.45 * g.admissible : m.extension.delta;
  if (cfg.extension_reach() > g.admissible + 1e-12)
    throw ManifestError("extension.delta too large: the Seeley reach " +
                        format_double(cfg.extension_reach()) + " exceeds the admissible radius " +
                        format_double(g.admissible));
  cfg.validate();

  ExperimentReport rep;
  rep.experiment = "extension";
  rep.params = m.echo();
  rep.params.emplace_back("resolved.admissible", format_double(g.admissible));
  rep.params.emplace_back("resolved.delta", format_double(g.norms.delta));
  rep.params.emplace_back("resolved.ext_delta", format_double(cfg.delta));
  rep.columns = {"besov", "sobolev_ext", "roundtrip_err"};

  std::vector<VectorField> frame = g.ambient;
  frame.push_back(g.dt);
  auto corpus = test_corpus(dom, m.experiment.corpus);
  auto res_U = ures(n, m.experiment.ext_grid_res, m.experiment.ext_t_res);
  SobolevOptions fd;
  fd.allow_finite_difference = true;

  double worst_roundtrip = 0;
  for (const auto& psi : corpus) {
    auto ext = full_extension(psi, cfg);
    auto back = restrict_to_trace(ext);
    double roundtrip = 0;
    TensorGrid grid(*psi.support(), 6);
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      Point x = grid.point(i);
      roundtrip = std::max(roundtrip, std::abs(back(x.view()) - psi(x.view())));
    }
    worst_roundtrip = std::max(worst_roundtrip, roundtrip);

    double num = sobolev_norm(ext, frame, dom.U(), g.norms.p, res_U, fd);
    double den = flow_besov_norm(psi, g.completed.layer_one(), dom.V1, dom.V, g.norms,
                                 dom.grid_res, g.ode);
    rep.rows.push_back({psi.id(), {den, num, roundtrip}, num, den, num / den});
    progress(verbose, psi.id() + " ratio " + format_double(num / den));
  }

  rep.finalize_ratios();
  rep.extra_summary.emplace_back("roundtrip_max", worst_roundtrip);
  rep.pass = rep.maxmin <= m.experiment.ratio_bound && worst_roundtrip <= 1e-10;
  rep.wall_seconds = watch.seconds();
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport verify_basis_equivalence(const Manifest& m, bool verbose) {
  Stopwatch watch;
  ResolvedGeometry g = resolve_geometry(m);
  const DomainSpec& dom = g.domain;
  int n = dom.n();

  if (m.fields_prime.empty()) throw ManifestError("basis equivalence needs a fields_prime section");
  std::vector<VectorField> prime;
  for (const auto& nf : m.fields_prime) {
    if (nf.field.dim() != n)
      throw ManifestError("fields_prime entries must live on the slice R^n");
    prime.push_back(nf.field);
  }
  if (prime.size() != g.slice.size())
    throw ManifestError("fields_prime must have as many entries as fields");

  // beta' must be a frame of the layer: full rank k on a sample grid of V1.
  {
    TensorGrid grid(dom.V1, 5);
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      if (value_rank(prime, grid.point(i)) < static_cast<int>(prime.size()))
        throw ManifestError("fields_prime is not a frame on V1 (rank deficiency at a sample point)");
    }
  }

  ExperimentReport rep;
  rep.experiment = "basis_equivalence";
  rep.params = m.echo();
  rep.params.emplace_back("resolved.admissible", format_double(g.admissible));
  rep.params.emplace_back("resolved.delta", format_double(g.norms.delta));
  rep.columns = {"besov_beta", "besov_prime"};

  auto corpus = test_corpus(dom, m.experiment.corpus);
  std::map<int, double> scale_constant;
  for (const auto& psi : corpus) {
    double base = flow_besov_norm(psi, g.slice, dom.V1, dom.V, g.norms, dom.grid_res, g.ode);
    double primed = flow_besov_norm(psi, prime, dom.V1, dom.V, g.norms, dom.grid_res, g.ode);
    double ratio = primed / base;
    rep.rows.push_back({psi.id(), {base, primed}, primed, base, ratio});
    double c = std::max(ratio, 1.0 / ratio);
    auto [it, inserted] = scale_constant.emplace(scale_of(psi.id()), c);
    if (!inserted) it->second = std::max(it->second, c);
    progress(verbose, psi.id() + " ratio " + format_double(ratio));
  }

  rep.finalize_ratios();
  double cmax = 0, cmin = std::numeric_limits<double>::infinity();
  for (const auto& [scale, c] : scale_constant) {
    cmax = std::max(cmax, c);
    cmin = std::min(cmin, c);
  }
  double drift = cmin > 0 ? cmax / cmin : std::numeric_limits<double>::infinity();
  rep.extra_summary.emplace_back("observed_C", cmax);
  rep.extra_summary.emplace_back("drift", drift);
  rep.pass = drift <= m.experiment.drift_bound;
  rep.wall_seconds = watch.seconds();
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport singular_gain_experiment(const Manifest& m, bool verbose) {
  Stopwatch watch;
  const DomainSpec& dom = m.domain;
  int n = dom.n();
  int mexp = m.experiment.singular_m;
  if (mexp < 1) throw ManifestError("experiment.m must be >= 1");

  NormParams params = m.norms;
  if (m.norms_delta_auto) params.delta = 0.9 * std::min(m.delta_max, dom.eps);
  params.validate();

  FlowSolverConfig ode;
  ode.rel_tol = ode.abs_tol = 1e-10;
  ode.max_step = 0.1;

  // X = t^m d/dx1 on R^{n+1}.
  std::vector<Expression> coeffs(static_cast<size_t>(n + 1));
  coeffs[0] = Expression::parse("t^" + std::to_string(mexp), n + 1);
  VectorField X(coeffs);
  Straightening st = straighten(X, dom.V, ode);

  // Closed-form check: p(x,t) = x + t^{m+1}/(m+1) e1.
  double straighten_err = 0;
  {
    TensorGrid grid(dom.V2, 4);
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      Point x = grid.point(i);
      for (double t : {0.3 * dom.eps, -0.35 * dom.eps, 0.45 * dom.eps}) {
        Point p = st.forward(x, t);
        Point want = x;
        want[0] += std::pow(t, mexp + 1) / (mexp + 1);
        straighten_err = std::max(straighten_err, p.dist(want));
      }
    }
  }

  ExperimentReport rep;
  rep.experiment = "singular_gain";
  rep.params = m.echo();
  rep.params.emplace_back("resolved.delta", format_double(params.delta));
  rep.columns = {"lhs", "rhs"};

  auto rho = time_window(dom);
  auto corpus = test_corpus(dom, m.experiment.corpus);
  auto res_U = ures(n, dom.grid_res, dom.t_res);
  Box U = dom.U();

  for (const auto& psi : corpus) {
    auto phi = ScalarField::tensor_with_time(psi, rho);

    // omega_G(t) = sup_{|tau|<=t} || psi(p(., tau)) - psi ||_{L^p(V)}.
    auto omega = [&](double t) {
      int msamp = params.tau_samples;
      double sup = 0;
      for (int i = msamp; i >= 1; --i) {
        for (int sign = -1; sign <= 1; sign += 2) {
          double tau = sign * t * i / msamp;
          // Preimage of the support under G(tau): map its lattice through
          // the inverse characteristic.
          std::optional<Box> image;
          if (psi.support()) {
            const Box& S = *psi.support();
            Box out = S;
            double max_disp = 0;
            int samples = 1;
            for (int a = 0; a < n; ++a) samples *= 3;
            for (int c = 0; c < samples; ++c) {
              Point pt(n);
              int code = c;
              for (int a = 0; a < n; ++a) {
                pt[a] = S.lo[a] + S.width(a) * (code % 3) / 2.0;
                code /= 3;
              }
              Point mapped = st.inverse(pt, tau);
              for (int a = 0; a < n; ++a) {
                out.lo[a] = std::min(out.lo[a], mapped[a]);
                out.hi[a] = std::max(out.hi[a], mapped[a]);
                max_disp = std::max(max_disp, std::abs(mapped[a] - pt[a]));
              }
            }
            image = out.inflate(0.1 * max_disp + 100 * ode.abs_tol);
          }
          auto displaced_value = [&](const Point& x) { return psi(st.forward(x, tau).view()); };
          sup = std::max(sup,
                         displaced_difference_lp(psi, displaced_value, image, dom.V, params.p,
                                                 dom.grid_res));
        }
      }
      return sup;
    };
    double lhs = besov_time_integral(omega, params.theta(), params);

    // rhs = || d phi / dt ||_p + || X phi ||_p over U, symbolic gradients.
    auto dt_term = ScalarField(n + 1, [phi, n](std::span<const double> p) {
      Point grad(n + 1);
      phi.gradient(p, grad.view());
      return grad[n];
    });
    auto x_term = ScalarField(n + 1, [phi, n, mexp](std::span<const double> p) {
      Point grad(n + 1);
      phi.gradient(p, grad.view());
      return std::pow(p[static_cast<size_t>(n)], mexp) * grad[0];
    });
    if (phi.support()) {
      dt_term.set_support(*phi.support());
      x_term.set_support(*phi.support());
    }
    double rhs = lp_norm(dt_term, U, params.p, res_U) + lp_norm(x_term, U, params.p, res_U);

    rep.rows.push_back({psi.id(), {lhs, rhs}, lhs, rhs, lhs / rhs});
    progress(verbose, psi.id() + " ratio " + format_double(lhs / rhs));
  }

  rep.finalize_ratios();
  rep.extra_summary.emplace_back("straighten_err", straighten_err);
  rep.pass = straighten_err <= 1e-9 && rep.maxmin <= m.experiment.ratio_bound;
  rep.wall_seconds = watch.seconds();
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport verify_residuals(const Manifest& m, bool verbose) {
  Stopwatch watch;
  const DomainSpec& dom = m.domain;
  int n = dom.n();

  FlowSolverConfig ode;
  ode.rel_tol = ode.abs_tol = 1e-10;
  ode.max_step = 0.1;

  ExperimentReport rep;
  rep.experiment = "residuals";
  rep.params = m.echo();
  rep.columns = {"included", "excluded", "degenerate"};

  std::vector<double> s_grid;
  for (int k = m.experiment.s_min_exp; k <= m.experiment.s_max_exp; ++k)
    s_grid.push_back(std::pow(2.0, -k));

  bool pass = true;

  // Commutator-flow residual (Lemma 1.1 (*)) on the first two slice fields.
  if (m.fields.size() >= 2) {
    std::vector<VectorField> slice;
    for (const auto& nf : m.fields) {
      if (nf.field.dim() == n) {
        slice.push_back(nf.field);
      } else if (nf.field.dim() == n + 1) {
        slice.push_back(restrict_to_slice(nf.field));
      }
    }
    Point y = dom.V2.center();
    y[0] += dom.V2.inradius() / 8;
    auto fit = residual_exponent(slice[0], slice[1], y, s_grid, ode);
    double slope = fit.degenerate ? 0.0 : fit.slope;
    rep.rows.push_back({"commutator_residual",
                        {static_cast<double>(fit.included_s.size()),
                         static_cast<double>(fit.excluded_s.size()),
                         fit.degenerate ? 1.0 : 0.0},
                        slope,
                        1.0,
                        slope});
    bool ok = !fit.degenerate && slope >= m.experiment.slope_lo && slope <= m.experiment.slope_hi;
    pass = pass && ok;
    progress(verbose, "commutator slope " + format_double(slope));
  } else {
    throw ManifestError("residuals experiment needs at least two fields");
  }

  // Defect residual (R_i(t) = x + o(t^2)) on the declared ambient pair.
  if (!m.fields_defect.empty()) {
    const VectorField& X = m.fields_defect.front().field;
    if (X.dim() != n + 1) throw ManifestError("fields_defect entries must live on R^{n+1}");
    VectorField Y = restrict_to_slice(X);
    Point x = dom.V2.center();
    x[0] += dom.V2.inradius() / 8;
    auto fit = defect_residual(Y, X, x, s_grid, dom.V, ode);
    double slope = fit.degenerate ? 0.0 : fit.slope;
    rep.rows.push_back({"defect_residual",
                        {static_cast<double>(fit.included_s.size()),
                         static_cast<double>(fit.excluded_s.size()),
                         fit.degenerate ? 1.0 : 0.0},
                        slope,
                        1.0,
                        slope});
    bool ok = !fit.degenerate && slope >= m.experiment.defect_lo && slope <= m.experiment.defect_hi;
    pass = pass && ok;
    progress(verbose, "defect slope " + format_double(slope));
  }

  rep.finalize_ratios();
  rep.pass = pass;
  rep.wall_seconds = watch.seconds();
  return rep;
}

}  // namespace flowtrace
