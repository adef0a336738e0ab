#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowtrace/geometry.hpp"
#include "flowtrace/ode.hpp"
#include "flowtrace/vector_field.hpp"

namespace flowtrace {

/// A real-valued function on R^d: an evaluator plus optional declared
/// support, analytic gradient and sup bound. Evaluation short-circuits to 0
/// outside the support box, which is also what lets grid loops skip far-away
/// points.
class ScalarField {
 public:
  using Eval = std::function<double(std::span<const double>)>;
  using Grad = std::function<void(std::span<const double>, std::span<double>)>;

  ScalarField(int dim, Eval eval) : dim_(dim), eval_(std::move(eval)) {}

  int dim() const { return dim_; }
  double operator()(std::span<const double> p) const {
    if (support_ && !support_->contains(p)) return 0.0;
    return eval_(p);
  }

  /// Closed-form members carry exact gradients; operator-composed ones
  /// (averaged, extended) do not and are differentiated by finite
  /// differences downstream.
  bool closed_form() const { return static_cast<bool>(grad_); }
  void gradient(std::span<const double> p, std::span<double> out) const;

  const std::optional<Box>& support() const { return support_; }
  double sup_bound() const { return sup_bound_; }
  const std::string& id() const { return id_; }

  ScalarField& set_support(const Box& b) {
    support_ = b;
    return *this;
  }
  ScalarField& set_gradient(Grad g) {
    grad_ = std::move(g);
    return *this;
  }
  ScalarField& set_sup_bound(double b) {
    sup_bound_ = b;
    return *this;
  }
  ScalarField& set_id(std::string id) {
    id_ = std::move(id);
    return *this;
  }

  /// Field backed by a symbolic expression; gradient is exact.
  static ScalarField from_expression(const Expression& e, int dim, std::string id = "expr");

  friend ScalarField operator+(const ScalarField&, const ScalarField&);
  friend ScalarField operator*(double, const ScalarField&);
  /// psi(x) * rho(t) on R^{n+1} from psi on R^n and rho on R^1.
  static ScalarField tensor_with_time(const ScalarField& psi, const ScalarField& rho);
  /// ((x_axis - center) / scale) * f, the polynomial-modulated variant.
  static ScalarField axis_modulated(const ScalarField& f, int axis, double center, double scale);

 private:
  int dim_;
  Eval eval_;
  Grad grad_;
  std::optional<Box> support_;
  double sup_bound_ = std::numeric_limits<double>::infinity();
  std::string id_ = "field";
};

/// The standard smooth bump: exp(1 - 1/(1 - r^2)) for r = |x-center|/scale
/// inside the unit ball of the scaling, 0 outside. Value 1 at the center.
ScalarField bump(const Point& center, double scale);

/// 1-D cutoff rho_delta(t) = bump(t/delta), support (-delta, delta), value 1
/// at 0.
ScalarField time_cutoff(double delta);

/// Nested boxes V2 cc V1 cc V in R^n, the ambient thickness eps
/// (U = V x (-eps, eps)), a flow-safety radius and grid resolutions.
struct DomainSpec {
  Box V, V1, V2;
  double eps = 0.5;
  double delta = 0.25;
  int grid_res = 33;
  int t_res = 24;

  int n() const { return V.dim(); }
  Box U() const { return V.with_axis(-eps, eps); }

  /// V=[-1,1]^n, V1=[-0.6,0.6]^n, V2=[-0.4,0.4]^n, eps=0.5.
  static DomainSpec defaults(int n);
  /// Strict nesting with positive margins, delta > 0, grid_res >= 8.
  void validate() const;
};

/// Largest delta <= delta_max (10 bisection rounds) such that sampled flows
/// of every field from a boundary grid of V1 stay in V for |tau| <= delta.
/// Boundary-only sampling is a heuristic; callers apply their own safety
/// factor when picking experiment radii. Throws when no positive delta
/// survives at resolution delta_max / 2^10.
double admissible_delta(std::span<const VectorField> fields, const Box& V1, const Box& V,
                        double delta_max, const FlowSolverConfig& cfg, int boundary_res = 16);

/// Deterministic test-function family supported in V2: dyadic-scale bumps,
/// axis-modulated bumps and translated bumps, in a fixed documented order.
std::vector<ScalarField> test_corpus(const DomainSpec& spec, int count);

/// Sampled sup and Lipschitz envelope of a field near a box; displacement()
/// is the Gronwall bound |e^{tau Z} x - x| <= |tau| sup exp(|tau| lip) used
/// to inflate support boxes. Compute once per (field, box), query per tau.
struct FieldEnvelope {
  double sup = 0;
  double lip = 0;
  double displacement(double tau) const { return std::abs(tau) * sup * std::exp(std::abs(tau) * lip); }
};

FieldEnvelope field_envelope(const VectorField& Z, const Box& box, double tau_max = 0.5);

/// Bounding box of { e^{s Z} x : x in box, s between 0 and tau }: mapped
/// 3^n lattice samples at s = tau/2 and tau joined with the box itself,
/// padded by a tenth of the observed displacement and capped by a Gronwall
/// bound. Tight for near-affine flows; always an outer estimate at the
/// scales the toolkit works at.
Box swept_flow_box(const Box& box, const VectorField& Z, double tau, const FlowSolverConfig& cfg);

}  // namespace flowtrace
