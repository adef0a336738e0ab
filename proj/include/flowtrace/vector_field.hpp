#pragma once

#include <span>
#include <string>
#include <vector>

#include "flowtrace/expr.hpp"
#include "flowtrace/geometry.hpp"

namespace flowtrace {

/// A smooth vector field on R^d with one symbolic coefficient per coordinate.
/// On R^{n+1} the last slot holds the d/dt coefficient by convention.
class VectorField {
 public:
  explicit VectorField(std::vector<Expression> coeffs);

  /// Parses one coefficient expression per coordinate (parse_field).
  static VectorField parse(std::span<const std::string> coeff_texts);
  static VectorField axis(int dim, int j);  // d/dx_{j+1}
  static VectorField zero(int dim);

  int dim() const { return static_cast<int>(coeffs_.size()); }
  const Expression& coeff(int j) const { return coeffs_[static_cast<size_t>(j)]; }

  Point operator()(std::span<const double> point) const;
  void eval_into(std::span<const double> point, std::span<double> out) const;

  bool is_zero() const;
  std::string str() const;

  friend VectorField operator+(const VectorField&, const VectorField&);
  friend VectorField operator-(const VectorField&, const VectorField&);
  friend VectorField operator*(double, const VectorField&);
  /// Pointwise scaling a(x) * Z, the coefficient-matrix building block of
  /// basis changes.
  friend VectorField operator*(const Expression&, const VectorField&);

 private:
  std::vector<Expression> coeffs_;
};

/// [X, Y]^j = X(Y^j) - Y(X^j), computed symbolically.
VectorField lie_bracket(const VectorField& X, const VectorField& Y);

/// Substitutes t = 0 into the x-coefficients of a field on R^{n+1} and drops
/// the t slot. Requires the d/dt coefficient to vanish at t = 0 (checked
/// symbolically, then on a grid of the unit box with tolerance `tol`).
VectorField restrict_to_slice(const VectorField& X, double tol = 1e-10);

/// Re-reads a field on R^n as a field on R^{n+1} with zero d/dt coefficient.
VectorField lift_to_ambient(const VectorField& Y);

/// Sampled sup of |Z(x)|_2 over a box grid. Upper-bound estimate for flow
/// displacement margins; `headroom` scales the sampled value.
double sup_norm_on(const VectorField& Z, const Box& box, int res = 16, double headroom = 1.5);

/// Sampled sup of the Jacobian inf-norm (max row sum) over a box grid.
double lipschitz_on(const VectorField& Z, const Box& box, int res = 16, double headroom = 1.5);

}  // namespace flowtrace
