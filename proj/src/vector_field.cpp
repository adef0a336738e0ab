#include "flowtrace/vector_field.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flowtrace {

VectorField::VectorField(std::vector<Expression> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw std::invalid_argument("VectorField: no coefficients");
  if (dim() > kMaxDim)
    throw std::invalid_argument("VectorField: dimension exceeds kMaxDim = " +
                                std::to_string(kMaxDim));
  for (const auto& c : coeffs_)
    if (c.max_variable() >= dim())
      throw std::invalid_argument("VectorField: coefficient uses variable beyond dimension");
}

VectorField VectorField::parse(std::span<const std::string> coeff_texts) {
  int d = static_cast<int>(coeff_texts.size());
  std::vector<Expression> cs;
  cs.reserve(coeff_texts.size());
  for (const auto& text : coeff_texts) cs.push_back(Expression::parse(text, d));
  return VectorField(std::move(cs));
}

VectorField VectorField::axis(int dim, int j) {
  std::vector<Expression> cs(static_cast<size_t>(dim));
  cs[static_cast<size_t>(j)] = Expression::constant(1);
  return VectorField(std::move(cs));
}

VectorField VectorField::zero(int dim) {
  return VectorField(std::vector<Expression>(static_cast<size_t>(dim)));
}

Point VectorField::operator()(std::span<const double> point) const {
  Point out(dim());
  eval_into(point, out.view());
  return out;
}

void VectorField::eval_into(std::span<const double> point, std::span<double> out) const {
  if (static_cast<int>(point.size()) != dim())
    throw std::invalid_argument("VectorField: point dimension mismatch");
  for (int j = 0; j < dim(); ++j) out[static_cast<size_t>(j)] = coeffs_[static_cast<size_t>(j)](point);
}

bool VectorField::is_zero() const {
  for (const auto& c : coeffs_)
    if (!c.is_zero()) return false;
  return true;
}

std::string VectorField::str() const {
  std::ostringstream out;
  out << '(';
  for (int j = 0; j < dim(); ++j) {
    if (j) out << ", ";
    out << coeffs_[static_cast<size_t>(j)].str();
  }
  out << ')';
  return out.str();
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("VectorField +: dimension mismatch");
  std::vector<Expression> cs;
  cs.reserve(static_cast<size_t>(a.dim()));
  for (int j = 0; j < a.dim(); ++j) cs.push_back(a.coeff(j) + b.coeff(j));
  return VectorField(std::move(cs));
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("VectorField -: dimension mismatch");
  std::vector<Expression> cs;
  cs.reserve(static_cast<size_t>(a.dim()));
  for (int j = 0; j < a.dim(); ++j) cs.push_back(a.coeff(j) - b.coeff(j));
  return VectorField(std::move(cs));
}

VectorField operator*(double s, const VectorField& a) {
  std::vector<Expression> cs;
  cs.reserve(static_cast<size_t>(a.dim()));
  for (int j = 0; j < a.dim(); ++j) cs.push_back(Expression::constant(s) * a.coeff(j));
  return VectorField(std::move(cs));
}

VectorField operator*(const Expression& f, const VectorField& a) {
  std::vector<Expression> cs;
  cs.reserve(static_cast<size_t>(a.dim()));
  for (int j = 0; j < a.dim(); ++j) cs.push_back(f * a.coeff(j));
  return VectorField(std::move(cs));
}

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  if (X.dim() != Y.dim()) throw std::invalid_argument("lie_bracket: dimension mismatch");
  int d = X.dim();
  std::vector<Expression> cs;
  cs.reserve(static_cast<size_t>(d));
  for (int j = 0; j < d; ++j) {
    Expression cj;
    for (int i = 0; i < d; ++i) {
      cj = cj + X.coeff(i) * Y.coeff(j).derivative(i);
      cj = cj - Y.coeff(i) * X.coeff(j).derivative(i);
    }
    cs.push_back(cj);
  }
  return VectorField(std::move(cs));
}

VectorField restrict_to_slice(const VectorField& X, double tol) {
  int d = X.dim();
  if (d < 2) throw std::invalid_argument("restrict_to_slice: field must live on R^{n+1}");
  int t = d - 1;
  Expression t_coeff_at_0 = X.coeff(t).substitute(t, 0);
  if (!t_coeff_at_0.is_zero()) {
    // Not symbolically zero; sample the unit box of the slice.
    TensorGrid grid(Box::cube(d - 1, -1, 1), 5);
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      Point q = grid.point(i);
      Point p(d);
      for (int j = 0; j < d - 1; ++j) p[j] = q[j];
      p[t] = 0;
      if (std::abs(X.coeff(t)(p.view())) > tol)
        throw std::invalid_argument("restrict_to_slice: d/dt coefficient does not vanish at t=0");
    }
  }
  std::vector<Expression> cs;
  cs.reserve(static_cast<size_t>(d - 1));
  for (int j = 0; j < d - 1; ++j) cs.push_back(X.coeff(j).substitute(t, 0));
  return VectorField(std::move(cs));
}

VectorField lift_to_ambient(const VectorField& Y) {
  std::vector<Expression> cs;
  cs.reserve(static_cast<size_t>(Y.dim()) + 1);
  for (int j = 0; j < Y.dim(); ++j) cs.push_back(Y.coeff(j));
  cs.push_back(Expression());
  return VectorField(std::move(cs));
}

double sup_norm_on(const VectorField& Z, const Box& box, int res, double headroom) {
  TensorGrid grid(box, res);
  double sup = 0;
  Point v(Z.dim());
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    Point p = grid.point(i);
    Z.eval_into(p.view(), v.view());
    sup = std::max(sup, v.norm());
  }
  return sup * headroom;
}

double lipschitz_on(const VectorField& Z, const Box& box, int res, double headroom) {
  int d = Z.dim();
  std::vector<Expression> jac;
  jac.reserve(static_cast<size_t>(d * d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) jac.push_back(Z.coeff(i).derivative(j));

  TensorGrid grid(box, res);
  double sup = 0;
  for (std::int64_t g = 0; g < grid.size(); ++g) {
    Point p = grid.point(g);
    for (int i = 0; i < d; ++i) {
      double row = 0;
      for (int j = 0; j < d; ++j) row += std::abs(jac[static_cast<size_t>(i * d + j)](p.view()));
      sup = std::max(sup, row);
    }
  }
  return sup * headroom;
}

}  // namespace flowtrace
