#include "flowtrace/basis.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace flowtrace {

namespace {

int numerical_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  double cutoff = tol >= 0 ? tol : 1e-8 * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return rank;
}

Eigen::VectorXd eval_column(const VectorField& Z, const Point& at) {
  Point v = Z(at.view());
  Eigen::VectorXd col(v.dim());
  for (int i = 0; i < v.dim(); ++i) col(i) = v[i];
  return col;
}

}  // namespace

Step2Result check_step2(std::span<const VectorField> fields, const Point& at, double tol) {
  Step2Result result;
  if (fields.empty()) return result;
  int d = fields.front().dim();
  for (const auto& f : fields)
    if (f.dim() != d) throw std::invalid_argument("check_step2: mixed dimensions");
  int k = static_cast<int>(fields.size());

  // Columns: the fields, then pairwise brackets in lexicographic order.
  std::vector<VectorField> brackets;
  std::vector<std::pair<int, int>> pairs;
  for (int l = 0; l < k; ++l)
    for (int m = l + 1; m < k; ++m) {
      brackets.push_back(lie_bracket(fields[static_cast<size_t>(l)], fields[static_cast<size_t>(m)]));
      pairs.emplace_back(l, m);
    }

  Eigen::MatrixXd all(d, k + static_cast<int>(brackets.size()));
  for (int i = 0; i < k; ++i) all.col(i) = eval_column(fields[static_cast<size_t>(i)], at);
  for (size_t b = 0; b < brackets.size(); ++b)
    all.col(k + static_cast<int>(b)) = eval_column(brackets[b], at);

  result.rank = numerical_rank(all, tol);
  result.satisfied = (result.rank == d);

  // Greedy spanning set: layer one, then brackets that raise the rank.
  Basis span_set;
  span_set.fields.assign(fields.begin(), fields.end());
  span_set.first_layer = k;
  Eigen::MatrixXd chosen = all.leftCols(k);
  int rank = numerical_rank(chosen, tol);
  for (size_t b = 0; b < brackets.size() && rank < result.rank; ++b) {
    Eigen::MatrixXd trial(d, chosen.cols() + 1);
    trial << chosen, all.col(k + static_cast<int>(b));
    int r = numerical_rank(trial, tol);
    if (r > rank) {
      rank = r;
      chosen = trial;
      span_set.fields.push_back(brackets[b]);
      span_set.provenance.push_back(pairs[b]);
    }
  }
  result.spanning_set = std::move(span_set);
  return result;
}

Basis complete_basis(std::span<const VectorField> first_layer, const Point& at) {
  Step2Result r = check_step2(first_layer, at);
  if (!r.satisfied)
    throw std::runtime_error("complete_basis: step-2 bracket condition fails at the base point (rank " +
                             std::to_string(r.rank) + " of " +
                             std::to_string(first_layer.empty() ? 0 : first_layer.front().dim()) + ")");
  return std::move(r.spanning_set);
}

int value_rank(std::span<const VectorField> fields, const Point& at, double tol) {
  if (fields.empty()) return 0;
  Eigen::MatrixXd values(fields.front().dim(), static_cast<Eigen::Index>(fields.size()));
  for (size_t i = 0; i < fields.size(); ++i) values.col(static_cast<Eigen::Index>(i)) = eval_column(fields[i], at);
  return numerical_rank(values, tol);
}

double sup_difference_on(const VectorField& A, const VectorField& B, const Box& box, int res) {
  if (A.dim() != B.dim() || A.dim() != box.dim())
    throw std::invalid_argument("sup_difference_on: dimension mismatch");
  TensorGrid grid(box, res);
  double sup = 0;
  Point u(A.dim()), v(A.dim());
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    Point p = grid.point(i);
    A.eval_into(p.view(), u.view());
    B.eval_into(p.view(), v.view());
    for (int j = 0; j < A.dim(); ++j) sup = std::max(sup, std::abs(u[j] - v[j]));
  }
  return sup;
}

}  // namespace flowtrace
