#pragma once

#include <span>
#include <utility>
#include <vector>

#include "flowtrace/vector_field.hpp"

namespace flowtrace {

/// Ordered frame Z_1..Z_n. The first `first_layer` entries are given fields;
/// entries beyond carry bracket provenance Z_i = [Z_l, Z_m] with l, m in the
/// first layer (0-based indices).
struct Basis {
  std::vector<VectorField> fields;
  int first_layer = 0;
  std::vector<std::pair<int, int>> provenance;  // one entry per bracket field

  int size() const { return static_cast<int>(fields.size()); }
  int dim() const { return fields.empty() ? 0 : fields.front().dim(); }
  const VectorField& operator[](int i) const { return fields[static_cast<size_t>(i)]; }
  std::span<const VectorField> layer_one() const {
    return std::span<const VectorField>(fields.data(), static_cast<size_t>(first_layer));
  }
};

struct Step2Result {
  bool satisfied = false;
  int rank = 0;
  Basis spanning_set;
};

/// Numerical rank of the matrix whose columns are the fields and all pairwise
/// brackets at `at`; satisfied iff rank == d. tol < 0 means the default
/// 1e-8 * (largest singular value). Degenerate inputs yield satisfied=false.
Step2Result check_step2(std::span<const VectorField> fields, const Point& at, double tol = -1);

/// Completes Z_1..Z_k with bracket fields [Z_l, Z_m], picked greedily in
/// lexicographic (l, m) order until the frame has rank d at `at`. Throws if
/// the step-2 condition fails there.
Basis complete_basis(std::span<const VectorField> first_layer, const Point& at);

/// Sup over a box grid of the coefficient-wise difference of two fields.
/// Used to validate bracket provenance.
double sup_difference_on(const VectorField& A, const VectorField& B, const Box& box, int res = 9);

/// Numerical rank of the evaluation matrix of the fields at `at` (columns
/// are field values, no brackets). Same tolerance convention as check_step2.
int value_rank(std::span<const VectorField> fields, const Point& at, double tol = -1);

}  // namespace flowtrace
