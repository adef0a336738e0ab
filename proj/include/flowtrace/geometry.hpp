#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowtrace {

/// Everything in this toolkit is desk-scale local analysis; points live in
/// R^d with d <= kMaxDim so hot paths can use fixed-capacity storage.
inline constexpr int kMaxDim = 8;

/// A point (or tangent vector) in R^d, d <= kMaxDim.
struct Point {
  std::array<double, kMaxDim> a{};
  int n = 0;

  Point() = default;
  explicit Point(int dim) : n(dim) { assert(dim >= 0 && dim <= kMaxDim); }
  Point(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
    assert(n <= kMaxDim);
    int i = 0;
    for (double x : xs) a[static_cast<size_t>(i++)] = x;
  }
  static Point from(std::span<const double> xs) {
    Point p(static_cast<int>(xs.size()));
    for (int i = 0; i < p.n; ++i) p.a[static_cast<size_t>(i)] = xs[static_cast<size_t>(i)];
    return p;
  }

  int dim() const { return n; }
  double& operator[](int i) { return a[static_cast<size_t>(i)]; }
  double operator[](int i) const { return a[static_cast<size_t>(i)]; }
  std::span<const double> view() const { return {a.data(), static_cast<size_t>(n)}; }
  std::span<double> view() { return {a.data(), static_cast<size_t>(n)}; }

  friend Point operator+(Point u, const Point& v) {
    for (int i = 0; i < u.n; ++i) u[i] += v[i];
    return u;
  }
  friend Point operator-(Point u, const Point& v) {
    for (int i = 0; i < u.n; ++i) u[i] -= v[i];
    return u;
  }
  friend Point operator*(double s, Point u) {
    for (int i = 0; i < u.n; ++i) u[i] *= s;
    return u;
  }
  double norm2() const {
    double s = 0;
    for (int i = 0; i < n; ++i) s += a[static_cast<size_t>(i)] * a[static_cast<size_t>(i)];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }
  double dist(const Point& o) const { return (*this - o).norm(); }
};

/// Axis-aligned box in R^d.
struct Box {
  Point lo, hi;

  Box() = default;
  Box(Point l, Point h) : lo(l), hi(h) {
    if (l.dim() != h.dim()) throw std::invalid_argument("Box: lo/hi dimension mismatch");
  }
  /// The cube [a,b]^dim.
  static Box cube(int dim, double a, double b) {
    Point l(dim), h(dim);
    for (int i = 0; i < dim; ++i) {
      l[i] = a;
      h[i] = b;
    }
    return {l, h};
  }

  int dim() const { return lo.dim(); }
  double width(int i) const { return hi[i] - lo[i]; }
  double volume() const {
    double v = 1;
    for (int i = 0; i < dim(); ++i) v *= width(i);
    return v;
  }
  Point center() const { return 0.5 * (lo + hi); }
  /// Radius of the largest inscribed ball.
  double inradius() const {
    double r = width(0) / 2;
    for (int i = 1; i < dim(); ++i) r = std::min(r, width(i) / 2);
    return r;
  }

  bool contains(std::span<const double> p, double slack = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (p[static_cast<size_t>(i)] < lo[i] - slack || p[static_cast<size_t>(i)] > hi[i] + slack)
        return false;
    return true;
  }
  bool contains_box(const Box& inner, double margin = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (inner.lo[i] < lo[i] + margin || inner.hi[i] > hi[i] - margin) return false;
    return true;
  }

  Box inflate(double m) const {
    Box b = *this;
    for (int i = 0; i < dim(); ++i) {
      b.lo[i] -= m;
      b.hi[i] += m;
    }
    return b;
  }
  /// Intersection, empty boxes collapse to a zero-width box at the midpoint.
  Box intersect(const Box& o) const {
    Box b = *this;
    for (int i = 0; i < dim(); ++i) {
      b.lo[i] = std::max(lo[i], o.lo[i]);
      b.hi[i] = std::min(hi[i], o.hi[i]);
      if (b.lo[i] > b.hi[i]) b.lo[i] = b.hi[i] = 0.5 * (b.lo[i] + b.hi[i]);
    }
    return b;
  }
  /// Extend into R^{d+1} with [t_lo, t_hi] as the last axis.
  Box with_axis(double t_lo, double t_hi) const {
    Box b;
    b.lo = Point(dim() + 1);
    b.hi = Point(dim() + 1);
    for (int i = 0; i < dim(); ++i) {
      b.lo[i] = lo[i];
      b.hi[i] = hi[i];
    }
    b.lo[dim()] = t_lo;
    b.hi[dim()] = t_hi;
    return b;
  }
  /// Drop the last axis.
  Box slice() const {
    Box b;
    b.lo = Point(dim() - 1);
    b.hi = Point(dim() - 1);
    for (int i = 0; i + 1 < dim(); ++i) {
      b.lo[i] = lo[i];
      b.hi[i] = hi[i];
    }
    return b;
  }
};

/// Cell-centered uniform tensor grid on a box: res[i] points along axis i,
/// x_j = lo + (j + 1/2) * width / res. Midpoint placement keeps sums equal to
/// volume for constants and never lands exactly on support boundaries.
struct TensorGrid {
  Box box;
  std::array<int, kMaxDim> res{};

  TensorGrid(const Box& b, std::span<const int> r) : box(b) {
    if (static_cast<int>(r.size()) != b.dim())
      throw std::invalid_argument("TensorGrid: res/box dimension mismatch");
    for (int i = 0; i < b.dim(); ++i) {
      if (r[static_cast<size_t>(i)] < 1) throw std::invalid_argument("TensorGrid: res < 1");
      res[static_cast<size_t>(i)] = r[static_cast<size_t>(i)];
    }
  }
  TensorGrid(const Box& b, int uniform_res) : box(b) {
    if (uniform_res < 1) throw std::invalid_argument("TensorGrid: res < 1");
    for (int i = 0; i < b.dim(); ++i) res[static_cast<size_t>(i)] = uniform_res;
  }

  int dim() const { return box.dim(); }
  std::int64_t size() const {
    std::int64_t s = 1;
    for (int i = 0; i < dim(); ++i) s *= res[static_cast<size_t>(i)];
    return s;
  }
  double cell_volume() const {
    double v = 1;
    for (int i = 0; i < dim(); ++i) v *= box.width(i) / res[static_cast<size_t>(i)];
    return v;
  }
  Point point(std::int64_t flat) const {
    Point p(dim());
    for (int i = dim() - 1; i >= 0; --i) {
      int r = res[static_cast<size_t>(i)];
      std::int64_t j = flat % r;
      flat /= r;
      p[i] = box.lo[i] + (static_cast<double>(j) + 0.5) * box.width(i) / r;
    }
    return p;
  }
};

}  // namespace flowtrace
