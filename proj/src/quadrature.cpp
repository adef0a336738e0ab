#include "flowtrace/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace flowtrace {

namespace {

GaussRule compute_gauss(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  GaussRule rule;
  rule.nodes.resize(static_cast<size_t>(order));
  rule.weights.resize(static_cast<size_t>(order));
  int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = 0;
      for (int j = 0; j < order; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
      }
      pp = order * (x * p0 - p1) / (x * x - 1);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[static_cast<size_t>(i)] = -x;
    rule.nodes[static_cast<size_t>(order - 1 - i)] = x;
    double w = 2.0 / ((1 - x * x) * pp * pp);
    rule.weights[static_cast<size_t>(i)] = w;
    rule.weights[static_cast<size_t>(order - 1 - i)] = w;
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss(order)).first;
  return it->second;
}

GaussRule gauss_on_interval(int order, double a, double b) {
  const GaussRule& ref = gauss_legendre(order);
  GaussRule rule;
  rule.nodes.reserve(ref.nodes.size());
  rule.weights.reserve(ref.nodes.size());
  double mid = (a + b) / 2, half = (b - a) / 2;
  for (size_t i = 0; i < ref.nodes.size(); ++i) {
    rule.nodes.push_back(mid + half * ref.nodes[i]);
    rule.weights.push_back(half * ref.weights[i]);
  }
  return rule;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double lo, double hi, double flo,
                   double fmid, double fhi, double whole, double tol, int depth) {
  double mid = (lo + hi) / 2;
  double flm = f((lo + mid) / 2), frm = f((mid + hi) / 2);
  double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
  double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
  double diff = left + right - whole;
  if (std::abs(diff) < 15 * tol) return left + right + diff / 15;
  if (depth <= 0) throw std::runtime_error("adaptive_integrate: did not converge");
  return simpson_rec(f, lo, mid, flo, flm, fmid, left, tol / 2, depth - 1) +
         simpson_rec(f, mid, hi, fmid, frm, fhi, right, tol / 2, depth - 1);
}

}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_depth) {
  if (a == b) return 0;
  if (a > b) return -adaptive_integrate(f, b, a, tol, max_depth);
  double flo = f(a), fhi = f(b), fmid = f((a + b) / 2);
  double whole = (b - a) / 6 * (flo + 4 * fmid + fhi);
  return simpson_rec(f, a, b, flo, fmid, fhi, whole, tol, max_depth);
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double s = 0;
  for (size_t i = 1; i < x.size(); ++i) s += (x[i] - x[i - 1]) * (y[i] + y[i - 1]) / 2;
  return s;
}

}  // namespace flowtrace
