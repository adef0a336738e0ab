#include "flowtrace/straighten.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "testutil.hpp"

using namespace flowtrace;

namespace {

VectorField parse_vf(std::vector<std::string> texts) {
  return VectorField::parse(std::span<const std::string>(texts));
}

FlowSolverConfig tight() {
  FlowSolverConfig cfg;
  cfg.rel_tol = cfg.abs_tol = 1e-11;
  cfg.max_step = 0.05;
  return cfg;
}

}  // namespace

TEST_CASE("straighten constant field: p(x,t) = x + t e1") {
  auto X = parse_vf({"1", "0", "0"});  // d/dx1 on R^2 x R_t
  auto st = straighten(X, Box::cube(2, -2, 2), tight());
  Point p = st.forward(Point{0.1, 0.3}, 0.25);
  CHECK(p[0] == doctest::Approx(0.35).epsilon(1e-11));
  CHECK(p[1] == doctest::Approx(0.3).epsilon(1e-11));
}

TEST_CASE("straighten t^m field matches x1 + t^{m+1}/(m+1)") {
  for (int m : {1, 2, 3}) {
    auto X = parse_vf({"t^" + std::to_string(m), "0", "0"});
    auto st = straighten(X, Box::cube(2, -2, 2), tight());
    for (double t : {0.1, 0.3, -0.2}) {
      Point p = st.forward(Point{0.05, -0.4}, t);
      double want = 0.05 + std::pow(t, m + 1) / (m + 1);
      CHECK(p[0] == doctest::Approx(want).epsilon(1e-9));
      CHECK(p[1] == doctest::Approx(-0.4).epsilon(1e-11));
    }
  }
}

TEST_CASE("straighten zero field is the identity, exact at t=0") {
  auto X = VectorField::zero(3);
  auto st = straighten(X, Box::cube(2, -1, 1), tight());
  Point x{0.2, -0.7};
  CHECK(st.forward(x, 0.4).dist(x) == 0.0);
  CHECK(st.forward(x, 0.0).dist(x) == 0.0);  // p(x,0) = x with no integration at all
}

TEST_CASE("straighten rejects fields with a d/dt component") {
  CHECK_THROWS(straighten(parse_vf({"0", "0", "1"}), Box::cube(2, -1, 1), tight()));
}

TEST_CASE("straighten inverse property on a grid") {
  // Nonautonomous field with genuine x and t dependence.
  auto X = parse_vf({"x2 + t", "sin(x1)", "0"});
  Box box = Box::cube(2, -2, 2);
  auto st = straighten(X, box, tight());
  TensorGrid grid(Box::cube(2, -0.5, 0.5), 10);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    Point x = grid.point(i);
    for (double t : {0.2, -0.3}) {
      Point y = st.forward(x, t);
      Point back = st.inverse(y, t);
      CHECK(back.dist(x) <= 1e-10);  // 10x ODE tol
    }
  }
}

TEST_CASE("reconstruct: vanishing source and t=0 reduce to the trace") {
  auto X = parse_vf({"1", "0", "0"});
  auto st = straighten(X, Box::cube(2, -2, 2), tight());
  auto phi0 = ScalarField::from_expression(Expression::parse("x1^2 + x2", 2), 2);
  ScalarField zero(3, [](std::span<const double>) { return 0.0; });

  Point x{0.1, 0.2};
  double got = reconstruct(phi0, zero, st, x, 0.3);
  // p(x, t) = (x1 + t, x2)
  CHECK(got == doctest::Approx(0.4 * 0.4 + 0.2).epsilon(1e-10));

  ScalarField f(3, [](std::span<const double> p) { return p[0] + p[2]; });
  CHECK(reconstruct(phi0, f, st, x, 0.0) ==
        doctest::Approx(phi0(x.view())).epsilon(1e-12));
}

TEST_CASE("reconstruct round-trips a closed-form function") {
  // phi(x, t) = x1 * exp(-(x1^2 + x2^2 + t^2)); X = d/dx1, L = d/dt - X.
  auto phi_expr = Expression::parse("x1*exp(-(x1^2 + x2^2 + t^2))", 3);
  auto phi = ScalarField::from_expression(phi_expr, 3);
  auto phi0 = ScalarField::from_expression(phi_expr.substitute(2, 0.0), 2);
  auto Lphi_expr = phi_expr.derivative(2) - phi_expr.derivative(0);
  auto Lphi = ScalarField::from_expression(Lphi_expr, 3);

  auto X = parse_vf({"1", "0", "0"});
  auto st = straighten(X, Box::cube(2, -3, 3), tight());

  TensorGrid grid(Box::cube(2, -0.4, 0.4), 6);
  double max_err = 0;
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    Point x = grid.point(i);
    for (double t : {0.25, -0.2}) {
      Point q{x[0], x[1], t};
      double got = reconstruct(phi0, Lphi, st, x, t);
      max_err = std::max(max_err, std::abs(got - phi(q.view())));
    }
  }
  CHECK(max_err <= 1e-6);
}

TEST_CASE("reconstruct is linear in (phi0, f)") {
  auto X = parse_vf({"t", "x1", "0"});
  auto st = straighten(X, Box::cube(2, -3, 3), tight());
  auto p0a = ScalarField::from_expression(Expression::parse("x1*x2", 2), 2);
  auto p0b = ScalarField::from_expression(Expression::parse("cos(x1)", 2), 2);
  auto fa = ScalarField::from_expression(Expression::parse("x2 + t", 3), 3);
  auto fb = ScalarField::from_expression(Expression::parse("x1*t", 3), 3);

  double a = 1.7, b = -0.6;
  Point x{0.2, 0.1};
  double t = 0.3;
  double combined = reconstruct(a * p0a + b * p0b, a * fa + b * fb, st, x, t);
  double split = a * reconstruct(p0a, fa, st, x, t) + b * reconstruct(p0b, fb, st, x, t);
  CHECK(combined == doctest::Approx(split).epsilon(1e-9));
}

TEST_CASE("defect_residual: exact cancellation for t-independent lifts") {
  auto Y = parse_vf({"1", "0"});
  auto X = parse_vf({"1", "0", "0"});
  std::vector<double> t_grid = {0.2, 0.1, 0.05, 0.025};
  auto fit = defect_residual(Y, X, Point{0.1, 0.0}, t_grid, Box::cube(2, -2, 2), tight());
  CHECK(fit.degenerate);
}

TEST_CASE("defect_residual: slope about 2 for the t-perturbed lift") {
  // X = Y + t W with Y = d/dx1, W = d/dx2: residual is exactly t^2/2.
  auto Y = parse_vf({"1", "0"});
  auto X = parse_vf({"1", "t", "0"});
  std::vector<double> t_grid;
  for (int k = 3; k <= 10; ++k) t_grid.push_back(std::pow(2.0, -k));
  auto fit = defect_residual(Y, X, Point{0.05, -0.1}, t_grid, Box::cube(2, -2, 2), tight());
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.slope >= 1.8);
  CHECK(fit.slope <= 2.3);

  std::vector<double> single = {0.1, 0.05};
  CHECK_THROWS(defect_residual(Y, X, Point{0.05, -0.1}, single, Box::cube(2, -2, 2), tight()));
}
