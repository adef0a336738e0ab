#include "flowtrace/flow.hpp"

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

VectorField heis_Z1() { return parse_vf({"1", "0", "0"}); }
VectorField heis_Z2() { return parse_vf({"0", "1", "x1"}); }

// Closed form of e^{tau (d/dx2 + x1 d/dx3)}.
Point heis_Z2_exact(const Point& x, double tau) {
  return Point{x[0], x[1] + tau, x[2] + x[0] * tau};
}

FlowSolverConfig tight() {
  FlowSolverConfig cfg;
  cfg.rel_tol = cfg.abs_tol = 1e-10;
  cfg.max_step = 0.1;
  return cfg;
}

}  // namespace

TEST_CASE("flow of a constant field is translation") {
  auto cfg = tight();
  Point x{0.2, -0.1, 0.4};
  Point y = flow(heis_Z1(), x, 0.37, cfg);
  CHECK(y[0] == doctest::Approx(0.57).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(y[2] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("flow matches the Heisenberg closed form on random points") {
  auto cfg = tight();
  auto Z2 = heis_Z2();
  auto gen = testutil::rng(29);
  for (int i = 0; i < 200; ++i) {
    Point x = testutil::random_point(gen, 3, 0.5);
    double tau = (i % 2 ? -1 : 1) * 0.4 * (i + 1) / 200.0;
    Point got = flow(Z2, x, tau, cfg);
    Point want = heis_Z2_exact(x, tau);
    CHECK(got.dist(want) <= 1e-9);
  }
}

TEST_CASE("flow matches the reference RK4 oracle on a non-affine field") {
  auto cfg = tight();
  auto Z = parse_vf({"sin(x2)", "x1^2", "cos(x1)*x3"});
  auto gen = testutil::rng(31);
  for (int i = 0; i < 20; ++i) {
    Point x = testutil::random_point(gen, 3, 0.4);
    double tau = 0.3 * (i + 1) / 20.0;
    Point got = flow(Z, x, tau, cfg);
    Point want = testutil::rk4_flow(Z, x, tau);
    CHECK(got.dist(want) <= 1e-8);
  }
}

TEST_CASE("group law and inversion") {
  auto cfg = tight();
  std::vector<VectorField> corpus = {heis_Z1(), heis_Z2(), parse_vf({"x2", "x3", "x1^2"}),
                                     parse_vf({"sin(x1)", "cos(x3)", "x2"})};
  auto gen = testutil::rng(37);
  for (int i = 0; i < 50; ++i) {
    const auto& Z = corpus[static_cast<size_t>(i) % corpus.size()];
    Point x = testutil::random_point(gen, 3, 0.3);
    std::uniform_real_distribution<double> u(-0.25, 0.25);
    double s = u(gen), t = u(gen);
    Point lhs = flow(Z, x, s + t, cfg);
    Point rhs = flow(Z, flow(Z, x, s, cfg), t, cfg);
    CHECK(lhs.dist(rhs) <= 1e-9);

    double tau = u(gen);
    Point back = flow(Z, flow(Z, x, tau, cfg), -tau, cfg);
    CHECK(back.dist(x) <= 1e-9);
  }
}

TEST_CASE("flow escape and bounds monitoring") {
  auto cfg = tight().with_bounds(Box::cube(3, -1, 1));
  Point x{0.9, 0, 0};
  CHECK_THROWS_AS(flow(heis_Z1(), x, 0.5, cfg), FlowEscape);
  CHECK_NOTHROW(flow(heis_Z1(), x, 0.05, cfg));
  Point outside{2, 0, 0};
  CHECK_THROWS_AS(flow(heis_Z1(), outside, 0.01, cfg), FlowEscape);
}

TEST_CASE("flow_compose identity, ordering and single-slot consistency") {
  auto cfg = tight();
  Basis basis;
  basis.fields = {heis_Z1(), heis_Z2(), VectorField::axis(3, 2)};
  basis.first_layer = 2;
  basis.provenance = {{0, 1}};

  Point x{0.1, -0.2, 0.3};
  std::vector<double> zero(3, 0.0);
  CHECK(flow_compose(basis, zero, x, cfg).dist(x) == 0.0);

  // Heisenberg triple from the origin: (a, b, c).
  std::vector<double> taus = {0.15, -0.2, 0.1};
  Point got = flow_compose(basis, taus, Point{0, 0, 0}, cfg);
  CHECK(got[0] == doctest::Approx(0.15).epsilon(1e-10));
  CHECK(got[1] == doctest::Approx(-0.2).epsilon(1e-10));
  CHECK(got[2] == doctest::Approx(0.1).epsilon(1e-10));

  std::vector<double> single = {0, -0.2, 0};
  Point a = flow_compose(basis, single, x, cfg);
  Point b = flow(basis[1], x, -0.2, cfg);
  CHECK(a.dist(b) <= 1e-12);

  // Right-to-left ordering: e^{tau1 Z1} applied last. With x1 shifted first
  // the Z2 flow would tilt x3; composing in the stated order must not.
  std::vector<double> two = {0.3, 0.2, 0.0};
  Point c = flow_compose(basis, two, Point{0, 0, 0}, cfg);
  CHECK(c[2] == doctest::Approx(0.0).epsilon(1e-10));  // Z2 acts at x1=0, then Z1 shifts
}

TEST_CASE("commutator_flow reproduces the bracket flow exactly on the Heisenberg pair") {
  auto cfg = tight();
  auto Z1 = heis_Z1(), Z2 = heis_Z2();
  for (double s : {0.25, 0.0625, 0.015625, -0.25, -0.0625}) {
    Point got = commutator_flow(Z1, Z2, s, Point{0, 0, 0}, cfg);
    CHECK(std::abs(got[0]) <= 1e-9);
    CHECK(std::abs(got[1]) <= 1e-9);
    CHECK(got[2] == doctest::Approx(s).epsilon(1e-8));
  }
  Point y{0.1, 0.2, -0.1};
  CHECK(commutator_flow(Z1, Z2, 0.0, y, cfg).dist(y) == 0.0);
}

TEST_CASE("commutator_flow with equal fields cancels") {
  auto cfg = tight();
  auto Z = parse_vf({"x2", "x3", "x1^2"});
  auto gen = testutil::rng(41);
  for (int i = 0; i < 20; ++i) {
    Point y = testutil::random_point(gen, 3, 0.3);
    Point got = commutator_flow(Z, Z, 0.09, y, cfg);
    CHECK(got.dist(y) <= 1e-9);
  }
}

TEST_CASE("residual_exponent: nilpotent pair is degenerate, commuting pair too") {
  auto cfg = tight();
  std::vector<double> s_grid;
  for (int k = 2; k <= 10; ++k) s_grid.push_back(std::pow(2.0, -k));

  auto fit = residual_exponent(heis_Z1(), heis_Z2(), Point{0, 0, 0}, s_grid, cfg);
  CHECK(fit.degenerate);
  CHECK(fit.excluded_s.size() == s_grid.size());

  auto commuting =
      residual_exponent(VectorField::axis(2, 0), VectorField::axis(2, 1), Point{0, 0}, s_grid, cfg);
  CHECK(commuting.degenerate);
}

TEST_CASE("residual_exponent: perturbed non-nilpotent pair has slope about 3/2") {
  auto cfg = tight();
  auto Z1 = heis_Z1();
  auto Z2 = parse_vf({"0", "1 + x1^2", "x1"});  // perturbed: extra x1^2 d/dx2
  std::vector<double> s_grid;
  for (int k = 4; k <= 12; ++k) s_grid.push_back(std::pow(2.0, -k));
  auto fit = residual_exponent(Z1, Z2, Point{0.05, 0, 0}, s_grid, cfg);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.slope >= 1.4);
  CHECK(fit.slope <= 2.1);
}

TEST_CASE("eta_frame_check on the Heisenberg frame at the origin") {
  auto cfg = tight();
  Basis basis;
  basis.fields = {heis_Z1(), heis_Z2(), VectorField::axis(3, 2)};
  basis.first_layer = 2;
  basis.provenance = {{0, 1}};
  std::vector<double> scales = {1e-3, 1e-4};
  auto report = eta_frame_check(basis, Point{0, 0, 0}, scales, cfg);
  CHECK(report.frame_ok);
  CHECK(report.jacobian_rank == 3);
  for (double err : report.column_errors) CHECK(err <= 1e-6);

  // Rank-deficient frame is flagged.
  Basis degenerate;
  degenerate.fields = {heis_Z1(), heis_Z1(), heis_Z1()};
  degenerate.first_layer = 3;
  auto bad = eta_frame_check(degenerate, Point{0, 0, 0}, scales, cfg);
  CHECK_FALSE(bad.frame_ok);
  CHECK(bad.jacobian_rank < 3);
}
