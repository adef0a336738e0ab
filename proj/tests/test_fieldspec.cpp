#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "flowtrace/basis.hpp"
#include "flowtrace/vector_field.hpp"
#include "testutil.hpp"

using namespace flowtrace;

namespace {

VectorField parse_vf(std::vector<std::string> texts) {
  return VectorField::parse(std::span<const std::string>(texts));
}

// The paper's pair on R^3: d/dx1 and d/dx2 + x1 d/dx3.
VectorField heis_Z1() { return parse_vf({"1", "0", "0"}); }
VectorField heis_Z2() { return parse_vf({"0", "1", "x1"}); }

}  // namespace

TEST_CASE("parse_field basics") {
  auto dx1 = parse_vf({"1", "0", "0", "0"});
  auto v = dx1(Point{0.3, 0.1, -0.2, 0.9}.view());
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.0);
  CHECK(v[3] == 0.0);

  auto field = parse_vf({"0", "1", "x1", "0"});
  auto w = field(Point{2, 0, 0, 0}.view());
  CHECK(w[0] == 0.0);
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 2.0);

  CHECK_THROWS_AS(parse_vf({"x1 +", "0"}), ParseError);
}

TEST_CASE("evaluate dimension checks and the singular field") {
  auto Z = heis_Z2();
  auto v = Z(Point{2, 0, 0}.view());
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 1.0);
  CHECK(v[2] == 2.0);

  Point bad{1, 2};
  CHECK_THROWS(Z(bad.view()));

  // t^m d/dx1 vanishes on the t=0 slice.
  auto X = parse_vf({"t^3", "0", "0"});  // R^2 x R_t
  auto at0 = X(Point{0.5, 0.5, 0.0}.view());
  CHECK(at0[0] == 0.0);
  CHECK(at0[1] == 0.0);
  CHECK(at0[2] == 0.0);
}

TEST_CASE("lie_bracket reproduces the paper's example symbolically") {
  auto b = lie_bracket(heis_Z1(), heis_Z2());
  CHECK(b.coeff(0).is_zero());
  CHECK(b.coeff(1).is_zero());
  CHECK(b.coeff(2).is_constant());
  CHECK(b.coeff(2).constant_value() == 1.0);
}

TEST_CASE("lie_bracket of a field with itself is the zero field") {
  auto Z = parse_vf({"x1*x2", "exp(x1)", "cos(x2)"});
  CHECK(lie_bracket(Z, Z).is_zero());
}

TEST_CASE("lie_bracket hand-computed oracle") {
  // [x1 d/dx2, x2 d/dx1] = x1 d/dx1 - x2 d/dx2 (hand symbolic differentiation).
  auto X = parse_vf({"0", "x1"});
  auto Y = parse_vf({"x2", "0"});
  auto b = lie_bracket(X, Y);
  auto gen = testutil::rng(5);
  for (int i = 0; i < 50; ++i) {
    auto p = testutil::random_point(gen, 2);
    auto v = b(p.view());
    CHECK(v[0] == doctest::Approx(p[0]).epsilon(1e-14));
    CHECK(v[1] == doctest::Approx(-p[1]).epsilon(1e-14));
  }
}

TEST_CASE("bracket antisymmetry and Jacobi identity at random points") {
  std::vector<VectorField> corpus = {
      parse_vf({"1", "0", "0"}),
      parse_vf({"0", "1", "x1"}),
      parse_vf({"x2", "x3", "x1^2"}),
      parse_vf({"sin(x1)", "0", "exp(x2)"}),
  };
  auto gen = testutil::rng(11);
  for (size_t a = 0; a < corpus.size(); ++a)
    for (size_t b = a + 1; b < corpus.size(); ++b) {
      auto anti = lie_bracket(corpus[a], corpus[b]) + lie_bracket(corpus[b], corpus[a]);
      for (int i = 0; i < 100; ++i) {
        auto p = testutil::random_point(gen, 3);
        auto v = anti(p.view());
        for (int j = 0; j < 3; ++j) CHECK(std::abs(v[j]) <= 1e-12);
      }
    }

  auto& X = corpus[1];
  auto& Y = corpus[2];
  auto& Z = corpus[3];
  auto jacobi = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) +
                lie_bracket(Z, lie_bracket(X, Y));
  for (int i = 0; i < 100; ++i) {
    auto p = testutil::random_point(gen, 3);
    auto v = jacobi(p.view());
    for (int j = 0; j < 3; ++j) CHECK(std::abs(v[j]) <= 1e-10);
  }
}

TEST_CASE("check_step2 on the paper's fields") {
  std::vector<VectorField> fields = {heis_Z1(), heis_Z2()};
  auto r = check_step2(fields, Point{0, 0, 0});
  CHECK(r.satisfied);
  CHECK(r.rank == 3);
  CHECK(r.spanning_set.size() == 3);
  CHECK(r.spanning_set.first_layer == 2);
  REQUIRE(r.spanning_set.provenance.size() == 1);
  CHECK(r.spanning_set.provenance[0] == std::pair<int, int>(0, 1));
}

TEST_CASE("check_step2 degenerate and Grushin cases") {
  std::vector<VectorField> lone = {VectorField::axis(2, 0)};
  auto r = check_step2(lone, Point{0.2, -0.1});
  CHECK_FALSE(r.satisfied);
  CHECK(r.rank == 1);

  // Grushin pair: d/dx1 and x1 d/dx2; bracket is d/dx2.
  std::vector<VectorField> grushin = {VectorField::axis(2, 0), parse_vf({"0", "x1"})};
  auto g = check_step2(grushin, Point{0, 0});
  CHECK(g.satisfied);
  CHECK(g.rank == 2);
}

TEST_CASE("check_step2 rank is invariant under constant recombination") {
  std::vector<VectorField> fields = {heis_Z1(), heis_Z2()};
  // Invertible constant mix: W1 = 2 Z1 + Z2, W2 = Z1 + Z2.
  std::vector<VectorField> mixed = {2.0 * fields[0] + fields[1], fields[0] + fields[1]};
  auto gen = testutil::rng(23);
  for (int i = 0; i < 10; ++i) {
    auto p = testutil::random_point(gen, 3, 0.8);
    CHECK(check_step2(fields, p).rank == check_step2(mixed, p).rank);
  }
}

TEST_CASE("complete_basis on the paper's pair and the already-spanning case") {
  std::vector<VectorField> fields = {heis_Z1(), heis_Z2()};
  auto basis = complete_basis(fields, Point{0, 0, 0});
  REQUIRE(basis.size() == 3);
  CHECK(basis.first_layer == 2);
  CHECK(basis.provenance[0] == std::pair<int, int>(0, 1));
  // The bracket entry is d/dx3.
  CHECK(basis[2].coeff(2).is_constant());
  CHECK(basis[2].coeff(2).constant_value() == 1.0);

  // Bracket provenance holds coefficient-wise on a grid.
  auto recomputed = lie_bracket(basis[0], basis[1]);
  CHECK(sup_difference_on(recomputed, basis[2], Box::cube(3, -1, 1)) <= 1e-10);

  // Shifted base point gives the same completion.
  auto shifted = complete_basis(fields, Point{1, 1, 1});
  CHECK(shifted.size() == 3);
  CHECK(shifted.provenance[0] == std::pair<int, int>(0, 1));

  std::vector<VectorField> spanning = {VectorField::axis(2, 0), VectorField::axis(2, 1)};
  auto plain = complete_basis(spanning, Point{0, 0});
  CHECK(plain.size() == 2);
  CHECK(plain.provenance.empty());

  std::vector<VectorField> bad = {VectorField::axis(3, 0)};
  CHECK_THROWS(complete_basis(bad, Point{0, 0, 0}));
}

TEST_CASE("restrict_to_slice substitutes t=0 and drops the slot") {
  // d/dx1 + t d/dx2 on R^3 -> d/dx1 on R^2.
  auto X = parse_vf({"1", "t", "0"});
  auto Y = restrict_to_slice(X);
  CHECK(Y.dim() == 2);
  CHECK(Y.coeff(0).is_constant());
  CHECK(Y.coeff(0).constant_value() == 1.0);
  CHECK(Y.coeff(1).is_zero());

  // t^m d/dx1 restricts to the zero field.
  auto S = restrict_to_slice(parse_vf({"t^2", "0", "0"}));
  CHECK(S.is_zero());

  // Nonvanishing d/dt component is rejected.
  CHECK_THROWS(restrict_to_slice(parse_vf({"0", "0", "1"})));
  CHECK_THROWS(restrict_to_slice(parse_vf({"0", "0", "x1"})));
  // ... but a t-coefficient vanishing at t=0 passes.
  auto T = restrict_to_slice(parse_vf({"x2", "0", "t"}));
  CHECK(T.dim() == 2);
}

TEST_CASE("lift_to_ambient round-trips with restrict_to_slice") {
  auto Y = heis_Z2();
  auto X = lift_to_ambient(Y);
  CHECK(X.dim() == 4);
  CHECK(X.coeff(3).is_zero());
  auto back = restrict_to_slice(X);
  CHECK(sup_difference_on(back, Y, Box::cube(3, -1, 1)) == 0.0);
}
