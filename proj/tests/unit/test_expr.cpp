#include "helpers.hpp"

#include <numbers>

using namespace testing;

namespace {

using Op = Expr::Op;

const Expr::Node& node(const Expr& e, int i) { return e.nodes()[static_cast<std::size_t>(i)]; }

std::string random_expr(Gen& gen, int depth) {
  if (depth == 0 || gen.integer(0, 3) == 0) {
    switch (gen.integer(0, 3)) {
      case 0: return "t";
      case 1: return "x" + std::to_string(gen.integer(1, 2));
      case 2: return "y1";
      default: return std::to_string(gen.integer(1, 9)) + "." + std::to_string(gen.integer(0, 9));
    }
  }
  std::string a = random_expr(gen, depth - 1), b = random_expr(gen, depth - 1);
  switch (gen.integer(0, 7)) {
    case 0: return a + " + " + b;
    case 1: return a + " - " + b;
    case 2: return "(" + a + ") * " + b;
    case 3: return "sin(" + a + ")";
    case 4: return "tanh(" + a + ") / 2";
    case 5: return "max(" + a + ", " + b + ")";
    case 6: return "-(" + a + ")";
    default: return "cos(" + a + ")^2";
  }
}

}  // namespace

TEST_SUITE("exprlang") {
  TEST_CASE("parse trees") {
    Expr e = Expr::parse("sin(t) + 2");
    const auto& root = node(e, e.root());
    REQUIRE(root.op == Op::Add);
    CHECK(node(e, root.lhs).op == Op::Sin);
    CHECK(node(e, node(e, root.lhs).lhs).op == Op::Var);
    CHECK(node(e, node(e, root.lhs).lhs).var == Expr::VarKind::T);
    CHECK(node(e, root.rhs).op == Op::Num);
    CHECK(node(e, root.rhs).value == 2.0);

    Expr d = Expr::parse("tanh(x1 - y1)/2");
    const auto& dr = node(d, d.root());
    REQUIRE(dr.op == Op::Div);
    const auto& th = node(d, dr.lhs);
    REQUIRE(th.op == Op::Tanh);
    const auto& sub = node(d, th.lhs);
    REQUIRE(sub.op == Op::Sub);
    CHECK(node(d, sub.lhs).var == Expr::VarKind::X);
    CHECK(node(d, sub.lhs).index == 1);
    CHECK(node(d, sub.rhs).var == Expr::VarKind::Y);
    CHECK(node(d, dr.rhs).value == 2.0);
  }

  TEST_CASE("power is right-associative") {
    CHECK(Expr::parse("2 ^ 3 ^ 2").eval({}) == 512.0);
    CHECK_THROWS_AS(Expr::parse("-2^2"), ParseError);
    CHECK(Expr::parse("(-2)^2").eval({}) == 4.0);
  }

  TEST_CASE("evaluation") {
    CHECK(Expr::parse("sin(t)").eval({{"t", 0.0}}) == 0.0);
    CHECK(Expr::parse("exp(t)").eval({{"t", 1.0}}) == doctest::Approx(std::numbers::e).epsilon(1e-12));
    CHECK(Expr::parse("x1*y1 + t").eval({{"t", 1.0}, {"x1", 2.0}, {"y1", 3.0}}) == 7.0);
    CHECK(Expr::parse("pi").eval({}) == std::numbers::pi);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(Expr::parse("1/(t-t)").eval({{"t", 1.0}}), EvalError);
    try {
      Expr::parse("1 + 1/(t-1)").eval({{"t", 1.0}});
      FAIL("expected an evaluation error");
    } catch (const EvalError& e) {
      CHECK(e.subexpression().find('/') != std::string::npos);
    }
    CHECK_THROWS_AS(Expr::parse("sin(t"), ParseError);
    CHECK_THROWS_AS(Expr::parse("foo(t)"), ParseError);
    CHECK_THROWS_AS(Expr::parse("x0"), ParseError);
  }

  TEST_CASE("variables") {
    Expr e = Expr::parse("x2 + y1*t");
    CHECK(e.max_x_index() == 2);
    CHECK(e.max_y_index() == 1);
    CHECK(e.uses_t());
    CHECK(Expr::parse("3*2").is_constant());
    CHECK(Expr::parse("0").is_zero_literal());
  }

  TEST_CASE("property: print parses back to the same tree and value") {
    Gen gen(21);
    for (int q = 0; q < 300; ++q) {
      std::string src = random_expr(gen, 4);
      Expr e = Expr::parse(src);
      Expr back = Expr::parse(e.print());
      REQUIRE_MESSAGE(back == e, src);
      double x[2] = {gen.real(-2, 2), gen.real(-2, 2)}, y[1] = {gen.real(-2, 2)};
      double t = gen.real(-3, 3);
      double v = e.eval(t, x, y);
      REQUIRE(back.eval(t, x, y) == v);
      REQUIRE(e.eval({{"t", t}, {"x1", x[0]}, {"x2", x[1]}, {"y1", y[0]}}) == v);
    }
  }

  TEST_CASE("bound_abs") {
    CertifiedBound s = bound_abs(Expr::parse("sin(t)"), {{"t", {0.0, 10.0}}}, 1000, 1.1);
    CHECK(s.value >= 1.0);
    CHECK(s.value <= 1.1);
    CHECK(s.method == CertifiedBound::Method::GridSample);
    CHECK(bound_abs(Expr::parse("0"), {{"t", {0.0, 1.0}}}, 100, 1.5).value == 0.0);
    CertifiedBound th = bound_abs(Expr::parse("tanh(x1)"), {{"x1", {-50.0, 50.0}}}, 1000, 1.05);
    CHECK(th.value >= 0.9999);
    CHECK(th.value <= 1.05);
  }

  TEST_CASE("lipschitz_estimate") {
    Ranges wide{{"x1", {-20.0, 20.0}}, {"y1", {-20.0, 20.0}}, {"t", {0.0, 1.0}}};
    CertifiedBound lt = lipschitz_estimate(Expr::parse("tanh(x1)"), Block::X, wide, 4000, 1.05);
    CHECK(lt.value <= 1.05);
    CHECK(lt.value >= 0.95);
    CHECK(lipschitz_estimate(Expr::parse("0.1*y1"), Block::Y, wide, 1000, 1.05).value ==
          doctest::Approx(0.105).epsilon(1e-9));
    CHECK(lipschitz_estimate(Expr::parse("sin(t)"), Block::X, wide, 1000, 1.05).value == 0.0);
  }

  TEST_CASE("property: sampled bound is at least every sampled value") {
    Gen gen(22);
    for (int q = 0; q < 40; ++q) {
      std::string src = random_expr(gen, 3);
      Expr e = Expr::parse(src);
      Ranges r{{"t", {-1.0, 1.0}}, {"x1", {-1.0, 1.0}}, {"x2", {-1.0, 1.0}}, {"y1", {-1.0, 1.0}}};
      CertifiedBound b = bound_abs(e, r, 2000, 1.0);
      // the corners are always on the sampling grid
      for (double c : {-1.0, 1.0}) {
        double x[2] = {c, c}, y[1] = {c};
        REQUIRE(std::fabs(e.eval(c, x, y)) <= b.value);
      }
    }
  }
}
