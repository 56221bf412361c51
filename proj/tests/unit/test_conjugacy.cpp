#include "helpers.hpp"

using namespace testing;

namespace {

// x' = -x, P = 1, K = 1, alpha = 1: a plain exponential dichotomy.
std::shared_ptr<const GreenContext> decay_context() { return scalar_context(-1.0, 0.0, 1.0, 1.0, 1.0); }

// x' = -x + 0.1 x(gamma) on the floor grid, as in the scalar preset.
std::shared_ptr<const GreenContext> mixed_context() {
  return scalar_context(-1.0, 0.1, 1.0, 1.05, 0.5, "floor", -80, 80);
}

}  // namespace

TEST_SUITE("conjugacy") {
  TEST_CASE("no nonlinearity: both maps are the identity") {
    ConjugacyEngine none(decay_context(), Nonlinearity::none());
    Vec xi = Vec::Constant(1, 0.37);
    CHECK(none.H(0.4, xi).value(0) == 0.37);
    CHECK(none.L(0.4, xi).value(0) == 0.37);
    CHECK(none.chi(0.0, xi, 0.4).value(0) == 0.0);

    ConjugacyEngine zero(decay_context(), parse_f({"0"}));
    CHECK(zero.H(1.3, xi).value(0) == doctest::Approx(0.37).epsilon(1e-14));
    VarthetaValue l = zero.L(1.3, xi);
    CHECK(l.value(0) == doctest::Approx(0.37).epsilon(1e-14));
    CHECK(l.iterations == 1);
  }

  TEST_CASE("constant nonlinearity shifts by mu0") {
    const double mu0 = 0.05;
    ConjugacyEngine eng(decay_context(), parse_f({"0.05"}));
    for (double t : {0.0, 0.6, 2.2}) {
      Vec xi = Vec::Constant(1, 0.8);
      MapValue c = eng.chi(t, xi, t);
      CHECK(std::fabs(c.value(0) + mu0) <= c.error_bar + 1e-12);
      MapValue h = eng.H(t, xi);
      CHECK(std::fabs(h.value(0) - (0.8 - mu0)) <= h.error_bar + 1e-12);
      VarthetaValue l = eng.L(t, xi);
      CHECK(std::fabs(l.value(0) - (0.8 + mu0)) <= l.error_bar + 1e-12);
    }
    InverseReport inv = certify_inverse(eng, {Vec::Constant(1, -1.0), Vec::Constant(1, 0.2)}, 0.9);
    CHECK(inv.pass);
    CHECK(inv.max_residual <= 1e-8);
  }

  TEST_CASE("constant nonlinearity: H along a solution solves the linear equation") {
    ConjugacyEngine eng(decay_context(), parse_f({"0.05"}));
    Vec xi = Vec::Constant(1, 0.6);
    MappingReport rep = certify_solution_mapping(eng, 0.0, xi, {0.3, 1.1, 2.6, 3.4});
    CHECK(rep.pass);
    for (const auto& c : rep.cases)
      CHECK(std::fabs(c.h(0) - (0.6 - 0.05) * std::exp(-c.t)) <= c.error_bar + 1e-6);
  }

  TEST_CASE("proximity bound") {
    ConjugacyEngine eng(mixed_context(), parse_f({"0.01*tanh(x1)"}));
    double bound = eng.proximity_bound();
    const auto& c = eng.conditions();
    CHECK(bound == doctest::Approx(2.0 * c.in.mu * c.in.K * c.rho_star / c.in.alpha));
    Gen gen(71);
    for (int q = 0; q < 8; ++q) {
      double t = gen.real(0.0, 5.0);
      Vec xi = Vec::Constant(1, gen.real(-2, 2));
      MapValue h = eng.H(t, xi);
      VarthetaValue l = eng.L(t, xi);
      REQUIRE((h.value - xi).norm() <= bound + h.error_bar);
      REQUIRE((l.value - xi).norm() <= bound + l.error_bar);
    }
  }

  TEST_CASE("Picard increments decay geometrically") {
    ConjugacyEngine eng(mixed_context(), parse_f({"0.01*tanh(x1) + 0.005*sin(y1)"}));
    VarthetaValue l = eng.L(1.7, Vec::Constant(1, 0.4));
    REQUIRE(l.increments.size() >= 2);
    double factor = 0.5 * (1.0 + eng.gamma_star());
    for (std::size_t i = 1; i < l.increments.size(); ++i)
      if (l.increments[i - 1] > 1e-13) CHECK(l.increments[i] <= factor * l.increments[i - 1] + 1e-15);
  }

  TEST_CASE("property: L inverts H") {
    ConjugacyEngine eng(mixed_context(), parse_f({"0.01*tanh(x1) + 0.005*sin(y1)"}));
    Gen gen(72);
    std::vector<Vec> pts;
    for (int q = 0; q < 6; ++q) pts.push_back(Vec::Constant(1, gen.real(-2, 2)));
    InverseReport rep = certify_inverse(eng, pts, gen.real(0.0, 5.0));
    CHECK(rep.pass);
    for (const auto& c : rep.cases) {
      CHECK(c.residual_LH <= 10.0 * c.bar_LH);
      CHECK(c.residual_HL <= 10.0 * c.bar_HL);
    }
  }

  TEST_CASE("property: H maps nonlinear solutions to linear ones") {
    ConjugacyEngine eng(mixed_context(), parse_f({"0.01*tanh(x1)"}));
    Gen gen(73);
    std::vector<double> ts;
    for (int q = 0; q < 12; ++q) ts.push_back(gen.real(0.05, 5.0));
    std::sort(ts.begin(), ts.end());
    MappingReport rep = certify_solution_mapping(eng, 0.0, Vec::Constant(1, 0.9), ts);
    CHECK(rep.pass);
    CHECK(rep.max_residual <= 1e-3);
  }

  TEST_CASE("Holder constants") {
    ConjugacyEngine none(mixed_context(), parse_f({"0"}));
    REQUIRE(none.conditions().flags.alfa);
    HolderReport trivial = holder_certify(none, 0.5, {1e-2, 1e-3, 1e-4}, {Vec::Constant(1, 0.3)}, 9);
    CHECK(trivial.pass);
    CHECK(trivial.coeff_H >= 1.0);
    CHECK(trivial.exponent_H < 1.0);
    for (const auto& s : trivial.empirical) CHECK(s.d_output == doctest::Approx(s.delta).epsilon(1e-6));

    ConjugacyEngine eng(mixed_context(), parse_f({"0.01*tanh(x1)"}));
    HolderReport rep = holder_certify(eng, 2.5, {1e-2, 1e-3, 1e-4}, {Vec::Constant(1, -0.4)}, 10);
    CHECK(rep.pass);
    CHECK(rep.empirical.size() == 6);
  }

  TEST_CASE("uniform continuity spot check") {
    ConjugacyEngine eng(mixed_context(), parse_f({"0.01*tanh(x1)"}));
    ContinuityReport rep = uniform_continuity_report(eng, 1.0, 1e-3, 0.0, {Vec::Constant(1, 0.1)}, 3);
    CHECK(rep.pass);
    CHECK(rep.delta_H > 0.0);
    CHECK(rep.delta_L > 0.0);
  }

  TEST_CASE("contraction is required") {
    Nonlinearity strong = parse_f({"0.5*tanh(x1)"});
    CHECK_THROWS_AS(ConjugacyEngine(mixed_context(), strong), InapplicableError);
  }
}
