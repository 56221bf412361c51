#include "helpers.hpp"

using namespace testing;

TEST_SUITE("dichotomy") {
  TEST_CASE("projected transition") {
    auto stable = scalar_context(-1.0, 0.0, 1.0, 1.0, 1.0);
    CHECK(stable->zp(1.0, 0.0)(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));

    auto unstable = scalar_context(1.0, 0.0, 0.0, 1.0, 1.0);
    CHECK(unstable->zp(0.0, 1.0)(0, 0) == doctest::Approx(-std::exp(-1.0)).epsilon(1e-8));

    // P = I and t >= s gives Z(t, s)
    auto mixed = scalar_context(-1.0, 0.1, 1.0, 1.0, 0.5);
    for (double t : {0.3, 2.7, 5.1})
      CHECK(mixed->zp(t, -1.4)(0, 0) == doctest::Approx(mixed->table().Z(t, -1.4)(0, 0)).epsilon(1e-12));
  }

  TEST_CASE("verify_ed1") {
    auto exact = scalar_context(-1.0, 0.0, 1.0, 1.0, 1.0, "floor", -12, 12);
    Ed1Report ok = verify_ed1(*exact, -10, 10, 8, false);
    CHECK(ok.pass);
    CHECK(ok.worst_ratio == doctest::Approx(1.0).epsilon(1e-6));

    auto strong = scalar_context(-1.0, 0.0, 1.0, 1.0, 1.5, "floor", -12, 12);
    CHECK_FALSE(verify_ed1(*strong, -10, 10, 8, false).pass);
    CHECK_FALSE(verify_ed1(*strong, -10, 10, 8, true).pass);

    auto flat = scalar_context(0.0, 0.0, 1.0, 1.0, 0.5, "floor", -12, 12);
    CHECK_FALSE(verify_ed1(*flat, -10, 10, 8, true).pass);
  }

  TEST_CASE("discrete reduction") {
    auto ode = scalar_system(-1.0, 0.0);
    for (const Mat& m : discrete_reduction(*ode, -3, 3)) CHECK(m(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));

    auto mixed = scalar_system(-1.0, 0.1);
    for (const Mat& m : discrete_reduction(*mixed, -3, 3)) CHECK(std::fabs(m(0, 0) - 0.431091) <= 1e-6);

    LinearSystem periodic(Grid::builtin_family("floor"),
                          MatrixFunction::from_exprs(1, {Expr::parse("-0.5 + 0.3*cos(2*pi*t)")}),
                          MatrixFunction::zero(1), CertifiedBound::analytic(0.8), CertifiedBound::analytic(0.0));
    auto mats = discrete_reduction(periodic, -4, 4);
    for (const Mat& m : mats) CHECK(m(0, 0) == doctest::Approx(mats.front()(0, 0)).epsilon(1e-10));
  }

  TEST_CASE("find_discrete_dichotomy") {
    std::vector<Mat> scalar(5, Mat::Constant(1, 1, 0.431091));
    DiscreteDichotomy d = find_discrete_dichotomy(scalar);
    CHECK(d.P_hat(0, 0) == 1.0);
    CHECK(d.r <= 0.44);
    CHECK(d.r == doctest::Approx(1.01 * 0.431091));
    CHECK(d.K_hat == doctest::Approx(1.0));

    Mat sad = Eigen::Vector2d(0.5, 2.0).asDiagonal();
    DiscreteDichotomy s = find_discrete_dichotomy(std::vector<Mat>(5, sad));
    CHECK(s.P_hat(0, 0) == 1.0);
    CHECK(s.P_hat(1, 1) == 0.0);
    CHECK(std::fabs(s.P_hat(0, 1)) + std::fabs(s.P_hat(1, 0)) == 0.0);
    CHECK(s.r == doctest::Approx(0.505));
    CHECK(s.K_hat == doctest::Approx(1.0));

    CHECK_THROWS_AS(find_discrete_dichotomy(std::vector<Mat>(3, Mat::Identity(1, 1))), Error);
  }

  TEST_CASE("Green kernel branches") {
    // floor_half: t_j = j, zeta_j = j + 1/2
    auto ctx = scalar_context(-1.0, 0.2, 1.0, 1.0, 0.5, "floor_half");
    const LinearSystem& sys = ctx->system();
    // t delayed past zeta_j, s in [t, t_{j+1})
    CHECK(ctx->green_as_displayed(2.7, 2.9)(0, 0) == 0.0);
    // t in [t_j, zeta_j], s in [t, zeta_j)
    double t = 2.1, s = 2.3;
    CHECK(ctx->green_as_displayed(t, s)(0, 0) ==
          doctest::Approx(-fundamental_matrix(sys, t, s)(0, 0)).epsilon(1e-10));
  }

  TEST_CASE("property: Green kernel jumps by the identity at s = t") {
    // The kernel jumps by the identity across s = t; that jump is what puts
    // g(t) into the derivative of the convolution.
    Gen gen(41);
    auto ctx = scalar_context(-1.0, 0.1, 1.0, 1.0, 0.5, "floor_half");
    for (int q = 0; q < 50; ++q) {
      long k = gen.integer(-5, 5);
      double t = k + gen.real(0.05, 0.95);
      if (std::fabs(t - (k + 0.5)) < 0.02) continue;
      double e = 1e-9;
      double jump = ctx->green(t, t - e)(0, 0) - ctx->green(t, t + e)(0, 0);
      REQUIRE(jump == doctest::Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("verify_edp") {
    std::vector<Mat> mats(8, Mat::Constant(1, 1, 0.5));
    EdpCheck ok = verify_edp(mats, Mat::Identity(1, 1), 0.6);
    CHECK(ok.pass);
    CHECK(ok.K_hat == doctest::Approx(1.0));
    EdpCheck bad = verify_edp(mats, Mat::Zero(1, 1), 0.6);
    CHECK_FALSE(bad.pass);
  }
}
