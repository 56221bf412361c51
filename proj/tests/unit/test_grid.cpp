#include "helpers.hpp"

using namespace testing;

TEST_SUITE("grid") {
  TEST_CASE("builtin families") {
    Grid fl = Grid::builtin_family("floor");
    CHECK(fl.t(3) == 3.0);
    CHECK(fl.zeta(-2) == -2.0);
    CHECK(fl.theta() == 1.0);

    Grid er = Grid::builtin_family("even_round");
    CHECK(er.t(1) == 2.0);
    CHECK(er.zeta(1) == 3.0);
    CHECK(er.theta() == 2.0);

    const double mj[] = {3.0, 1.0};
    Grid g = Grid::builtin_family("m_j", mj);
    CHECK(g.t(0) == -1.0);
    CHECK(g.t(2) == 5.0);
    CHECK(g.zeta(2) == 6.0);
    CHECK(g.theta() == 3.0);
  }

  TEST_CASE("gamma") {
    CHECK(Grid::builtin_family("floor").gamma(2.7) == 2.0);
    CHECK(Grid::builtin_family("even_round").gamma(0.5) == 1.0);
    const double mj[] = {3.0, 1.0};
    CHECK(Grid::builtin_family("m_j", mj).gamma(-0.5) == 0.0);
  }

  TEST_CASE("interval_index") {
    Grid fl = Grid::builtin_family("floor");
    CHECK(fl.interval_index(2.0) == 2);
    CHECK(fl.interval_index(2.999) == 2);
    CHECK(Grid::builtin_family("even_round").interval_index(3.9) == 1);
  }

  TEST_CASE("count_breakpoints") {
    Grid fl = Grid::builtin_family("floor");
    CHECK(fl.count_breakpoints(0.5, 3.5) == 3);
    CHECK(fl.count_breakpoints(1.0, 1.5) == 0);
    CHECK(Grid::builtin_family("even_round").count_breakpoints(-1.0, 5.0) == 3);
  }

  TEST_CASE("bad parameters") {
    CHECK_THROWS_AS(Grid::builtin_family("no-such-family"), DomainError);
    const double bad[] = {1.0, 3.0};
    CHECK_THROWS_AS(Grid::builtin_family("m_j", bad), DomainError);
    const double neg[] = {-1.0, 0.5};
    CHECK_THROWS_AS(Grid::builtin_family("alpha_h", neg), DomainError);
  }

  TEST_CASE("explicit windows reject queries outside") {
    Grid w = Grid::explicit_window({0.0, 1.0, 2.5, 3.0}, {0.5, 1.0, 3.0}, 4);
    CHECK(w.is_window());
    CHECK(w.first_index() == 4);
    CHECK(w.last_index() == 6);
    CHECK(w.theta() == doctest::Approx(1.5));
    CHECK(w.interval_index(2.6) == 6);
    CHECK(w.gamma(1.7) == 1.0);
    CHECK_THROWS_AS(w.interval_index(3.5), DomainError);
    CHECK_THROWS_AS(w.t(9), DomainError);
    CHECK_THROWS_AS(Grid::explicit_window({0.0, 1.0}, {1.5}, 0), DomainError);
    CHECK_THROWS_AS(Grid::explicit_window({0.0, 1.0, 0.5}, {0.5, 0.7}, 0), DomainError);
  }

  TEST_CASE("property: every time sits in its interval") {
    Gen gen(11);
    const char* names[] = {"floor", "floor_half", "even_round"};
    for (const char* name : names) {
      Grid g = Grid::builtin_family(name);
      for (int q = 0; q < 500; ++q) {
        double s = gen.real(-50.0, 50.0);
        long k = g.interval_index(s);
        REQUIRE(g.t(k) <= s);
        REQUIRE(s < g.t(k + 1));
        REQUIRE(g.t(k) <= g.zeta(k));
        REQUIRE(g.zeta(k) <= g.t(k + 1));
        REQUIRE(g.gamma(s) == g.zeta(k));
        REQUIRE(g.t(k + 1) - g.t(k) <= g.theta() + 1e-12);
      }
    }
  }

  TEST_CASE("property: breakpoint count matches a scan") {
    Gen gen(12);
    Grid g = Grid::builtin_family("even_round");
    for (int q = 0; q < 200; ++q) {
      double a = gen.real(-20.0, 20.0), b = a + gen.real(0.0, 15.0);
      long scan = 0;
      for (long k = -20; k <= 30; ++k)
        if (a < g.t(k) && g.t(k) < b) ++scan;
      REQUIRE(g.count_breakpoints(a, b) == scan);
      REQUIRE(static_cast<long>(g.breakpoints_between(a, b).size()) == scan);
    }
  }
}
