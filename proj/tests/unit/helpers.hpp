#pragma once

#include "depcag/certify.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

namespace testing {

using namespace depcag;

inline MatrixFunction scalar(double v) { return MatrixFunction::constant(Mat::Constant(1, 1, v)); }

/// x' = a x + b x(gamma(t)) on a builtin grid, with exact bounds.
inline std::shared_ptr<const LinearSystem> scalar_system(double a, double b, const char* grid = "floor") {
  return std::make_shared<LinearSystem>(Grid::builtin_family(grid), scalar(a), scalar(b),
                                        CertifiedBound::analytic(std::fabs(a)),
                                        CertifiedBound::analytic(std::fabs(b)));
}

inline std::shared_ptr<const GreenContext> scalar_context(double a, double b, double P, double K, double alpha,
                                                          const char* grid = "floor", long k_lo = -40,
                                                          long k_hi = 40) {
  DichotomySpec d;
  d.P = Mat::Constant(1, 1, P);
  d.K = K;
  d.alpha = alpha;
  return std::make_shared<GreenContext>(scalar_system(a, b, grid), d, k_lo, k_hi);
}

inline Nonlinearity parse_f(std::initializer_list<const char*> comps, double radius = 10.0) {
  std::vector<Expr> f;
  for (const char* c : comps) f.push_back(Expr::parse(c));
  return Nonlinearity::sampled(f, static_cast<int>(f.size()), -60.0, 60.0, radius);
}

/// Tiny deterministic generator for property tests.
struct Gen {
  Rng rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double real(double lo, double hi) { return uniform(rng, lo, hi); }
  int integer(int lo, int hi) { return lo + static_cast<int>(unit_from_bits(rng()) * (hi - lo + 1)); }
  Mat matrix(int n, double scale) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = real(-scale, scale);
    return m;
  }
};

}  // namespace testing
