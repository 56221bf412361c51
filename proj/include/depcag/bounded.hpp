#pragma once

#include "depcag/sweep.hpp"

#include <vector>

namespace depcag {

/// A forcing g(t) with one expression per component (only `t` may occur).
struct ForcingTerm {
  std::vector<Expr> g;
  CertifiedBound g_sup;

  /// g_sup sampled over [t_lo, t_hi].
  static ForcingTerm sampled(std::vector<Expr> g, double t_lo, double t_hi, int samples = 4000,
                             double inflation = 1.05);
  static ForcingTerm with_bound(std::vector<Expr> g, CertifiedBound g_sup);
  static ForcingTerm zero(int n);

  int dim() const { return static_cast<int>(g.size()); }
  bool is_zero() const;
  Vec at(double t) const;
};

struct TruncationPolicy {
  double horizon_T = 1.0;
  double tail_bound = 0.0;

  /// T = max(20/alpha, 10 theta) unless `horizon` > 0, paired with the
  /// analytic tail 2 K rho* g_sup e^{-alpha T} / alpha.
  static TruncationPolicy standard(const GreenContext& ctx, double g_sup, double horizon = 0.0);
};

double default_horizon(const GreenContext& ctx);

struct BoundedValue {
  double t = 0.0;
  Vec value;
  double error_bar = 0.0;
  double horizon = 0.0;
  double tail = 0.0;
  double quadrature = 0.0;
};

/// x*(t) = integral of G(t, s) g(s) over [t - T, t + T].
BoundedValue bounded_solution(const GreenContext& ctx, const ForcingTerm& g, double t,
                              const TruncationPolicy& policy, Exec exec = Exec::Parallel);
/// Same for many times with one shared sweep plan over [min - T, max + T].
std::vector<BoundedValue> bounded_solution_many(const GreenContext& ctx, const ForcingTerm& g,
                                                const std::vector<double>& ts,
                                                const TruncationPolicy& policy,
                                                Exec exec = Exec::Parallel);

struct LipschitzBoundReport {
  double bound = 0.0;  // 2 K rho* g_sup / alpha
  double max_norm = 0.0;
  double worst_t = 0.0;
  std::vector<BoundedValue> values;
  std::vector<std::size_t> violations;  // indices into values
  bool pass = false;
};

LipschitzBoundReport lipschitz_bound_check(const GreenContext& ctx, const ForcingTerm& g,
                                           const std::vector<double>& sample_ts,
                                           const TruncationPolicy& policy,
                                           Exec exec = Exec::Parallel);

/// Solution of the forced linear equation through (tau, xi), evaluated at
/// t >= tau. Requires tau in [t_i, zeta_i); other starting points throw
/// DomainError (integrate the equation directly instead).
Vec variation_of_parameters(const LinearSystem& sys, const ForcingTerm& g, double tau,
                            const Vec& xi, double t);

struct SeriesTail {
  std::vector<double> term_norms;  // in summation order away from k
  double partial_sum = 0.0;
  double last_term = 0.0;
  double ratio = 0.0;  // exp of the least-squares slope of log|term|
  bool pass = false;
};

/// The four matrix series whose absolute convergence the bounded-solution
/// theorem assumes: P-parts summed over r <= k, (I-P)-parts over r >= k,
/// each with the left and the right interval piece.
struct SeriesTailReport {
  long k = 0;
  int terms = 0;
  SeriesTail stable_left, stable_right, unstable_left, unstable_right;
  bool pass = false;
};

SeriesTailReport series_tail_report(const GreenContext& ctx, long k, int terms);

}  // namespace depcag
