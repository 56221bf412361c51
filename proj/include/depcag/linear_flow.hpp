#pragma once

#include "depcag/common.hpp"
#include "depcag/expr.hpp"
#include "depcag/grid.hpp"

#include <vector>

namespace depcag {

/// An n x n matrix of t-dependent entries. Entries that contain no `t`
/// collapse to a cached constant matrix.
class MatrixFunction {
 public:
  MatrixFunction() = default;
  static MatrixFunction constant(const Mat& m);
  static MatrixFunction zero(int n) { return constant(Mat::Zero(n, n)); }
  /// Row-major entries.
  static MatrixFunction from_exprs(int n, std::vector<Expr> entries);

  int dim() const { return n_; }
  bool is_constant() const { return constant_; }
  bool is_zero() const { return constant_ && value_.isZero(0.0); }
  const Mat& constant_value() const { return value_; }
  void eval_into(double t, Mat& out) const;
  Mat at(double t) const;
  /// Source text of each entry (constants are printed).
  std::vector<std::string> entry_text() const;
  CertifiedBound sampled_bound(double t_lo, double t_hi, int samples, double inflation) const;

 private:
  int n_ = 0;
  bool constant_ = true;
  Mat value_;
  std::vector<Expr> entries_;
};

/// y'(t) = A(t) y(t) + A0(t) y(gamma(t)).
struct LinearSystem {
  LinearSystem(Grid g, MatrixFunction a, MatrixFunction a0, CertifiedBound m, CertifiedBound m0);

  Grid grid;
  MatrixFunction A, A0;
  CertifiedBound M, M0;

  int dim() const { return A.dim(); }
  /// RK4 step length: min(theta/200, 1e-2).
  double step() const;
};

/// Number of equal RK4 steps covering [a, b] with step at most h.
int steps_for(double a, double b, double h);

/// Phi(t, s) by integrating X' = A X from s, clipped at breakpoints.
Mat fundamental_matrix(const LinearSystem& sys, double t, double s);

/// J(t, tau); t and tau must lie in one closed interval [t_i, t_{i+1}].
Mat j_matrix(const LinearSystem& sys, double t, double tau);
/// E(t, tau), same domain as j_matrix.
Mat e_matrix(const LinearSystem& sys, double t, double tau);

struct ConditionCInterval {
  long k;
  double rho_plus_A, rho_minus_A, rho_plus_A0, rho_minus_A0;
};

struct ConditionCReport {
  long k_lo = 0, k_hi = 0;
  double nu_plus = 0.0, nu_minus = 0.0, rho_A = 1.0;
  bool satisfied = false;
  std::vector<ConditionCInterval> per_interval;
};

ConditionCReport check_condition_c(const LinearSystem& sys, long k_lo, long k_hi);

/// LU inverse of an E-factor; throws SingularError if rcond < 1e-12.
Mat checked_inverse(const Mat& m, long interval);

/// Z(t, tau) from the product formulas, without caching.
Mat transition_matrix(const LinearSystem& sys, double t, double tau);

/// Caches E(t_k, zeta_k), E(t_{k+1}, zeta_k), their inverses, the one-step
/// maps and the products anchored at time 0 for intervals k_lo..k_hi.
class TransitionTable {
 public:
  TransitionTable(const LinearSystem& sys, long k_lo, long k_hi, Exec exec = Exec::Parallel);

  const LinearSystem& system() const { return *sys_; }
  long k_lo() const { return k_lo_; }
  long k_hi() const { return k_hi_; }
  /// True if [a, b] lies in the covered intervals (b may equal t_{k_hi+1}).
  bool covers(double a, double b) const;

  /// E(t, zeta_k) for t in [t_k, t_{k+1}].
  Mat E_local(double t, long k) const;
  const Mat& E_left(long k) const { return at(e_left_, k); }
  const Mat& E_right(long k) const { return at(e_right_, k); }
  const Mat& E_left_inv(long k) const { return at(e_left_inv_, k); }
  const Mat& E_right_inv(long k) const { return at(e_right_inv_, k); }
  /// Z(t_{k+1}, t_k) and its inverse Z(t_k, t_{k+1}).
  const Mat& step(long k) const { return at(step_, k); }
  const Mat& inv_step(long k) const { return at(inv_step_, k); }

  /// Z(t_k, 0) and Z(0, t_k) for k_lo <= k <= k_hi + 1.
  const Mat& Z_tk_0(long k) const;
  const Mat& Z_0_tk(long k) const;
  Mat Z_t_0(double t) const;
  Mat Z_0_t(double t) const;

  Mat Z(double t, double tau) const;

 private:
  const Mat& at(const std::vector<Mat>& v, long k) const;
  long local_index(double t) const;

  const LinearSystem* sys_;
  long k_lo_, k_hi_;
  long k0_;  // interval holding time 0
  Mat e0_inv_;  // E(0, zeta_{k0})^{-1}
  std::vector<Mat> e_left_, e_right_, e_left_inv_, e_right_inv_, step_, inv_step_;
  std::vector<Mat> z_tk_0_, z_0_tk_;
};

}  // namespace depcag
