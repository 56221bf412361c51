#pragma once

#include "depcag/linear_flow.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace depcag {

struct DichotomySpec {
  enum class Source { UserSupplied, DiscreteSpectral };
  Mat P;
  double K = 1.0;
  double alpha = 1.0;
  Source source = Source::UserSupplied;
};

struct DiscreteDichotomy {
  Mat P_hat;
  double K_hat = 1.0;
  double r = 0.5;
};

/// Worst sampled ratio |Z_p(t,s)| e^{alpha |t-s|} over a window.
struct Ed1Report {
  long k_lo = 0, k_hi = 0;
  int samples_per_interval = 0;
  double K = 1.0;
  bool K_auto = false;
  double worst_ratio = 0.0;
  double worst_t = 0.0, worst_s = 0.0;
  /// Worst ratio over pairs with |t - s| <= half the window span; an auto K
  /// is only accepted if the full-window worst does not exceed it by 5%.
  double worst_ratio_near = 0.0;
  bool pass = false;
};

/// Z_p and both Green kernels for a fixed system, dichotomy and window.
class GreenContext {
 public:
  /// Builds transition data for intervals k_lo..k_hi (time 0 is always
  /// included). `rho_A` is taken from condition (C) over the same window.
  GreenContext(std::shared_ptr<const LinearSystem> sys, DichotomySpec dicho, long k_lo, long k_hi,
               Exec exec = Exec::Parallel);

  const LinearSystem& system() const { return *sys_; }
  const TransitionTable& table() const { return *table_; }
  const DichotomySpec& dichotomy() const { return dicho_; }
  const ConditionCReport& condition_c() const { return cond_c_; }
  double rho_A() const { return cond_c_.rho_A; }
  double rho_star() const { return rho_star_; }
  /// Replaces K (used after an automatic K certification).
  void set_K(double K) { dicho_.K = K; }

  Mat zp(double t, double s) const;
  /// Z(t,0) P Z(0,s) or -Z(t,0)(I-P)Z(0,s) from precomputed factors.
  Mat zp_from(const Mat& z_t0, const Mat& z_0s, bool t_ge_s) const;

  /// Green kernel whose convolution with g is the bounded solution. On each
  /// interval it adds the P-part of the left piece and the (I-P)-part of the
  /// right piece that the kernel of `green_as_displayed` leaves out.
  Mat green(double t, double s) const;
  /// The piecewise kernel exactly as commonly displayed for this problem.
  Mat green_as_displayed(double t, double s) const;

 private:
  std::shared_ptr<const LinearSystem> sys_;
  std::shared_ptr<const TransitionTable> table_;
  DichotomySpec dicho_;
  ConditionCReport cond_c_;
  double rho_star_ = 1.0;
  Mat Q_;  // I - P
};

void check_projection(const Mat& P, const char* what);

/// Samples t, s at fractions q/m of every interval in k_lo..k_hi. With
/// K_auto the reported K is max(1, 1.05 * worst).
Ed1Report verify_ed1(const GreenContext& ctx, long k_lo, long k_hi, int samples_per_interval,
                     bool K_auto, Exec exec = Exec::Parallel);

/// [Z(t_{n+1}, t_n)] for n = n_lo..n_hi.
std::vector<Mat> discrete_reduction(const LinearSystem& sys, long n_lo, long n_hi);

/// Spectral splitting for constant reductions; throws if an eigenvalue is
/// within 1e-9 of the unit circle.
DiscreteDichotomy find_discrete_dichotomy(const std::vector<Mat>& mats);

struct EdpCheck {
  double K_hat = 1.0;
  double r = 0.5;
  bool pass = false;
};

/// Smallest K_hat (>= 1) making both discrete inequalities hold on the
/// sampled window for a given projection and rate; pass iff it is finite.
EdpCheck verify_edp(const std::vector<Mat>& mats, const Mat& P_hat, double r);

/// P = Z(0, t_0) P_hat Z(t_0, 0) so the discrete splitting is seen at time 0.
Mat promote_discrete_projection(const LinearSystem& sys, const Mat& P_hat);

}  // namespace depcag
