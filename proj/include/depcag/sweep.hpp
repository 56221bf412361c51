#pragma once

#include "depcag/dichotomy.hpp"

#include <vector>

namespace depcag {

/// Precompiled evaluation of x(e) = integral over [a, b] of G(e, s) g(s) ds
/// at a fixed list of times e, for forcings g supplied at stage times.
///
/// On every interval r meeting [a, b] the forced equation y' = A y + g is
/// swept from zeta_r (y = 0) forward to t_{r+1} and backward to t_r with
/// clipped RK4 steps. Each step is stored as y+ = R y + B0 g0 + Bm gm + B1 g1,
/// so applying the plan to a new forcing costs only matrix-vector products.
/// The end values give the per-interval integrals that the Green kernel
/// transports to each evaluation time through Z(e, 0) P Z(0, t_r) and its
/// unstable counterpart.
///
/// Stages are keyed by (interval, time): at a breakpoint the left and right
/// intervals see different frozen arguments and keep separate stages.
class SweepPlan {
 public:
  SweepPlan(const GreenContext& ctx, double a, double b, std::vector<double> eval_times,
            double step, bool stage_states, Exec exec = Exec::Parallel);

  double a() const { return a_; }
  double b() const { return b_; }
  double step() const { return h_; }
  long k_lo() const { return ka_; }
  long k_hi() const { return kb_; }

  std::size_t stage_count() const { return stage_time_.size(); }
  const std::vector<double>& stage_times() const { return stage_time_; }
  const std::vector<long>& stage_intervals() const { return stage_interval_; }
  /// Z(s, 0) at every stage; empty unless built with stage_states.
  const std::vector<Mat>& stage_Z0() const { return stage_z0_; }

  const std::vector<double>& eval_times() const { return eval_; }
  const Mat& eval_Z0(std::size_t e) const { return eval_z0_[e]; }

  /// `g` is n x stage_count(); returns n x eval count.
  Mat apply(const Mat& g, Exec exec = Exec::Parallel) const;

 private:
  struct Record {
    std::size_t after_steps;  // steps taken in this direction before recording
    std::size_t eval;
  };
  struct Sweep {
    long r = 0;
    std::size_t fwd_begin = 0, fwd_end = 0, bwd_begin = 0, bwd_end = 0;
    std::vector<Record> fwd_rec, bwd_rec;
  };
  struct StepRef {
    bool forced = false;
    std::size_t s0 = 0, sm = 0, s1 = 0;
  };

  void run_sweep(const Sweep& sw, const Mat& g, double* u, double* w, Mat& out) const;
  void step_into(std::size_t k, const double* y, const Mat& g, double* yn) const;

  const GreenContext* ctx_;
  int n_;
  double a_, b_, h_;
  long ka_, kb_;
  std::vector<double> eval_;
  std::vector<long> eval_interval_;
  std::vector<Mat> eval_z0_;
  std::vector<Sweep> sweeps_;
  std::vector<StepRef> steps_;
  std::vector<double> coef_;  // per step: R, B0, Bm, B1 row-major
  std::vector<double> stage_time_;
  std::vector<long> stage_interval_;
  std::vector<Mat> stage_z0_;
};

}  // namespace depcag
