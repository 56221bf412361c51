#pragma once

#include "depcag/bounded.hpp"
#include "depcag/dynamics.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace depcag {

struct EngineOptions {
  double horizon = 0.0;       // <= 0: max(20/alpha, 10 theta)
  double picard_tol = 1e-10;
  double mesh_step = 0.0;     // <= 0: min(theta/50, 0.02)
  double quad_step = 0.0;     // <= 0: the system's RK4 step
  double traj_step = 0.0;     // <= 0: the system's RK4 step
  int max_iterations = 1000;
};

struct MapValue {
  Vec value;
  double error_bar = 0.0;
  double tail = 0.0;
  double quadrature = 0.0;
};

struct VarthetaValue : MapValue {
  int iterations = 0;
  std::vector<double> increments;
  double contraction = 0.0;    // weighted last increment * g / (1 - g), g = (1 + G) / 2
  double interpolation = 0.0;  // mesh interpolation allowance
  double roundoff = 0.0;       // floating-point floor of the iteration
};

/// The maps chi, H (nonlinear -> linear) and vartheta, L (linear ->
/// nonlinear) for one system, nonlinearity and dichotomy. Requires the
/// contraction factor 2 K rho* (l1 + l2) / alpha below 1.
///
/// Sweep plans are cached per evaluation time, so repeated maps at one t
/// only pay for the forcing evaluation and the sweep.
class ConjugacyEngine {
 public:
  ConjugacyEngine(std::shared_ptr<const GreenContext> ctx, Nonlinearity f, EngineOptions opt = {},
                  Exec exec = Exec::Parallel);

  const GreenContext& context() const { return *ctx_; }
  const Nonlinearity& nonlinearity() const { return f_; }
  const TheoremConditions& conditions() const { return cond_; }
  const EngineOptions& options() const { return opt_; }
  double horizon() const { return T_; }
  double mesh_step() const { return mesh_h_; }
  double gamma_star() const { return cond_.gamma_star; }
  /// 2 mu K rho* / alpha: the proximity bound for both maps.
  double proximity_bound() const;
  double chi_tail() const { return chi_tail_; }
  double vartheta_tail() const { return theta_tail_; }

  /// Time span the transition data must cover for maps evaluated at times
  /// in [t_lo, t_hi].
  static std::pair<double, double> required_span(const LinearSystem& sys, double alpha,
                                                  const EngineOptions& opt, double t_lo,
                                                  double t_hi);

  MapValue chi(double tau, const Vec& xi, double t) const;
  MapValue H(double t, const Vec& xi) const;
  VarthetaValue vartheta(double tau, const Vec& nu, double t) const;
  VarthetaValue L(double t, const Vec& nu) const;

  /// chi along one trajectory at many times, with a shared plan over
  /// [min - T, max + T]; `coarse` is the same solution at twice the step.
  std::vector<MapValue> chi_along(const std::vector<double>& ts, const Trajectory& fine,
                                  const Trajectory& coarse) const;

 private:
  enum class PlanKind { ChiFine, ChiCoarse, ThetaFine, ThetaCoarse };
  std::shared_ptr<const SweepPlan> plan(PlanKind kind, double t) const;
  Mat chi_forcing(const SweepPlan& plan, const Trajectory& traj) const;

  std::shared_ptr<const GreenContext> ctx_;
  Nonlinearity f_;
  EngineOptions opt_;
  Exec exec_;
  TheoremConditions cond_;
  double T_ = 0, mesh_h_ = 0, quad_h_ = 0, traj_h_ = 0;
  int mesh_half_ = 0;  // vartheta mesh has 2 * mesh_half_ + 1 nodes centred on t
  double chi_tail_ = 0, theta_tail_ = 0;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, double>, std::shared_ptr<const SweepPlan>> plans_;
};

struct InverseCase {
  Vec xi;
  Vec h, lh, l, hl;
  double residual_LH = 0, bar_LH = 0;
  double residual_HL = 0, bar_HL = 0;
  bool pass = false;
};

struct InverseReport {
  double t = 0;
  std::vector<InverseCase> cases;
  double max_residual = 0;
  bool pass = false;
};

/// |L(t, H(t, xi)) - xi| and |H(t, L(t, xi)) - xi| against 10x the summed
/// error bars of the maps involved.
InverseReport certify_inverse(const ConjugacyEngine& engine, const std::vector<Vec>& samples,
                              double t);

struct MappingCase {
  double t = 0;
  Vec x, h;
  double residual = 0;   // central-difference residual of the linear equation
  double proximity = 0;  // |h - x|
  double error_bar = 0;
  bool pass = false;
};

struct MappingReport {
  double tau = 0;
  Vec xi;
  double step = 0;  // finite-difference half width
  double bound = 0;  // proximity bound
  double residual_tol = 1e-3;
  std::vector<MappingCase> cases;
  double max_residual = 0;
  bool pass = false;
};

/// h(t) = x(t) + chi(t; (tau, xi)) along the nonlinear trajectory, checked
/// against the linear equation and the proximity bound.
MappingReport certify_solution_mapping(const ConjugacyEngine& engine, double tau, const Vec& xi,
                                       const std::vector<double>& t_samples);

struct HolderSample {
  char map = 'H';
  std::size_t base = 0;
  double delta = 0;
  double d_output = 0;
  double bound = 0;
  double implied_exponent = 0;
  bool pass = false;
};

struct HolderReport {
  double t = 0;
  double exponent_H = 0, coeff_H = 0;
  double exponent_L = 0, coeff_L = 0;
  std::vector<HolderSample> empirical;
  bool pass = false;
};

/// Closed-form Holder constants and a check at |xi - xi'| = delta for each
/// base point (directions drawn from `seed`). Needs the alfa condition.
HolderReport holder_certify(const ConjugacyEngine& engine, double t,
                            const std::vector<double>& deltas, const std::vector<Vec>& bases,
                            std::uint64_t seed);

struct ContinuityReport {
  double t = 0, eps = 0;
  double horizon_L = 0, horizon_L_min = 0;
  double D_H = 0, delta_H = 0;
  double D_L = 0, delta_L = 0;
  std::size_t checked = 0;
  double worst_H = 0, worst_L = 0;  // largest change of chi / vartheta seen
  bool pass = false;
};

/// Epsilon-delta spot check of uniform continuity; `horizon_L` <= 0 takes
/// the smallest admissible value.
ContinuityReport uniform_continuity_report(const ConjugacyEngine& engine, double t, double eps,
                                           double horizon_L, const std::vector<Vec>& bases,
                                           std::uint64_t seed);

}  // namespace depcag
