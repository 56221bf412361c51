#pragma once

#include "depcag/dichotomy.hpp"

#include <optional>
#include <vector>

namespace depcag {

/// f(t, x, y) with y standing for the frozen value x(gamma(t)), plus its
/// certified sup bound and block Lipschitz constants. An empty `f` means
/// "no nonlinearity".
struct Nonlinearity {
  std::vector<Expr> f;
  CertifiedBound mu, ell1, ell2;

  static Nonlinearity none() { return {}; }
  /// Bounds sampled over t in [t_lo, t_hi] and every x_i, y_i in
  /// [-radius, radius].
  static Nonlinearity sampled(std::vector<Expr> f, int n, double t_lo, double t_hi, double radius,
                              int samples = 20000, double inflation = 1.05);

  bool present() const { return !f.empty(); }
  int dim() const { return static_cast<int>(f.size()); }
  void eval(double t, const double* x, const double* y, double* out) const;
};

/// Which flavour of the theorem's constants applies.
enum class Variant {
  General,
  OdeLimit,  // A0 == 0: the equation is an ODE and Z = Phi
  PurePca,   // A == 0: only the piecewise constant argument drives the flow
};

const char* variant_name(Variant v);

/// Scalar inputs of every theorem condition.
struct ConditionInputs {
  Variant variant = Variant::General;
  double M = 0, M0 = 0, mu = 0, ell1 = 0, ell2 = 0;
  double theta = 1, K = 1, alpha = 1, rho_A = 1;
};

struct TheoremConditions {
  ConditionInputs in;
  double rho_star = 1;
  double eta1 = 0, eta2 = 0;
  double F1_theta = 1, F0_theta = 1;
  double v = 0, v_tilde = 0;
  double fpt_lhs = 0;  // 2 (l1 + l2) K rho*, compared with alpha
  double gamma_star = 0;
  /// Upper limit for alpha in the Holder condition: min(p1, p2).
  std::optional<double> alpha_upper;
  std::optional<double> p1, p2;
  struct Flags {
    bool fpt = false, schema0 = false, schema0B = false, alfa = false;
  } flags;
  bool all_pass() const { return flags.fpt && flags.schema0 && flags.schema0B; }
};

/// (e^x - 1) / x with the limit 1 at x = 0.
double expm1_ratio(double x);

TheoremConditions evaluate_conditions(const ConditionInputs& in);
TheoremConditions evaluate_conditions(const GreenContext& ctx, const Nonlinearity& f);
Variant detect_variant(const LinearSystem& sys);

/// Piecewise RK4 solution with cubic Hermite dense output.
class Trajectory {
 public:
  struct Piece {
    long interval = 0;
    Vec frozen;  // x(zeta_interval)
    std::vector<double> t;  // ascending
    std::vector<Vec> x, dx;
  };

  int dim() const { return n_; }
  double t_min() const { return lo_; }
  double t_max() const { return hi_; }
  Vec at(double s) const;
  /// x(gamma(s)) as used on the interval of s.
  const Vec& frozen_at(double s) const;
  /// x(zeta_k) for a represented interval k.
  const Vec& frozen(long k) const;
  const std::vector<Piece>& pieces() const { return pieces_; }
  /// All nodes in ascending time order (shared endpoints listed once).
  std::vector<std::pair<double, Vec>> samples() const;

 private:
  friend Trajectory integrate_span(const LinearSystem&, const Nonlinearity&, double, const Vec&,
                                   double, double, double);
  int n_ = 0;
  double lo_ = 0, hi_ = 0;
  const Grid* grid_ = nullptr;
  std::vector<Piece> pieces_;  // ascending intervals
};

/// Solution through (tau, xi) on [lo, hi] (tau inside). Whole intervals are
/// not required; each interval's frozen value x(zeta_k) is solved for even
/// when zeta_k lies outside [lo, hi]. `step` <= 0 uses the system's step.
Trajectory integrate_span(const LinearSystem& sys, const Nonlinearity& f, double tau, const Vec& xi,
                          double lo, double hi, double step = 0.0);
Trajectory integrate_depcag(const LinearSystem& sys, const Nonlinearity& f, double tau,
                            const Vec& xi, double t_end, double step = 0.0);

/// Right-hand side A x + A0 y + f(t, x, y).
Vec depcag_rhs(const LinearSystem& sys, const Nonlinearity& f, double t, const Vec& x,
               const Vec& y);

struct GronwallResult {
  double bound = 0;
  double w = 0;
};

/// C exp(int eta1 + 1/(1-w) int eta2(s) e^{int_{t_i(s)}^{gamma(s)} eta1}) for
/// t >= tau; throws InapplicableError if w >= 1.
GronwallResult gronwall_bound(const Expr& eta1, const Expr& eta2, double C, const Grid& grid,
                              double tau, double t);

struct EnvelopeCase {
  Vec xi, xi2;
  double distance = 0;
  double worst_margin = 0;  // min over checked times s != tau of envelope - |difference|
  double worst_time = 0;
  bool pass = false;
};

struct EnvelopeReport {
  std::string exponent_name;  // p1, p2, p1~ or p2~
  double exponent = 0;
  double tau = 0, t = 0;
  std::vector<EnvelopeCase> cases;
  bool pass = false;
};

/// Integrates each pair between tau and t (either direction) and checks
/// |x(s) - x'(s)| <= |xi - xi'| e^{p |s - tau|} at every mesh node.
EnvelopeReport continuity_envelope_check(const LinearSystem& sys, const Nonlinearity& f,
                                         const TheoremConditions& cond,
                                         const std::vector<std::pair<Vec, Vec>>& pairs, double tau,
                                         double t);

}  // namespace depcag
