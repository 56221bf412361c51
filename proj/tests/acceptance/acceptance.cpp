// Acceptance criteria 1-12. Run with a criterion id (1..12, or 7r for the
// halved-tolerance half of criterion 7) or "all". Prints one line per
// criterion and exits non-zero if any selected criterion fails.
#include "depcag/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

using namespace depcag;

namespace {

// Tolerances, pinned here rather than read from the library.
constexpr double kCocycleTol = 1e-6;
constexpr double kResidualTol = 1e-4;
constexpr double kClosedFormTol = 1e-6;
constexpr double kClosedFormValue = 0.431091;
constexpr double kDiscreteRateMax = 0.44;
constexpr double kGreenAllowance = 1e-6;
constexpr double kBoundedBarMax = 1e-4;
constexpr double kBoundedEqTol = 1e-3;
constexpr double kInverseBarFactor = 10.0;
constexpr double kRatioLo = 0.2, kRatioHi = 0.9;
constexpr double kMappingTol = 1e-3;
constexpr double kPhiTol = 1e-6;

// Sample sizes.
constexpr int kTriples = 100;
constexpr int kResidualPoints = 200;
constexpr int kGreenPerAxis = 100;
constexpr int kProximityTimes = 5, kProximityPerTime = 10;
constexpr int kInverseTimes = 5, kInversePerTime = 20;
constexpr int kMappingTimes = 50;
constexpr int kEnvelopePairs = 20;
constexpr double kTimeLo = 0.0, kTimeHi = 5.0;

struct Outcome {
  bool pass = true;
  std::string note;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!note.empty()) note += "; ";
    note += what + (ok ? "" : " [FAILED]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const Problem& problem(const std::string& preset) {
  static std::map<std::string, Problem> cache;
  auto it = cache.find(preset);
  if (it == cache.end()) it = cache.emplace(preset, build_problem(load_preset(preset), kTimeLo, kTimeHi)).first;
  return it->second;
}

double lo_of(const Problem& p) { return p.cfg.system->grid.t(p.cfg.k_lo); }
double hi_of(const Problem& p) { return p.cfg.system->grid.t(p.cfg.k_hi + 1); }

// ---- reusable pieces, each for one preset ----

void cocycle(const std::string& preset, Outcome& out) {
  const Problem& p = problem(preset);
  Rng rng(101);
  double lo = lo_of(p), hi = hi_of(p), worst = 0.0;
  for (int q = 0; q < kTriples; ++q) {
    double t = uniform(rng, lo, hi), tau = uniform(rng, lo, hi), s = uniform(rng, lo, hi);
    const TransitionTable& tab = p.ctx->table();
    worst = std::max(worst, op_norm(tab.Z(t, tau) * tab.Z(tau, s) - tab.Z(t, s)));
  }
  long intervals = p.cfg.k_hi - p.cfg.k_lo + 1;
  out.require(intervals >= 10, preset + " spans " + std::to_string(intervals) + " intervals");
  out.require(worst <= kCocycleTol, preset + " cocycle error " + fmt("%.2e", worst));
}

void transition_residual(const std::string& preset, Outcome& out) {
  // Z(t, tau) = Z(t, 0) Z(0, tau): the residual at tau = 0 covers every tau.
  const Problem& p = problem(preset);
  const LinearSystem& sys = *p.cfg.system;
  const TransitionTable& tab = p.ctx->table();
  Rng rng(102);
  const double d = 1e-3;
  double worst = 0.0;
  for (int q = 0; q < kResidualPoints; ++q) {
    long k = p.cfg.k_lo + static_cast<long>(unit_from_bits(rng()) * (p.cfg.k_hi - p.cfg.k_lo + 1));
    double t = uniform(rng, sys.grid.t(k) + 4 * d, sys.grid.t(k + 1) - 4 * d);
    Mat fd = (8.0 * (tab.Z_t_0(t + d) - tab.Z_t_0(t - d)) - (tab.Z_t_0(t + 2 * d) - tab.Z_t_0(t - 2 * d))) / (12 * d);
    Mat rhs = sys.A.at(t) * tab.Z_t_0(t) + sys.A0.at(t) * tab.Z_t_0(sys.grid.gamma(t));
    worst = std::max(worst, op_norm(fd - rhs));
  }
  out.require(worst <= kResidualTol, preset + " residual " + fmt("%.2e", worst));
}

void green_bound(const std::string& preset, Outcome& out) {
  const Problem& p = problem(preset);
  const GreenContext& ctx = *p.ctx;
  out.require(p.ed1.pass, preset + " dichotomy certified (K " + fmt("%.4g", ctx.dichotomy().K) + ")");
  Rng rng(104);
  std::vector<double> ts(kGreenPerAxis), ss(kGreenPerAxis);
  for (auto& t : ts) t = uniform(rng, lo_of(p), hi_of(p));
  for (auto& s : ss) s = uniform(rng, lo_of(p), hi_of(p));
  double K = ctx.dichotomy().K, a = ctx.dichotomy().alpha, rs = ctx.rho_star(), worst = 0.0;
  for (double t : ts)
    for (double s : ss) worst = std::max(worst, op_norm(ctx.green(t, s)) / (K * rs * std::exp(-a * std::fabs(t - s))));
  out.require(worst <= 1.0 + kGreenAllowance, preset + " |G|/bound " + fmt("%.4f", worst));
}

void bounded_ones(const std::string& preset, Outcome& out) {
  const Problem& p = problem(preset);
  const GreenContext& ctx = *p.ctx;
  const LinearSystem& sys = ctx.system();
  int n = sys.dim();
  std::vector<Expr> ones(static_cast<std::size_t>(n), Expr::constant(1.0));
  double g_sup = std::sqrt(static_cast<double>(n));
  ForcingTerm g = ForcingTerm::with_bound(ones, CertifiedBound::analytic(g_sup));
  TruncationPolicy pol = TruncationPolicy::standard(ctx, g_sup);
  Rng rng(105);
  const double d = 1e-3;
  double sup = 2.0 * ctx.dichotomy().K * ctx.rho_star() * g_sup / ctx.dichotomy().alpha;
  double worst_bar = 0.0, worst_eq = 0.0, worst_norm = 0.0;
  for (int q = 0; q < 10; ++q) {
    double t = uniform(rng, kTimeLo, kTimeHi);
    long k = sys.grid.interval_index(t);
    t = std::clamp(t, sys.grid.t(k) + 2 * d, sys.grid.t(k + 1) - 2 * d);
    auto v = bounded_solution_many(ctx, g, {t, t - d, t + d, sys.grid.gamma(t)}, pol);
    Vec deriv = (v[2].value - v[1].value) / (2 * d);
    Vec rhs = sys.A.at(t) * v[0].value + sys.A0.at(t) * v[3].value + g.at(t);
    worst_eq = std::max(worst_eq, (deriv - rhs).norm());
    worst_bar = std::max(worst_bar, v[0].error_bar);
    worst_norm = std::max(worst_norm, v[0].value.norm());
  }
  out.require(worst_bar <= kBoundedBarMax, preset + " error bar " + fmt("%.2e", worst_bar));
  out.require(worst_eq <= kBoundedEqTol, preset + " equation residual " + fmt("%.2e", worst_eq));
  out.require(worst_norm <= sup, preset + " |x*| " + fmt("%.4f", worst_norm) + " <= " + fmt("%.4f", sup));
}

const ConjugacyEngine& engine(const std::string& preset) {
  static std::map<std::string, std::unique_ptr<ConjugacyEngine>> cache;
  auto& e = cache[preset];
  if (!e) {
    const Problem& p = problem(preset);
    e = std::make_unique<ConjugacyEngine>(p.ctx, p.cfg.f, p.cfg.engine);
  }
  return *e;
}

void proximity(const std::string& preset, Outcome& out) {
  const ConjugacyEngine& eng = engine(preset);
  const auto& c = eng.conditions();
  double bound = 2.0 * c.in.mu * c.in.K * c.rho_star / c.in.alpha;
  int n = eng.context().system().dim();
  Rng rng(106);
  double worst_h = 0.0, worst_l = 0.0;
  bool ok = true;
  for (int q = 0; q < kProximityTimes; ++q) {
    double t = uniform(rng, kTimeLo, kTimeHi);
    for (int m = 0; m < kProximityPerTime; ++m) {
      Vec xi = random_in_ball(rng, n, 2.0);
      MapValue h = eng.H(t, xi);
      VarthetaValue l = eng.L(t, xi);
      double dh = (h.value - xi).norm(), dl = (l.value - xi).norm();
      worst_h = std::max(worst_h, dh);
      worst_l = std::max(worst_l, dl);
      if (!(dh <= bound + h.error_bar && dl <= bound + l.error_bar)) ok = false;
    }
  }
  out.require(ok, preset + " max |H-xi| " + fmt("%.3e", worst_h) + ", |L-xi| " + fmt("%.3e", worst_l) +
                      " vs 2 mu K rho*/alpha " + fmt("%.3e", bound));
}

struct InverseStats {
  double max_residual = 0.0;
  std::size_t failed = 0;
};

InverseStats inverse_run(const ConjugacyEngine& eng) {
  int n = eng.context().system().dim();
  Rng rng(107);
  InverseStats s;
  for (int q = 0; q < kInverseTimes; ++q) {
    double t = uniform(rng, kTimeLo, kTimeHi);
    std::vector<Vec> pts;
    for (int m = 0; m < kInversePerTime; ++m) pts.push_back(random_in_ball(rng, n, 2.0));
    InverseReport rep = certify_inverse(eng, pts, t);
    for (const auto& c : rep.cases) {
      s.max_residual = std::max({s.max_residual, c.residual_LH, c.residual_HL});
      if (!(c.residual_LH <= kInverseBarFactor * c.bar_LH && c.residual_HL <= kInverseBarFactor * c.bar_HL))
        ++s.failed;
    }
  }
  return s;
}

void inverse(const std::string& preset, Outcome& out) {
  InverseStats s = inverse_run(engine(preset));
  out.require(s.failed == 0, preset + " max residual " + fmt("%.2e", s.max_residual) + ", " +
                                 std::to_string(s.failed) + " cases over 10x bars");
}

void mapping(const std::string& preset, Outcome& out) {
  const ConjugacyEngine& eng = engine(preset);
  Rng rng(108);
  int n = eng.context().system().dim();
  Vec xi = random_in_ball(rng, n, 1.0);
  std::vector<double> ts;
  for (int q = 0; q < kMappingTimes; ++q) ts.push_back(uniform(rng, kTimeLo + 0.01, kTimeHi));
  std::sort(ts.begin(), ts.end());
  MappingReport rep = certify_solution_mapping(eng, 0.0, xi, ts);
  double worst = 0.0;
  for (const auto& c : rep.cases) worst = std::max(worst, c.residual);
  out.require(worst <= kMappingTol && rep.cases.size() == ts.size(),
              preset + " residual " + fmt("%.2e", worst) + " over " + std::to_string(rep.cases.size()) + " times");
}

// ---- criteria ----

Outcome c1() {
  Outcome o;
  for (const char* p : {"scalar-stable", "planar-saddle"}) cocycle(p, o);
  return o;
}

Outcome c2() {
  Outcome o;
  for (const char* p : {"scalar-stable", "planar-saddle", "palmer-limit", "pure-pca"}) transition_residual(p, o);
  return o;
}

Outcome c3() {
  Outcome o;
  auto sys = std::make_shared<LinearSystem>(Grid::builtin_family("floor"),
                                            MatrixFunction::constant(Mat::Constant(1, 1, -1.0)),
                                            MatrixFunction::constant(Mat::Constant(1, 1, 0.1)),
                                            CertifiedBound::analytic(1.0), CertifiedBound::analytic(0.1));
  const double a = -1.0, b = 0.1;
  double closed = std::exp(a) + (b / a) * (std::exp(a) - 1.0);
  o.require(std::fabs(closed - kClosedFormValue) <= kClosedFormTol, "closed form " + fmt("%.7f", closed));
  double worst = 0.0;
  for (long k = -5; k <= 5; ++k)
    worst = std::max(worst, std::fabs(transition_matrix(*sys, k + 1.0, static_cast<double>(k))(0, 0) - closed));
  o.require(worst <= kClosedFormTol, "max |Z(n+1,n) - closed| " + fmt("%.2e", worst));
  DiscreteDichotomy d = find_discrete_dichotomy(discrete_reduction(*sys, -5, 5));
  o.require(d.P_hat.rows() == 1 && d.P_hat(0, 0) == 1.0, "P_hat = " + fmt("%g", d.P_hat(0, 0)));
  o.require(d.r <= kDiscreteRateMax, "r = " + fmt("%.6f", d.r));
  return o;
}

Outcome c4() {
  Outcome o;
  for (const char* p : {"scalar-stable", "planar-saddle"}) green_bound(p, o);
  return o;
}

Outcome c5() {
  Outcome o;
  DichotomySpec d;
  d.P = Mat::Identity(1, 1);
  d.K = 1.0;
  d.alpha = 1.0;
  auto sys = std::make_shared<LinearSystem>(Grid::builtin_family("floor"),
                                            MatrixFunction::constant(Mat::Constant(1, 1, -1.0)),
                                            MatrixFunction::zero(1), CertifiedBound::analytic(1.0),
                                            CertifiedBound::analytic(0.0));
  GreenContext ctx(sys, d, -60, 60);
  Ed1Report ed1 = verify_ed1(ctx, -10, 10, 8, false);
  o.require(ed1.pass, "dichotomy (P, K, alpha) = (1, 1, 1) certified");
  ForcingTerm g = ForcingTerm::with_bound({Expr::constant(1.0)}, CertifiedBound::analytic(1.0));
  TruncationPolicy pol = TruncationPolicy::standard(ctx, 1.0);
  double sup = 2.0 * d.K * ctx.rho_star() * 1.0 / d.alpha;
  double worst_err = 0.0, worst_bar = 0.0, worst_norm = 0.0;
  bool within = true;
  for (double t : {-3.7, -0.5, 0.0, 0.5, 1.25, 2.9, 4.4}) {
    BoundedValue v = bounded_solution(ctx, g, t, pol);
    double err = std::fabs(v.value(0) - 1.0);
    if (!(err <= v.error_bar)) within = false;
    worst_err = std::max(worst_err, err);
    worst_bar = std::max(worst_bar, v.error_bar);
    worst_norm = std::max(worst_norm, std::fabs(v.value(0)));
  }
  o.require(within, "|x* - 1| " + fmt("%.2e", worst_err) + " within the error bar");
  o.require(worst_bar <= kBoundedBarMax, "error bar " + fmt("%.2e", worst_bar) + " at the default horizon");
  o.require(worst_norm <= sup, "|x*| " + fmt("%.4f", worst_norm) + " <= 2 K rho* |g| / alpha = " + fmt("%.4f", sup));
  return o;
}

Outcome c6() {
  Outcome o;
  proximity("scalar-stable", o);
  return o;
}

Outcome c7() {
  Outcome o;
  for (const char* p : {"scalar-stable", "planar-saddle", "palmer-limit", "pure-pca"}) inverse(p, o);
  return o;
}

Outcome c7_ratio() {
  Outcome o;
  for (const char* name : {"scalar-stable", "planar-saddle", "palmer-limit", "pure-pca"}) {
    const Problem& p = problem(name);
    InverseStats full = inverse_run(engine(name));
    EngineOptions half = p.cfg.engine;
    half.picard_tol *= 0.5;
    ConjugacyEngine eng(p.ctx, p.cfg.f, half);
    InverseStats halved = inverse_run(eng);
    double ratio = halved.max_residual / full.max_residual;
    o.require(ratio >= kRatioLo && ratio <= kRatioHi, std::string(name) + " ratio " + fmt("%.4f", ratio));
  }
  return o;
}

Outcome c8() {
  Outcome o;
  mapping("scalar-stable", o);
  return o;
}

Outcome c9() {
  Outcome o;
  const Problem& p = problem("scalar-stable");
  o.require(p.cond.p1.has_value(), "p1 available");
  if (!p.cond.p1) return o;
  Rng rng(109);
  int n = p.cfg.system->dim();
  std::vector<std::pair<Vec, Vec>> fwd, bwd;
  for (int q = 0; q < kEnvelopePairs; ++q) {
    Vec a = random_in_ball(rng, n, 2.0), b = random_in_ball(rng, n, 2.0);
    (q % 2 == 0 ? fwd : bwd).push_back({a, b});
  }
  EnvelopeReport up = continuity_envelope_check(*p.cfg.system, p.cfg.f, p.cond, fwd, 0.0, 5.0);
  EnvelopeReport down = continuity_envelope_check(*p.cfg.system, p.cfg.f, p.cond, bwd, 0.0, -5.0);
  double worst = INFINITY;
  std::string margins;
  for (const auto* rep : {&up, &down})
    for (const auto& c : rep->cases) {
      worst = std::min(worst, c.worst_margin);
      margins += (margins.empty() ? "" : " ") + fmt("%.3g", c.worst_margin);
    }
  o.require(up.pass && down.pass,
            "p = " + fmt("%.4f", up.exponent) + ", margins [" + margins + "]");
  return o;
}

Outcome c10() {
  Outcome o;
  const char* name = "scalar-stable";
  const Problem& p = problem(name);
  o.require(p.cond.flags.alfa, std::string(name) + " satisfies alpha < min(p1, p2)");
  if (!p.cond.flags.alfa) return o;
  const ConjugacyEngine& eng = engine(name);
  const double t = 2.0;
  Vec base = Vec::Constant(1, 0.35);
  HolderReport rep = holder_certify(eng, t, {1e-2}, {base}, 1);
  MapValue h0 = eng.H(t, base);
  VarthetaValue l0 = eng.L(t, base);
  double worst_h = -INFINITY, worst_l = -INFINITY;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    for (double sign : {-1.0, 1.0}) {
      Vec other = base + Vec::Constant(1, sign * delta);
      MapValue h1 = eng.H(t, other);
      VarthetaValue l1 = eng.L(t, other);
      double slack_h = rep.coeff_H * std::pow(delta, rep.exponent_H) + h0.error_bar + h1.error_bar;
      double slack_l = rep.coeff_L * std::pow(delta, rep.exponent_L) + l0.error_bar + l1.error_bar;
      worst_h = std::max(worst_h, (h1.value - h0.value).norm() / slack_h);
      worst_l = std::max(worst_l, (l1.value - l0.value).norm() / slack_l);
    }
  }
  o.require(worst_h <= 1.0, "H: C1 " + fmt("%.4f", rep.coeff_H) + ", exponent " + fmt("%.4f", rep.exponent_H) +
                                ", worst |dH|/bound " + fmt("%.3e", worst_h));
  o.require(worst_l <= 1.0, "L: D1 " + fmt("%.4f", rep.coeff_L) + ", exponent " + fmt("%.4f", rep.exponent_L) +
                                ", worst |dL|/bound " + fmt("%.3e", worst_l));
  return o;
}

Outcome c11() {
  Outcome o;
  {
    const Problem& p = problem("palmer-limit");
    const LinearSystem& sys = *p.cfg.system;
    o.require(detect_variant(sys) == Variant::OdeLimit, "palmer-limit has A0 = 0");
    Rng rng(111);
    double worst = 0.0;
    for (int q = 0; q < 50; ++q) {
      double t = uniform(rng, lo_of(p), hi_of(p)), s = std::clamp(t + uniform(rng, -5.0, 5.0), lo_of(p), hi_of(p));
      Mat phi = fundamental_matrix(sys, t, s);
      worst = std::max(worst, op_norm(p.ctx->table().Z(t, s) - phi) / std::max(1.0, op_norm(phi)));
    }
    o.require(worst <= kPhiTol, "max |Z - Phi|/|Phi| " + fmt("%.2e", worst));
    double expect = p.ctx->rho_A() * std::exp(p.ctx->dichotomy().alpha * sys.grid.theta());
    o.require(std::fabs(p.ctx->rho_star() - expect) <= 1e-12 * expect,
              "rho* = rho(A) e^{alpha theta} = " + fmt("%.6f", expect));
  }
  {
    const Problem& p = problem("pure-pca");
    o.require(detect_variant(*p.cfg.system) == Variant::PurePca, "pure-pca has A = 0");
    double expect = std::exp(p.ctx->dichotomy().alpha * p.cfg.system->grid.theta());
    o.require(std::fabs(p.ctx->rho_star() - expect) <= 1e-12 * expect, "rho* = e^{alpha theta} = " + fmt("%.6f", expect));
  }
  for (const char* name : {"palmer-limit", "pure-pca"}) {
    cocycle(name, o);
    transition_residual(name, o);
    green_bound(name, o);
    bounded_ones(name, o);
    proximity(name, o);
    inverse(name, o);
    mapping(name, o);
  }
  return o;
}

Outcome c12() {
  Outcome o;
  RunConfig cfg = with_seed(load_preset("scalar-stable"), 7);
  CommandOptions opt;
  opt.command = "certify-all";
  CommandOutput a = run_command(cfg, opt), b = run_command(cfg, opt);
  o.require(a.exit_code == 0 && b.exit_code == 0, "certify-all exit codes " + std::to_string(a.exit_code) + ", " +
                                                      std::to_string(b.exit_code));
  o.require(a.body == b.body, "reports byte-identical (" + std::to_string(a.body.size()) + " bytes)");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"1", c1}, {"2", c2}, {"3", c3}, {"4", c4},   {"5", c5},   {"6", c6},   {"7", c7},
      {"7r", c7_ratio}, {"8", c8}, {"9", c9}, {"10", c10}, {"11", c11}, {"12", c12}};
  std::string want = argc > 1 ? argv[1] : "all";
  bool ok = true, ran = false;
  for (const auto& [id, fn] : all) {
    if (want != "all" && want != id) continue;
    ran = true;
    auto start = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.pass = false;
      r.note = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %s: %s (%.1fs) %s\n", id.c_str(), r.pass ? "PASS" : "FAIL", secs, r.note.c_str());
    std::fflush(stdout);
    ok = ok && r.pass;
  }
  if (!ran) {
    std::fprintf(stderr, "unknown criterion '%s'\n", want.c_str());
    return 2;
  }
  return ok ? 0 : 1;
}
