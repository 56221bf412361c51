#include "depcag/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace depcag {

namespace {

// Maps and bounded solutions are sampled at times in this range.
constexpr double kTimeLo = 0.0, kTimeHi = 5.0;

double window_lo(const Problem& p) { return p.cfg.system->grid.t(p.cfg.k_lo); }
double window_hi(const Problem& p) { return p.cfg.system->grid.t(p.cfg.k_hi + 1); }

Json bound_json(const CertifiedBound& b) { return {{"value", b.value}, {"method", b.describe()}}; }

Json mat_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

CriterionResult make(const char* id, const char* title) {
  CriterionResult r;
  r.id = id;
  r.title = title;
  r.detail = Json::object();
  return r;
}

CriterionResult inapplicable(const char* id, const char* title, const std::string& why) {
  CriterionResult r = make(id, title);
  r.applicable = false;
  r.pass = true;
  r.gating = false;
  r.detail["reason"] = why;
  return r;
}

/// A point of interval k at least `margin` away from both ends.
double interior_point(Rng& rng, const Grid& g, long k, double margin) {
  return uniform(rng, g.t(k) + margin, g.t(k + 1) - margin);
}

}  // namespace

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * unit_from_bits(rng()); }

Vec random_in_ball(Rng& rng, int n, double radius) {
  Vec v(n);
  for (int i = 0; i < n; ++i) {
    // Box-Muller keeps the draws identical across standard libraries.
    double u1 = 1.0 - unit_from_bits(rng()), u2 = unit_from_bits(rng());
    v(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double nv = v.norm();
  if (nv == 0.0) v(0) = nv = 1.0;
  double rad = radius * std::pow(unit_from_bits(rng()), 1.0 / n);
  return v * (rad / nv);
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Problem build_problem(const RunConfig& cfg, double t_lo, double t_hi, Exec exec) {
  Problem p;
  p.cfg = cfg;
  const LinearSystem& sys = *cfg.system;
  const Grid& g = sys.grid;
  double theta = g.theta();
  p.reduction = discrete_reduction(sys, cfg.k_lo, cfg.k_hi);

  DichotomySpec spec;
  if (cfg.dichotomy.mode == DichotomyConfig::Mode::DiscreteAuto) {
    p.discrete = find_discrete_dichotomy(p.reduction);
    spec.P = promote_discrete_projection(sys, p.discrete->P_hat);
    spec.alpha = cfg.dichotomy.alpha ? *cfg.dichotomy.alpha : -std::log(p.discrete->r) / theta;
    spec.source = DichotomySpec::Source::DiscreteSpectral;
    p.P_hat = p.discrete->P_hat;
    p.r = p.discrete->r;
  } else {
    spec.P = cfg.dichotomy.P;
    spec.alpha = *cfg.dichotomy.alpha;
  }
  spec.K = cfg.dichotomy.K.value_or(1.0);

  auto span = ConjugacyEngine::required_span(sys, spec.alpha, cfg.engine, t_lo, t_hi);
  double Tb = std::max(20.0 / spec.alpha, 10.0 * theta);
  double lo = std::min(span.first, t_lo - Tb) - theta, hi = std::max(span.second, t_hi + Tb) + theta;
  long ka, kb;
  if (g.is_window()) {
    lo = std::max(lo, g.t(g.first_index()));
    hi = std::min(hi, g.t(g.last_index() + 1));
    ka = std::min(cfg.k_lo, g.interval_index(lo));
    kb = std::max(cfg.k_hi, std::min(g.last_index(), g.interval_index(hi)));
  } else {
    ka = std::min(cfg.k_lo, g.interval_index(lo));
    kb = std::max(cfg.k_hi, g.interval_index(hi));
  }
  auto ctx = std::make_shared<GreenContext>(cfg.system, spec, ka, kb, exec);
  p.ed1 = verify_ed1(*ctx, cfg.k_lo, cfg.k_hi, cfg.samples_per_interval, !cfg.dichotomy.K, exec);
  if (!cfg.dichotomy.K) ctx->set_K(p.ed1.K);
  p.ctx = ctx;

  if (cfg.dichotomy.mode == DichotomyConfig::Mode::User) {
    double t0 = g.t(cfg.k_lo);
    p.P_hat = ctx->table().Z_t_0(t0) * spec.P * ctx->table().Z_0_t(t0);
    double min_gap = std::numeric_limits<double>::infinity();
    for (long k = cfg.k_lo; k <= cfg.k_hi; ++k) min_gap = std::min(min_gap, g.t(k + 1) - g.t(k));
    p.r = std::exp(-spec.alpha * min_gap);
  }
  p.edp = verify_edp(p.reduction, p.P_hat, p.r);
  p.cond = evaluate_conditions(*ctx, cfg.f);
  return p;
}

Json condition_c_json(const ConditionCReport& rep) {
  Json per = Json::array();
  for (const auto& c : rep.per_interval)
    per.push_back({{"k", c.k},
                   {"rho_plus_A", c.rho_plus_A},
                   {"rho_minus_A", c.rho_minus_A},
                   {"rho_plus_A0", c.rho_plus_A0},
                   {"rho_minus_A0", c.rho_minus_A0}});
  return {{"k_lo", rep.k_lo},   {"k_hi", rep.k_hi},         {"nu_plus", rep.nu_plus},
          {"nu_minus", rep.nu_minus}, {"rho_A", rep.rho_A}, {"satisfied", rep.satisfied},
          {"per_interval", per}};
}

Json conditions_json(const TheoremConditions& c) {
  return {{"variant", variant_name(c.in.variant)},
          {"inputs",
           {{"M", c.in.M},
            {"M0", c.in.M0},
            {"mu", c.in.mu},
            {"ell1", c.in.ell1},
            {"ell2", c.in.ell2},
            {"theta", c.in.theta},
            {"K", c.in.K},
            {"alpha", c.in.alpha},
            {"rho_A", c.in.rho_A}}},
          {"rho_star", c.rho_star},
          {"eta1", c.eta1},
          {"eta2", c.eta2},
          {"F1_theta", c.F1_theta},
          {"F0_theta", c.F0_theta},
          {"v", c.v},
          {"v_tilde", c.v_tilde},
          {"fpt_lhs", c.fpt_lhs},
          {"gamma_star", c.gamma_star},
          {"p1", opt_json(c.p1)},
          {"p2", opt_json(c.p2)},
          {"alpha_upper", opt_json(c.alpha_upper)},
          {"flags",
           {{"fpt", c.flags.fpt}, {"schema0", c.flags.schema0}, {"schema0B", c.flags.schema0B}, {"alfa", c.flags.alfa}}},
          {"all_pass", c.all_pass()}};
}

Json constants_json(const Problem& p) {
  const GreenContext& ctx = *p.ctx;
  const LinearSystem& sys = ctx.system();
  const DichotomySpec& d = ctx.dichotomy();
  Json j;
  j["theta"] = sys.grid.theta();
  j["M"] = bound_json(sys.M);
  j["M0"] = bound_json(sys.M0);
  if (p.cfg.f.present()) {
    j["mu"] = bound_json(p.cfg.f.mu);
    j["ell1"] = bound_json(p.cfg.f.ell1);
    j["ell2"] = bound_json(p.cfg.f.ell2);
  }
  j["dichotomy"] = {{"P", mat_json(d.P)},
                    {"K", d.K},
                    {"K_method", p.cfg.dichotomy.K ? "user" : "ed1-sampled"},
                    {"alpha", d.alpha},
                    {"source", d.source == DichotomySpec::Source::UserSupplied ? "user" : "discrete-spectral"}};
  j["rho_A"] = ctx.rho_A();
  j["rho_star"] = ctx.rho_star();
  j["transition_window"] = {ctx.table().k_lo(), ctx.table().k_hi()};
  j["conditions"] = conditions_json(p.cond);
  return j;
}

Json criterion_json(const CriterionResult& r) {
  return {{"id", r.id},       {"title", r.title}, {"applicable", r.applicable},
          {"pass", r.pass},   {"gating", r.gating}, {"detail", r.detail}};
}

CriterionResult check_cocycle(const Problem& p, Rng& rng, int triples) {
  CriterionResult r = make("cocycle", "Z(t,tau) Z(tau,s) = Z(t,s)");
  const TransitionTable& tab = p.ctx->table();
  double lo = window_lo(p), hi = window_hi(p);
  double worst = 0.0, worst_scaled = 0.0;
  for (int q = 0; q < triples; ++q) {
    double t = uniform(rng, lo, hi), tau = uniform(rng, lo, hi), s = uniform(rng, lo, hi);
    Mat zts = tab.Z(t, s);
    double err = op_norm(tab.Z(t, tau) * tab.Z(tau, s) - zts);
    worst = std::max(worst, err);
    worst_scaled = std::max(worst_scaled, err / std::max(1.0, op_norm(zts)));
  }
  r.pass = worst <= 1e-6;
  r.detail = {{"triples", triples},
              {"span", {lo, hi}},
              {"intervals", p.cfg.k_hi - p.cfg.k_lo + 1},
              {"max_error", worst},
              {"max_relative_error", worst_scaled},
              {"tolerance", 1e-6}};
  return r;
}

CriterionResult check_transition_residual(const Problem& p, Rng& rng, int points) {
  CriterionResult r = make("transition_residual", "finite-difference derivative of Z(., tau)");
  const LinearSystem& sys = p.ctx->system();
  const Grid& g = sys.grid;
  const TransitionTable& tab = p.ctx->table();
  // Z(t, tau) = Z(t, 0) Z(0, tau) and the equation is linear in Z, so the
  // residual at any tau is the tau = 0 residual times Z(0, tau). The gate is
  // the absolute residual at tau = 0; random tau are reported relative to
  // |Z|, since there Z reaches e^{|t - tau|} and an absolute difference
  // quotient only measures rounding.
  const double d = 1e-3;
  auto residual = [&](double t, double tau, double& rel) {
    Mat fd = (8.0 * (tab.Z(t + d, tau) - tab.Z(t - d, tau)) - (tab.Z(t + 2 * d, tau) - tab.Z(t - 2 * d, tau))) /
             (12.0 * d);
    Mat z = tab.Z(t, tau), zg = tab.Z(g.gamma(t), tau);
    double err = op_norm(fd - (sys.A.at(t) * z + sys.A0.at(t) * zg));
    rel = err / std::max({1.0, op_norm(z), op_norm(zg)});
    return err;
  };
  double lo = window_lo(p), hi = window_hi(p);
  double worst = 0.0, worst_t = 0.0, worst_rel = 0.0;
  for (int q = 0; q < points; ++q) {
    long k = p.cfg.k_lo + static_cast<long>(unit_from_bits(rng()) * (p.cfg.k_hi - p.cfg.k_lo + 1));
    k = std::min(k, p.cfg.k_hi);
    double t = interior_point(rng, g, k, 4.0 * d);
    double tau = uniform(rng, lo, hi), rel = 0.0;
    double err = residual(t, 0.0, rel);
    if (err > worst) {
      worst = err;
      worst_t = t;
    }
    residual(t, tau, rel);
    worst_rel = std::max(worst_rel, rel);
  }
  r.pass = worst <= 1e-4;
  r.detail = {{"points", points},       {"step", d},         {"tau", 0.0},
              {"max_residual", worst},  {"worst_t", worst_t}, {"tolerance", 1e-4},
              {"max_relative_residual_random_tau", worst_rel}};
  return r;
}

CriterionResult check_dichotomy(const Problem& p) {
  CriterionResult r = make("dichotomy", "exponential dichotomy on the window, continuous and discrete");
  r.pass = p.ed1.pass && p.edp.pass;
  r.detail = {{"ed1",
               {{"k_lo", p.ed1.k_lo},
                {"k_hi", p.ed1.k_hi},
                {"samples_per_interval", p.ed1.samples_per_interval},
                {"K", p.ed1.K},
                {"K_auto", p.ed1.K_auto},
                {"worst_ratio", p.ed1.worst_ratio},
                {"worst_ratio_near", p.ed1.worst_ratio_near},
                {"worst_t", p.ed1.worst_t},
                {"worst_s", p.ed1.worst_s},
                {"pass", p.ed1.pass}}},
              {"edp", {{"P_hat", mat_json(p.P_hat)}, {"r", p.r}, {"K_hat", p.edp.K_hat}, {"pass", p.edp.pass}}}};
  if (p.discrete)
    r.detail["discrete"] = {{"P_hat", mat_json(p.discrete->P_hat)}, {"K_hat", p.discrete->K_hat}, {"r", p.discrete->r}};
  return r;
}

CriterionResult check_green_bound(const Problem& p, Rng& rng, int per_axis) {
  CriterionResult r = make("green_bound", "|G(t,s)| <= K rho* e^{-alpha |t-s|}");
  const GreenContext& ctx = *p.ctx;
  double lo = window_lo(p), hi = window_hi(p);
  std::vector<double> ts(static_cast<std::size_t>(per_axis)), ss(static_cast<std::size_t>(per_axis));
  for (auto& t : ts) t = uniform(rng, lo, hi);
  for (auto& s : ss) s = uniform(rng, lo, hi);
  double K = ctx.dichotomy().K, a = ctx.dichotomy().alpha, rs = ctx.rho_star();
  std::vector<double> row_worst(ts.size(), -std::numeric_limits<double>::infinity());
  long nt = static_cast<long>(ts.size());
  ParallelErrors errs;
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < nt; ++i) {
    errs.run([&] {
      double w = -std::numeric_limits<double>::infinity();
      for (double s : ss) {
        double t = ts[static_cast<std::size_t>(i)];
        double ratio = op_norm(ctx.green(t, s)) / (K * rs * std::exp(-a * std::fabs(t - s)));
        w = std::max(w, ratio);
      }
      row_worst[static_cast<std::size_t>(i)] = w;
    });
  }
  errs.rethrow();
  double worst = *std::max_element(row_worst.begin(), row_worst.end());
  r.pass = worst <= 1.0 + 1e-6;
  r.detail = {{"pairs", per_axis * per_axis}, {"K", K}, {"alpha", a}, {"rho_star", rs},
              {"max_ratio_to_bound", worst}, {"allowance", 1e-6}};
  return r;
}

CriterionResult check_bounded(const Problem& p, Rng& rng, int samples) {
  CriterionResult r = make("bounded_solution", "bounded solution for g = (1, ..., 1)");
  const GreenContext& ctx = *p.ctx;
  const LinearSystem& sys = ctx.system();
  int n = sys.dim();
  std::vector<Expr> ones(static_cast<std::size_t>(n), Expr::constant(1.0));
  ForcingTerm g = ForcingTerm::with_bound(ones, CertifiedBound::analytic(std::sqrt(static_cast<double>(n))));
  TruncationPolicy pol = TruncationPolicy::standard(ctx, g.g_sup.value);
  const double d = 1e-3;
  std::vector<double> ts, centers;
  const Grid& grid = sys.grid;
  for (int q = 0; q < samples; ++q) {
    double t = uniform(rng, kTimeLo, kTimeHi);
    long k = grid.interval_index(t);
    t = std::clamp(t, grid.t(k) + 2.0 * d, grid.t(k + 1) - 2.0 * d);
    centers.push_back(t);
    ts.insert(ts.end(), {t, t - d, t + d, grid.gamma(t)});
  }
  LipschitzBoundReport lip = lipschitz_bound_check(ctx, g, ts, pol);
  double worst_bar = 0.0, worst_res = 0.0;
  for (std::size_t q = 0; q < centers.size(); ++q) {
    const auto& v = lip.values;
    std::size_t b = 4 * q;
    double t = centers[q];
    Vec deriv = (v[b + 2].value - v[b + 1].value) / (2.0 * d);
    Vec rhs = sys.A.at(t) * v[b].value + sys.A0.at(t) * v[b + 3].value + g.at(t);
    worst_res = std::max(worst_res, (deriv - rhs).norm());
    worst_bar = std::max(worst_bar, v[b].error_bar);
  }
  r.pass = lip.pass && worst_bar <= 1e-4 && worst_res <= 1e-3;
  r.detail = {{"samples", samples},
              {"horizon", pol.horizon_T},
              {"tail_bound", pol.tail_bound},
              {"sup_bound", lip.bound},
              {"max_norm", lip.max_norm},
              {"violations", lip.violations.size()},
              {"max_error_bar", worst_bar},
              {"error_bar_limit", 1e-4},
              {"max_equation_residual", worst_res},
              {"residual_limit", 1e-3}};
  return r;
}

CriterionResult check_proximity(const Problem& p, const ConjugacyEngine& engine, Rng& rng, int times,
                                int per_time) {
  CriterionResult r = make("proximity", "|H(t,xi) - xi| and |L(t,xi) - xi| within 2 mu K rho* / alpha");
  int n = p.ctx->system().dim();
  double bound = engine.proximity_bound();
  double worst_H = 0.0, worst_L = 0.0, worst_margin = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (int q = 0; q < times; ++q) {
    double t = uniform(rng, kTimeLo, kTimeHi);
    std::vector<Vec> pts;
    for (int m = 0; m < per_time; ++m) pts.push_back(random_in_ball(rng, n, 2.0));
    std::vector<double> dh(pts.size()), dl(pts.size()), bh(pts.size()), bl(pts.size());
    long np = static_cast<long>(pts.size());
    ParallelErrors errs;
#pragma omp parallel for schedule(dynamic, 1)
    for (long m = 0; m < np; ++m) {
      errs.run([&] {
        std::size_t u = static_cast<std::size_t>(m);
        MapValue h = engine.H(t, pts[u]);
        VarthetaValue l = engine.L(t, pts[u]);
        dh[u] = (h.value - pts[u]).norm();
        bh[u] = h.error_bar;
        dl[u] = (l.value - pts[u]).norm();
        bl[u] = l.error_bar;
      });
    }
    errs.rethrow();
    for (std::size_t u = 0; u < pts.size(); ++u) {
      worst_H = std::max(worst_H, dh[u]);
      worst_L = std::max(worst_L, dl[u]);
      worst_margin = std::min({worst_margin, bound + bh[u] - dh[u], bound + bl[u] - dl[u]});
      if (!(dh[u] <= bound + bh[u] && dl[u] <= bound + bl[u])) ok = false;
    }
  }
  r.pass = ok;
  r.detail = {{"samples", times * per_time}, {"bound", bound}, {"max_H_distance", worst_H},
              {"max_L_distance", worst_L}, {"min_margin", worst_margin}};
  return r;
}

std::vector<CriterionResult> check_inverse(const Problem& p, const ConjugacyEngine& engine, Rng& rng,
                                           bool tolerance_ratio, int times, int per_time) {
  CriterionResult r = make("inverse", "L(t, H(t, xi)) = xi and H(t, L(t, xi)) = xi");
  int n = p.ctx->system().dim();
  std::vector<double> ts;
  std::vector<std::vector<Vec>> pts;
  for (int q = 0; q < times; ++q) {
    ts.push_back(uniform(rng, kTimeLo, kTimeHi));
    std::vector<Vec> v;
    for (int m = 0; m < per_time; ++m) v.push_back(random_in_ball(rng, n, 2.0));
    pts.push_back(std::move(v));
  }
  auto run = [&](const ConjugacyEngine& eng, double& max_res, double& max_bar, std::size_t& failed) {
    max_res = max_bar = 0.0;
    failed = 0;
    for (std::size_t q = 0; q < ts.size(); ++q) {
      InverseReport rep = certify_inverse(eng, pts[q], ts[q]);
      for (const auto& c : rep.cases) {
        max_res = std::max({max_res, c.residual_LH, c.residual_HL});
        max_bar = std::max({max_bar, c.bar_LH, c.bar_HL});
        if (!c.pass) ++failed;
      }
    }
  };
  double res = 0, bar = 0;
  std::size_t failed = 0;
  run(engine, res, bar, failed);
  r.pass = failed == 0;
  r.detail = {{"times", ts}, {"points_per_time", per_time}, {"picard_tol", engine.options().picard_tol},
              {"max_residual", res}, {"max_error_bar", bar}, {"failed_cases", failed}, {"bar_factor", 10.0}};
  std::vector<CriterionResult> out{r};
  if (tolerance_ratio) {
    CriterionResult t = make("inverse_tolerance", "inverse residuals shrink when picard_tol is halved");
    if (!p.cfg.f.present()) {
      out.push_back(inapplicable("inverse_tolerance", t.title.c_str(), "no nonlinearity: both maps are the identity"));
      return out;
    }
    EngineOptions half = engine.options();
    half.picard_tol *= 0.5;
    ConjugacyEngine eng2(p.ctx, p.cfg.f, half);
    double res2 = 0, bar2 = 0;
    std::size_t failed2 = 0;
    run(eng2, res2, bar2, failed2);
    double ratio = res > 0.0 ? res2 / res : std::numeric_limits<double>::quiet_NaN();
    t.pass = ratio >= 0.2 && ratio <= 0.9;
    t.detail = {{"picard_tol", engine.options().picard_tol}, {"picard_tol_halved", half.picard_tol},
                {"max_residual", res}, {"max_residual_halved", res2}, {"ratio", ratio},
                {"accepted_range", {0.2, 0.9}}, {"failed_cases_halved", failed2}};
    out.push_back(t);
  }
  return out;
}

CriterionResult check_solution_mapping(const Problem& p, const ConjugacyEngine& engine, Rng& rng, int samples) {
  CriterionResult r = make("solution_mapping", "H along a nonlinear solution solves the linear equation");
  int n = p.ctx->system().dim();
  Vec xi = random_in_ball(rng, n, 1.0);
  std::vector<double> ts;
  for (int q = 0; q < samples; ++q) ts.push_back(uniform(rng, kTimeLo + 0.01, kTimeHi));
  std::sort(ts.begin(), ts.end());
  MappingReport rep = certify_solution_mapping(engine, 0.0, xi, ts);
  double worst_prox = 0.0;
  for (const auto& c : rep.cases) worst_prox = std::max(worst_prox, c.proximity);
  r.pass = rep.pass;
  r.detail = {{"tau", 0.0}, {"xi", vec_json(xi)}, {"samples", samples}, {"fd_step", rep.step},
              {"max_residual", rep.max_residual}, {"residual_limit", rep.residual_tol},
              {"max_proximity", worst_prox}, {"proximity_bound", rep.bound}};
  return r;
}

CriterionResult check_envelope(const Problem& p, Rng& rng, int pairs) {
  CriterionResult r = make("continuity_envelope", "|x(t) - x'(t)| <= |xi - xi'| e^{p |t - tau|}");
  if (!p.cond.p1 || !p.cond.p2)
    return inapplicable("continuity_envelope", r.title.c_str(), "v >= 1 or v~ >= 1: no exponent available");
  const LinearSystem& sys = p.ctx->system();
  int n = sys.dim();
  std::vector<std::pair<Vec, Vec>> fwd, bwd;
  for (int q = 0; q < pairs; ++q) {
    Vec a = random_in_ball(rng, n, 2.0);
    Vec dir = random_in_ball(rng, n, 1.0);
    if (dir.norm() == 0.0) dir(0) = 1.0;
    double dist = uniform(rng, 1e-3, 0.5);
    Vec b = a + dist * dir / dir.norm();
    (q % 2 == 0 ? fwd : bwd).push_back({a, b});
  }
  EnvelopeReport up = continuity_envelope_check(sys, p.cfg.f, p.cond, fwd, 0.0, 5.0);
  EnvelopeReport down = continuity_envelope_check(sys, p.cfg.f, p.cond, bwd, 0.0, -5.0);
  Json margins = Json::array();
  double worst = std::numeric_limits<double>::infinity();
  for (const auto* rep : {&up, &down})
    for (const auto& c : rep->cases) {
      margins.push_back(c.worst_margin);
      worst = std::min(worst, c.worst_margin);
    }
  r.pass = up.pass && down.pass;
  r.detail = {{"exponent_name", up.exponent_name}, {"exponent", up.exponent}, {"tau", 0.0},
              {"t", {5.0, -5.0}}, {"pairs", pairs}, {"margins", margins}, {"min_margin", worst}};
  return r;
}

CriterionResult check_holder(const Problem& p, const ConjugacyEngine& engine, std::uint64_t seed) {
  const char* title = "Holder bounds for H and L";
  if (!p.cond.flags.alfa) return inapplicable("holder", title, "alpha is not below min(p1, p2)");
  CriterionResult r = make("holder", title);
  Rng rng(seed);
  int n = p.ctx->system().dim();
  std::vector<Vec> bases;
  for (int q = 0; q < 3; ++q) bases.push_back(random_in_ball(rng, n, 1.0));
  double t = uniform(rng, kTimeLo, kTimeHi);
  HolderReport rep = holder_certify(engine, t, {1e-2, 1e-3, 1e-4}, bases, rng());
  Json samples = Json::array();
  for (const auto& s : rep.empirical)
    samples.push_back({{"map", std::string(1, s.map)}, {"base", s.base}, {"delta", s.delta},
                       {"d_output", s.d_output}, {"bound", s.bound}, {"implied_exponent", s.implied_exponent},
                       {"pass", s.pass}});
  r.pass = rep.pass;
  r.detail = {{"t", t}, {"exponent_H", rep.exponent_H}, {"coeff_H", rep.coeff_H}, {"exponent_L", rep.exponent_L},
              {"coeff_L", rep.coeff_L}, {"samples", samples}};
  return r;
}

CriterionResult check_limit_case(const Problem& p, Rng& rng) {
  const char* title = "limit-case constants";
  const GreenContext& ctx = *p.ctx;
  const LinearSystem& sys = ctx.system();
  Variant v = p.cond.in.variant;
  double a = ctx.dichotomy().alpha, th = sys.grid.theta();
  if (v == Variant::General) return inapplicable("limit_case", title, "A0 and A are both present");
  CriterionResult r = make("limit_case", title);
  r.detail["variant"] = variant_name(v);
  if (v == Variant::OdeLimit) {
    double lo = window_lo(p), hi = window_hi(p), worst = 0.0;
    for (int q = 0; q < 50; ++q) {
      double t = uniform(rng, lo, hi);
      double s = std::clamp(t + uniform(rng, -5.0, 5.0), lo, hi);
      Mat z = ctx.table().Z(t, s), phi = fundamental_matrix(sys, t, s);
      worst = std::max(worst, op_norm(z - phi) / std::max(1.0, op_norm(phi)));
    }
    double expect = ctx.rho_A() * std::exp(a * th);
    double rel = std::fabs(p.cond.rho_star - expect) / expect;
    r.pass = worst <= 1e-6 && rel <= 1e-12;
    r.detail.update({{"max_relative_Z_minus_Phi", worst}, {"rho_A", ctx.rho_A()}, {"rho_star", p.cond.rho_star},
                     {"expected_rho_star", expect}});
  } else {
    double expect = std::exp(a * th);
    double rel = std::fabs(p.cond.rho_star - expect) / expect;
    r.pass = rel <= 1e-12;
    r.detail.update({{"rho_star", p.cond.rho_star}, {"expected_rho_star", expect}});
  }
  return r;
}

std::vector<CriterionResult> run_suite(const Problem& p, const SuiteOptions& opt) {
  std::vector<CriterionResult> out;
  std::uint64_t seed = p.cfg.seed;
  auto rng_for = [&](std::uint64_t idx) { return Rng(seed ^ (0x9E3779B97F4A7C15ULL * (idx + 1))); };
  {
    Rng g = rng_for(1);
    out.push_back(check_cocycle(p, g));
  }
  {
    Rng g = rng_for(2);
    out.push_back(check_transition_residual(p, g));
  }
  out.push_back(check_dichotomy(p));
  {
    Rng g = rng_for(4);
    out.push_back(check_green_bound(p, g));
  }
  {
    Rng g = rng_for(5);
    out.push_back(check_bounded(p, g));
  }
  if (p.cfg.f.present() && !p.cond.flags.fpt) {
    const char* why = "contraction factor is not below 1";
    out.push_back(inapplicable("proximity", "conjugacy maps", why));
    CriterionResult bad = make("conjugacy", "conjugacy maps need the contraction condition");
    bad.pass = false;
    bad.detail["gamma_star"] = p.cond.gamma_star;
    out.push_back(bad);
  } else {
    ConjugacyEngine engine(p.ctx, p.cfg.f, p.cfg.engine);
    Rng g6 = rng_for(6), g7 = rng_for(7), g8 = rng_for(8);
    out.push_back(check_proximity(p, engine, g6));
    for (auto& c : check_inverse(p, engine, g7, opt.include_tolerance_ratio)) {
      // The halving check measures the Picard stopping rule rather than a
      // theorem bound, so certify-all reports it without gating on it.
      if (c.id == "inverse_tolerance") c.gating = false;
      out.push_back(std::move(c));
    }
    out.push_back(check_solution_mapping(p, engine, g8));
    out.push_back(check_holder(p, engine, seed ^ 0x5851F42D4C957F2DULL));
  }
  {
    Rng g = rng_for(9);
    out.push_back(check_envelope(p, g));
  }
  {
    Rng g = rng_for(11);
    out.push_back(check_limit_case(p, g));
  }
  return out;
}

}  // namespace depcag
