#include "depcag/commands.hpp"

#include <cstdio>

namespace depcag {

namespace {

Json envelope(const RunConfig& cfg, const std::string& command) {
  Json j;
  j["command"] = command;
  j["config_hash"] = cfg.hash;
  j["seed"] = cfg.seed;
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  return j;
}

std::string render(const Json& j) { return j.dump(2) + "\n"; }

Vec require_xi(const CommandOptions& opt, int n) {
  if (!opt.xi) throw DomainError("--xi is required");
  const auto& v = *opt.xi;
  if (static_cast<int>(v.size()) != n)
    throw DomainError("--xi needs " + std::to_string(n) + " comma-separated values");
  return Eigen::Map<const Vec>(v.data(), n);
}

Json map_value_json(const MapValue& m) {
  return {{"value", vec_json(m.value)}, {"error_bar", m.error_bar}, {"tail", m.tail}, {"quadrature", m.quadrature}};
}

CommandOutput cmd_check(const RunConfig& cfg) {
  Problem p = build_problem(cfg, 0.0, 0.0);
  Json j = envelope(cfg, "check");
  j["constants"] = constants_json(p);
  j["condition_c"] = condition_c_json(p.ctx->condition_c());
  j["theorem_conditions"] = conditions_json(p.cond);
  bool pass = p.ctx->condition_c().satisfied && p.cond.all_pass();
  j["pass"] = pass;
  return {pass ? 0 : 1, render(j)};
}

CommandOutput cmd_dichotomy(const RunConfig& cfg) {
  Problem p = build_problem(cfg, 0.0, 0.0);
  CriterionResult r = check_dichotomy(p);
  Json j = envelope(cfg, "dichotomy");
  j["constants"] = constants_json(p);
  j["ed1"] = r.detail["ed1"];
  j["edp"] = r.detail["edp"];
  if (r.detail.contains("discrete")) j["discrete"] = r.detail["discrete"];
  j["pass"] = r.pass;
  return {r.pass ? 0 : 1, render(j)};
}

CommandOutput cmd_solve(const RunConfig& cfg, const CommandOptions& opt) {
  const LinearSystem& sys = *cfg.system;
  if (!opt.t) throw DomainError("--t is required");
  Vec xi = require_xi(opt, sys.dim());
  double step = cfg.engine.traj_step;
  Trajectory traj = integrate_depcag(sys, cfg.f, opt.tau, xi, *opt.t, step);
  return {0, trajectory_csv(traj)};
}

CommandOutput cmd_bounded(const RunConfig& cfg, const CommandOptions& opt) {
  int n = cfg.system->dim();
  if (static_cast<int>(opt.g.size()) != n)
    throw DomainError("--g needs one expression per component (" + std::to_string(n) + ")");
  std::vector<Expr> g;
  for (const auto& s : opt.g) g.push_back(Expr::parse(s));
  double t = opt.t.value_or(0.0);
  Problem p = build_problem(cfg, t, t);
  TruncationPolicy probe = TruncationPolicy::standard(*p.ctx, 1.0);
  double T = probe.horizon_T;
  ForcingTerm forcing = ForcingTerm::sampled(g, t - T, t + T);
  TruncationPolicy pol = TruncationPolicy::standard(*p.ctx, forcing.g_sup.value);
  BoundedValue v = bounded_solution(*p.ctx, forcing, t, pol);
  Json j = envelope(cfg, "bounded");
  j["constants"] = constants_json(p);
  j["t"] = t;
  j["value"] = vec_json(v.value);
  j["error_bar"] = v.error_bar;
  j["horizon"] = v.horizon;
  j["tail"] = v.tail;
  j["quadrature"] = v.quadrature;
  j["g_sup"] = {{"value", forcing.g_sup.value}, {"method", forcing.g_sup.describe()}};
  j["sup_bound"] = 2.0 * p.ctx->dichotomy().K * p.ctx->rho_star() * forcing.g_sup.value / p.ctx->dichotomy().alpha;
  j["dichotomy_certified"] = p.ed1.pass;
  j["pass"] = p.ed1.pass;
  return {p.ed1.pass ? 0 : 1, render(j)};
}

CommandOutput cmd_conjugacy(const RunConfig& cfg, const CommandOptions& opt) {
  const std::string& c = opt.conj_cmd;
  double t = opt.t.value_or(c == "map-check" ? opt.tau + 5.0 : 0.0);
  double lo = c == "map-check" ? std::min(opt.tau, t) : t, hi = c == "map-check" ? std::max(opt.tau, t) : t;
  Problem p = build_problem(cfg, lo, hi);
  if (!p.ed1.pass) throw InapplicableError("the dichotomy is not certified on the window; run `dichotomy`");
  ConjugacyEngine engine(p.ctx, cfg.f, cfg.engine);
  int n = p.ctx->system().dim();
  Json j = envelope(cfg, "conjugacy");
  j["cmd"] = c;
  j["constants"] = constants_json(p);
  j["engine"] = {{"horizon", engine.horizon()},
                 {"mesh_step", engine.mesh_step()},
                 {"picard_tol", engine.options().picard_tol},
                 {"proximity_bound", engine.proximity_bound()},
                 {"chi_tail", engine.chi_tail()},
                 {"vartheta_tail", engine.vartheta_tail()}};
  bool pass = true;
  if (c == "H" || c == "L") {
    Vec xi = require_xi(opt, n);
    j["t"] = t;
    j["xi"] = vec_json(xi);
    if (c == "H") {
      j["result"] = map_value_json(engine.H(t, xi));
    } else {
      VarthetaValue v = engine.L(t, xi);
      Json r = map_value_json(v);
      r["iterations"] = v.iterations;
      r["increments"] = v.increments;
      r["contraction"] = v.contraction;
      r["interpolation"] = v.interpolation;
      r["roundoff"] = v.roundoff;
      j["result"] = r;
    }
  } else if (c == "inverse") {
    Rng rng(cfg.seed);
    std::vector<Vec> pts;
    for (int q = 0; q < 20; ++q) pts.push_back(random_in_ball(rng, n, 2.0));
    InverseReport rep = certify_inverse(engine, pts, t);
    Json cases = Json::array();
    for (const auto& cs : rep.cases)
      cases.push_back({{"xi", vec_json(cs.xi)}, {"residual_LH", cs.residual_LH}, {"bar_LH", cs.bar_LH},
                       {"residual_HL", cs.residual_HL}, {"bar_HL", cs.bar_HL}, {"pass", cs.pass}});
    j["t"] = t;
    j["cases"] = cases;
    j["max_residual"] = rep.max_residual;
    pass = rep.pass;
  } else if (c == "holder") {
    CriterionResult r = check_holder(p, engine, cfg.seed);
    j["result"] = criterion_json(r);
    pass = r.pass && r.applicable;
  } else if (c == "map-check") {
    Vec xi = require_xi(opt, n);
    Rng rng(cfg.seed);
    std::vector<double> ts;
    for (int q = 0; q < 50; ++q) ts.push_back(uniform(rng, lo, hi));
    std::sort(ts.begin(), ts.end());
    MappingReport rep = certify_solution_mapping(engine, opt.tau, xi, ts);
    Json cases = Json::array();
    for (const auto& cs : rep.cases)
      cases.push_back({{"t", cs.t}, {"x", vec_json(cs.x)}, {"h", vec_json(cs.h)}, {"residual", cs.residual},
                       {"proximity", cs.proximity}, {"error_bar", cs.error_bar}, {"pass", cs.pass}});
    j["tau"] = opt.tau;
    j["xi"] = vec_json(xi);
    j["fd_step"] = rep.step;
    j["residual_limit"] = rep.residual_tol;
    j["cases"] = cases;
    j["max_residual"] = rep.max_residual;
    pass = rep.pass;
  } else {
    throw DomainError("unknown conjugacy --cmd '" + c + "' (H, L, inverse, holder, map-check)");
  }
  j["pass"] = pass;
  return {pass ? 0 : 1, render(j)};
}

CommandOutput cmd_certify_all(const RunConfig& cfg) {
  Problem p = build_problem(cfg, 0.0, 5.0);
  std::vector<CriterionResult> results = run_suite(p);
  Json j = envelope(cfg, "certify-all");
  j["constants"] = constants_json(p);
  Json list = Json::array();
  bool pass = true;
  for (const auto& r : results) {
    list.push_back(criterion_json(r));
    if (r.gating && !r.pass) pass = false;
  }
  j["criteria"] = list;
  j["pass"] = pass;
  return {pass ? 0 : 1, render(j)};
}

}  // namespace

std::vector<std::string> command_names() {
  return {"check", "dichotomy", "solve", "bounded", "conjugacy", "certify-all"};
}

RunConfig with_seed(RunConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.canonical["seed"] = seed;
  cfg.hash = sha256_hex(cfg.canonical.dump());
  return cfg;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  for (int i = 1; i <= traj.dim(); ++i) out += ",x_" + std::to_string(i);
  out += "\r\n";
  char buf[32];
  for (const auto& [t, x] : traj.samples()) {
    std::snprintf(buf, sizeof buf, "%.17g", t);
    out += buf;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", x(i));
      out += buf;
    }
    out += "\r\n";
  }
  return out;
}

CommandOutput run_command(const RunConfig& cfg, const CommandOptions& opt) {
  const std::string& c = opt.command;
  if (c == "check") return cmd_check(cfg);
  if (c == "dichotomy") return cmd_dichotomy(cfg);
  if (c == "solve") return cmd_solve(cfg, opt);
  if (c == "bounded") return cmd_bounded(cfg, opt);
  if (c == "conjugacy") return cmd_conjugacy(cfg, opt);
  if (c == "certify-all") return cmd_certify_all(cfg);
  throw DomainError("unknown command '" + c + "'");
}

}  // namespace depcag
