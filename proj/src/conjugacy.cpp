#include "depcag/conjugacy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace depcag {

namespace {

double default_T(double alpha, double theta, const EngineOptions& opt) {
  return opt.horizon > 0.0 ? opt.horizon : std::max(20.0 / alpha, 10.0 * theta);
}

double default_mesh(double theta, const EngineOptions& opt) {
  return opt.mesh_step > 0.0 ? opt.mesh_step : std::min(theta / 50.0, 0.02);
}

/// Truncating the vartheta fixed-point problem to [t - T, t + T]: the
/// truncated iterates stay within 2E e^{-beta T} of the true ones for every
/// beta in (0, alpha) with q < 1, where q is the contraction factor in the
/// e^{-beta |s - t|}-weighted sup norm.
double truncation_tail(const TheoremConditions& c, double T) {
  double K = c.in.K, a = c.in.alpha, th = c.in.theta, mu = c.in.mu;
  if (mu == 0.0) return 0.0;
  double B = 2.0 * K * c.rho_star * mu / a;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 1; j < 200; ++j) {
    double beta = a * j / 200.0;
    double q = c.gamma_star * std::exp(beta * th) * a * a / (a * a - beta * beta);
    if (!(q < 1.0)) continue;
    double E = (K * c.rho_star * mu / a + 2.0 * q * B * std::exp(beta * th)) / (1.0 - q);
    best = std::min(best, 2.0 * E * std::exp(-beta * T));
  }
  return best;
}

}  // namespace

ConjugacyEngine::ConjugacyEngine(std::shared_ptr<const GreenContext> ctx, Nonlinearity f,
                                 EngineOptions opt, Exec exec)
    : ctx_(std::move(ctx)), f_(std::move(f)), opt_(opt), exec_(exec) {
  if (!ctx_) throw DomainError("engine needs a Green context");
  const LinearSystem& sys = ctx_->system();
  if (f_.present() && f_.dim() != sys.dim()) throw DomainError("nonlinearity has the wrong dimension");
  if (!(opt_.picard_tol > 0.0)) throw DomainError("picard_tol must be positive");
  if (opt_.max_iterations < 1) throw DomainError("max_iterations must be positive");
  cond_ = evaluate_conditions(*ctx_, f_);
  if (f_.present() && !cond_.flags.fpt)
    throw InapplicableError("contraction factor " + std::to_string(cond_.gamma_star) +
                            " is not below 1");
  double alpha = ctx_->dichotomy().alpha, theta = sys.grid.theta();
  T_ = default_T(alpha, theta, opt_);
  mesh_h_ = default_mesh(theta, opt_);
  mesh_half_ = static_cast<int>(std::ceil(T_ / mesh_h_ - 1e-9));
  quad_h_ = opt_.quad_step > 0.0 ? opt_.quad_step : sys.step();
  traj_h_ = opt_.traj_step > 0.0 ? opt_.traj_step : sys.step();
  chi_tail_ = 2.0 * ctx_->dichotomy().K * ctx_->rho_star() * cond_.in.mu * std::exp(-alpha * T_) / alpha;
  theta_tail_ = truncation_tail(cond_, T_);
}

double ConjugacyEngine::proximity_bound() const {
  return 2.0 * cond_.in.mu * ctx_->dichotomy().K * ctx_->rho_star() / ctx_->dichotomy().alpha;
}

std::pair<double, double> ConjugacyEngine::required_span(const LinearSystem& sys, double alpha,
                                                         const EngineOptions& opt, double t_lo,
                                                         double t_hi) {
  double theta = sys.grid.theta();
  double T = default_T(alpha, theta, opt), mh = default_mesh(theta, opt);
  double reach = std::ceil(T / mh - 1e-9) * mh;
  return {t_lo - std::max(T, reach), t_hi + std::max(T, reach)};
}

std::shared_ptr<const SweepPlan> ConjugacyEngine::plan(PlanKind kind, double t) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto key = std::make_pair(static_cast<int>(kind), t);
  auto it = plans_.find(key);
  if (it != plans_.end()) return it->second;
  std::shared_ptr<const SweepPlan> p;
  double reach = mesh_half_ * mesh_h_;
  switch (kind) {
    case PlanKind::ChiFine:
      p = std::make_shared<SweepPlan>(*ctx_, t - T_, t + T_, std::vector<double>{t}, quad_h_, false, exec_);
      break;
    case PlanKind::ChiCoarse:
      p = std::make_shared<SweepPlan>(*ctx_, t - T_, t + T_, std::vector<double>{t}, 2.0 * quad_h_,
                                      false, exec_);
      break;
    case PlanKind::ThetaFine: {
      std::vector<double> nodes;
      for (int k = -mesh_half_; k <= mesh_half_; ++k) nodes.push_back(t + k * mesh_h_);
      p = std::make_shared<SweepPlan>(*ctx_, t - reach, t + reach, std::move(nodes), quad_h_, true, exec_);
      break;
    }
    case PlanKind::ThetaCoarse:
      p = std::make_shared<SweepPlan>(*ctx_, t - reach, t + reach, std::vector<double>{t},
                                      2.0 * quad_h_, true, exec_);
      break;
  }
  plans_.emplace(key, p);
  return p;
}

Mat ConjugacyEngine::chi_forcing(const SweepPlan& plan, const Trajectory& traj) const {
  int n = ctx_->system().dim();
  const auto& st = plan.stage_times();
  const auto& si = plan.stage_intervals();
  long ns = static_cast<long>(st.size());
  Mat G(n, ns);
  ParallelErrors errs;
#pragma omp parallel for schedule(static) if (exec_ == Exec::Parallel)
  for (long q = 0; q < ns; ++q) {
    errs.run([&] {
      std::size_t u = static_cast<std::size_t>(q);
      Vec x = traj.at(st[u]);
      f_.eval(st[u], x.data(), traj.frozen(si[u]).data(), G.col(q).data());
    });
  }
  errs.rethrow();
  return -G;
}

MapValue ConjugacyEngine::chi(double tau, const Vec& xi, double t) const {
  int n = ctx_->system().dim();
  if (xi.size() != n) throw DomainError("state has the wrong dimension");
  MapValue out;
  out.value = Vec::Zero(n);
  if (!f_.present()) return out;
  const LinearSystem& sys = ctx_->system();
  double a = std::min(t - T_, tau), b = std::max(t + T_, tau);
  Trajectory fine = integrate_span(sys, f_, tau, xi, a, b, traj_h_);
  Trajectory coarse = integrate_span(sys, f_, tau, xi, a, b, 2.0 * traj_h_);
  auto pf = plan(PlanKind::ChiFine, t);
  auto pc = plan(PlanKind::ChiCoarse, t);
  out.value = pf->apply(chi_forcing(*pf, fine), exec_).col(0);
  Vec vc = pc->apply(chi_forcing(*pc, coarse), exec_).col(0);
  out.quadrature = (out.value - vc).norm();
  out.tail = chi_tail_;
  out.error_bar = out.tail + out.quadrature;
  return out;
}

MapValue ConjugacyEngine::H(double t, const Vec& xi) const {
  MapValue v = chi(t, xi, t);
  v.value += xi;
  return v;
}

std::vector<MapValue> ConjugacyEngine::chi_along(const std::vector<double>& ts,
                                                 const Trajectory& fine,
                                                 const Trajectory& coarse) const {
  int n = ctx_->system().dim();
  std::vector<MapValue> out(ts.size());
  if (ts.empty()) return out;
  if (!f_.present()) {
    for (auto& v : out) v.value = Vec::Zero(n);
    return out;
  }
  double lo = *std::min_element(ts.begin(), ts.end()) - T_;
  double hi = *std::max_element(ts.begin(), ts.end()) + T_;
  SweepPlan pf(*ctx_, lo, hi, ts, quad_h_, false, exec_);
  SweepPlan pc(*ctx_, lo, hi, ts, 2.0 * quad_h_, false, exec_);
  Mat vf = pf.apply(chi_forcing(pf, fine), exec_);
  Mat vc = pc.apply(chi_forcing(pc, coarse), exec_);
  for (std::size_t e = 0; e < ts.size(); ++e) {
    auto c = static_cast<Eigen::Index>(e);
    out[e].value = vf.col(c);
    out[e].quadrature = (vf.col(c) - vc.col(c)).norm();
    out[e].tail = chi_tail_;
    out[e].error_bar = out[e].tail + out[e].quadrature;
  }
  return out;
}

VarthetaValue ConjugacyEngine::vartheta(double tau, const Vec& nu, double t) const {
  const LinearSystem& sys = ctx_->system();
  const Grid& grid = sys.grid;
  int n = sys.dim();
  if (nu.size() != n) throw DomainError("state has the wrong dimension");
  VarthetaValue out;
  out.value = Vec::Zero(n);
  if (!f_.present()) {
    out.iterations = 1;
    out.increments = {0.0};
    return out;
  }
  auto pf = plan(PlanKind::ThetaFine, t);
  auto pc = plan(PlanKind::ThetaCoarse, t);
  const TransitionTable& tab = ctx_->table();
  Vec y0 = tab.Z_0_t(tau) * nu;  // y(s) = Z(s, 0) y0
  double lo = pf->a(), h = mesh_h_;
  int nodes = 2 * mesh_half_ + 1;
  double gs = cond_.gamma_star;

  auto interp_into = [&](const Mat& phi, double s, Vec& out) {
    double u = (std::clamp(s, pf->a(), pf->b()) - lo) / h;
    int k = std::clamp(static_cast<int>(std::floor(u)), 0, nodes - 2);
    double w = u - k;
    out.noalias() = (1.0 - w) * phi.col(k) + w * phi.col(k + 1);
  };
  // linear part at stages and at each interval's frozen point
  struct Side {
    Mat ys;
    long k_lo;
    std::vector<double> zeta;
    Mat yz;
  };
  auto prepare = [&](const SweepPlan& p) {
    Side sd;
    long ns = static_cast<long>(p.stage_count());
    sd.ys.resize(n, ns);
    for (long q = 0; q < ns; ++q) sd.ys.col(q) = p.stage_Z0()[static_cast<std::size_t>(q)] * y0;
    sd.k_lo = p.k_lo();
    long nk = p.k_hi() - p.k_lo() + 1;
    sd.yz.resize(n, nk);
    for (long m = 0; m < nk; ++m) {
      double z = grid.zeta(p.k_lo() + m);
      sd.zeta.push_back(z);
      sd.yz.col(m) = tab.Z_t_0(z) * y0;
    }
    return sd;
  };
  Side sf = prepare(*pf), sc = prepare(*pc);
  auto forcing = [&](const SweepPlan& p, const Side& sd, const Mat& phi) {
    long nk = static_cast<long>(sd.zeta.size());
    Mat frozen(n, nk);
    Vec buf(n);
    for (long m = 0; m < nk; ++m) {
      interp_into(phi, sd.zeta[static_cast<std::size_t>(m)], buf);
      frozen.col(m) = sd.yz.col(m) + buf;
    }
    const auto& st = p.stage_times();
    const auto& si = p.stage_intervals();
    long ns = static_cast<long>(st.size());
    Mat G(n, ns);
    ParallelErrors errs;
#pragma omp parallel if (exec_ == Exec::Parallel)
    {
      Vec x(n);
#pragma omp for schedule(static)
      for (long q = 0; q < ns; ++q) {
        errs.run([&] {
          std::size_t u = static_cast<std::size_t>(q);
          interp_into(phi, st[u], x);
          x += sd.ys.col(q);
          f_.eval(st[u], x.data(), frozen.col(si[u] - sd.k_lo).data(), G.col(q).data());
        });
      }
    }
    errs.rethrow();
    return G;
  };

  // Convergence is measured in the weighted sup norm sup_k w_k |phi_k| with
  // w_k = exp(-beta |s_k - t|). The Picard map contracts there with factor
  // gs * alpha / (alpha - beta) = (1 + gs) / 2, and w = 1 at t itself. The
  // weight keeps rounding noise from far mesh nodes, where Z(s, 0) y0 is
  // huge and phi + y(s) loses every digit of phi, out of the stopping test.
  double beta = ctx_->dichotomy().alpha * (1.0 - gs) / (1.0 + gs);
  double gw = 0.5 * (1.0 + gs);
  std::vector<double> w(static_cast<std::size_t>(nodes));
  for (int k = 0; k < nodes; ++k) w[static_cast<std::size_t>(k)] = std::exp(-beta * h * std::abs(k - mesh_half_));

  // Rounding floor. Where |y(s)| is large, f is evaluated at a point known
  // only to within eps |x(s)|, so a stage's forcing is off by at most
  // min(l eps |x|, 2 mu) and each Picard step carries a weighted error of at
  // most gw / l times the weighted sup of that. The iterates settle into a
  // band of that width instead of converging, so a stalled iteration inside
  // the band is accepted and the floor goes into the error bar.
  double floor_w = 0.0;
  double lip = cond_.in.ell1 + cond_.in.ell2;
  if (lip > 0.0) {
    const auto& st = pf->stage_times();
    const auto& si = pf->stage_intervals();
    double eps2 = 2.0 * std::numeric_limits<double>::epsilon();
    for (std::size_t q = 0; q < st.size(); ++q) {
      double size = sf.ys.col(static_cast<Eigen::Index>(q)).norm() +
                    sf.yz.col(static_cast<Eigen::Index>(si[q] - sf.k_lo)).norm() + proximity_bound();
      double err = std::min(lip * eps2 * size, 2.0 * cond_.in.mu);
      floor_w = std::max(floor_w, std::exp(-beta * (std::abs(st[q] - t) - h)) * err);
    }
    floor_w *= gw / lip;
  }

  Mat phi = Mat::Zero(n, nodes);
  double target = opt_.picard_tol * (1.0 - gw);
  double band = 4.0 * floor_w / (1.0 - gw);
  double best = std::numeric_limits<double>::infinity();
  bool done = false;
  for (int it = 1; it <= opt_.max_iterations; ++it) {
    Mat next = pf->apply(forcing(*pf, sf, phi), exec_);
    double inc = 0.0;
    for (int k = 0; k < nodes; ++k)
      inc = std::max(inc, w[static_cast<std::size_t>(k)] * (next.col(k) - phi.col(k)).norm());
    phi = std::move(next);
    out.increments.push_back(inc);
    out.iterations = it;
    if (inc < target || (inc <= band && inc > 0.5 * best)) {
      done = true;
      break;
    }
    best = std::min(best, inc);
  }
  if (!done) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "vartheta iteration cap reached at t = %.17g: last increment %.3e, target %.3e",
                  t, out.increments.back(), target);
    throw ConvergenceError(buf);
  }
  out.value = phi.col(mesh_half_);
  Vec fine_t = pf->apply(forcing(*pf, sf, phi), exec_).col(mesh_half_);
  Vec coarse_t = pc->apply(forcing(*pc, sc, phi), exec_).col(0);
  double curv = 0.0;
  for (int k = 1; k + 1 < nodes; ++k)
    curv = std::max(curv, w[static_cast<std::size_t>(k)] * std::exp(beta * h) *
                              (phi.col(k + 1) - 2.0 * phi.col(k) + phi.col(k - 1)).norm());
  out.quadrature = (fine_t - coarse_t).norm() / (1.0 - gs);
  out.contraction = out.increments.back() * gw / (1.0 - gw);
  out.roundoff = floor_w / (1.0 - gw);
  out.interpolation = gw * curv / (4.0 * (1.0 - gw));
  out.tail = theta_tail_;
  out.error_bar = out.contraction + out.roundoff + out.tail + out.quadrature + out.interpolation;
  return out;
}

VarthetaValue ConjugacyEngine::L(double t, const Vec& nu) const {
  VarthetaValue v = vartheta(t, nu, t);
  v.value += nu;
  return v;
}

InverseReport certify_inverse(const ConjugacyEngine& engine, const std::vector<Vec>& samples,
                              double t) {
  InverseReport rep;
  rep.t = t;
  rep.cases.resize(samples.size());
  long ns = static_cast<long>(samples.size());
  ParallelErrors errs;
#pragma omp parallel for schedule(dynamic, 1)
  for (long q = 0; q < ns; ++q) {
    errs.run([&] {
      InverseCase& c = rep.cases[static_cast<std::size_t>(q)];
      c.xi = samples[static_cast<std::size_t>(q)];
      MapValue h = engine.H(t, c.xi);
      VarthetaValue lh = engine.L(t, h.value);
      VarthetaValue l = engine.L(t, c.xi);
      MapValue hl = engine.H(t, l.value);
      c.h = h.value;
      c.lh = lh.value;
      c.l = l.value;
      c.hl = hl.value;
      c.residual_LH = (lh.value - c.xi).norm();
      c.bar_LH = h.error_bar + lh.error_bar;
      c.residual_HL = (hl.value - c.xi).norm();
      c.bar_HL = l.error_bar + hl.error_bar;
      c.pass = c.residual_LH <= 10.0 * c.bar_LH && c.residual_HL <= 10.0 * c.bar_HL;
    });
  }
  errs.rethrow();
  rep.pass = true;
  for (const auto& c : rep.cases) {
    rep.max_residual = std::max({rep.max_residual, c.residual_LH, c.residual_HL});
    rep.pass = rep.pass && c.pass;
  }
  return rep;
}

MappingReport certify_solution_mapping(const ConjugacyEngine& engine, double tau, const Vec& xi,
                                       const std::vector<double>& t_samples) {
  const LinearSystem& sys = engine.context().system();
  const Grid& grid = sys.grid;
  MappingReport rep;
  rep.tau = tau;
  rep.xi = xi;
  rep.step = 1e-3;
  rep.bound = engine.proximity_bound();
  if (t_samples.empty()) {
    rep.pass = true;
    return rep;
  }
  double d = rep.step;
  // per sample: stencil offsets (in units of d) and weights for h'(t)
  struct Stencil {
    std::vector<double> off, w;
  };
  std::vector<Stencil> stencils;
  std::vector<double> evals;
  for (double t : t_samples) {
    long i = grid.interval_index(t);
    Stencil s;
    if (t - d >= grid.t(i) && t + d < grid.t(i + 1)) s = {{-1, 1}, {-0.5, 0.5}};
    else if (t + 2 * d < grid.t(i + 1)) s = {{0, 1, 2}, {-1.5, 2.0, -0.5}};
    else s = {{0, -1, -2}, {1.5, -2.0, 0.5}};
    for (double o : s.off) evals.push_back(t + o * d);
    evals.push_back(t);
    evals.push_back(grid.gamma(t));
    stencils.push_back(std::move(s));
  }
  double T = engine.horizon();
  double a = std::min(*std::min_element(evals.begin(), evals.end()) - T, tau);
  double b = std::max(*std::max_element(evals.begin(), evals.end()) + T, tau);
  const Nonlinearity& f = engine.nonlinearity();
  double th = engine.options().traj_step > 0.0 ? engine.options().traj_step : sys.step();
  Trajectory fine = integrate_span(sys, f, tau, xi, a, b, th);
  Trajectory coarse = integrate_span(sys, f, tau, xi, a, b, 2.0 * th);
  std::vector<MapValue> chi = engine.chi_along(evals, fine, coarse);
  std::size_t at = 0;
  for (std::size_t q = 0; q < t_samples.size(); ++q) {
    double t = t_samples[q];
    const Stencil& s = stencils[q];
    Vec deriv = Vec::Zero(sys.dim());
    for (std::size_t m = 0; m < s.off.size(); ++m) {
      double tm = evals[at + m];
      deriv += s.w[m] * (fine.at(tm) + chi[at + m].value);
    }
    deriv /= d;
    at += s.off.size();
    MappingCase c;
    c.t = t;
    c.x = fine.at(t);
    c.h = c.x + chi[at].value;
    Vec hg = fine.at(evals[at + 1]) + chi[at + 1].value;
    c.error_bar = chi[at].error_bar;
    at += 2;
    c.residual = (deriv - sys.A.at(t) * c.h - sys.A0.at(t) * hg).norm();
    c.proximity = (c.h - c.x).norm();
    c.pass = c.residual <= rep.residual_tol && c.proximity <= rep.bound + c.error_bar;
    rep.max_residual = std::max(rep.max_residual, c.residual);
    rep.cases.push_back(std::move(c));
  }
  rep.pass = std::all_of(rep.cases.begin(), rep.cases.end(), [](const MappingCase& c) { return c.pass; });
  return rep;
}

namespace {

Vec random_unit(std::mt19937_64& rng, int n) {
  Vec u(n);
  do {
    for (int i = 0; i < n; ++i) u(i) = 2.0 * unit_from_bits(rng()) - 1.0;
  } while (u.norm() < 1e-3 || u.norm() > 1.0);
  return u / u.norm();
}

}  // namespace

HolderReport holder_certify(const ConjugacyEngine& engine, double t,
                            const std::vector<double>& deltas, const std::vector<Vec>& bases,
                            std::uint64_t seed) {
  const TheoremConditions& c = engine.conditions();
  if (!c.flags.alfa) throw InapplicableError("Holder exponents need alpha < min(p1, p2)");
  for (double d : deltas)
    if (!(d > 0.0 && d < 1.0)) throw DomainError("Holder deltas must lie in (0, 1)");
  const GreenContext& ctx = engine.context();
  double K = ctx.dichotomy().K, a = ctx.dichotomy().alpha, rs = ctx.rho_star();
  double mu = c.in.mu, l1 = c.in.ell1, l2 = c.in.ell2, th = c.in.theta, gs = c.gamma_star;
  double p1 = *c.p1, p2 = *c.p2;
  HolderReport rep;
  rep.t = t;
  rep.exponent_H = a / p1;
  rep.coeff_H = 1.0 + 2.0 * K * rs * (l1 + l2 * std::exp(p1 * th)) / (p1 - a) + 4.0 * mu * K * rs / a;
  rep.exponent_L = a / p2;
  rep.coeff_L =
      1.0 + (2.0 * K * rs * (l1 + l2 * std::exp(p2 * th)) / (p2 - a) + 4.0 * mu * K / a) / (1.0 - gs);
  std::mt19937_64 rng(seed);
  int n = ctx.system().dim();
  struct Job {
    char map;
    std::size_t base;
    double delta;
    Vec other;
  };
  std::vector<Job> jobs;
  for (char m : {'H', 'L'})
    for (std::size_t b = 0; b < bases.size(); ++b)
      for (double d : deltas) jobs.push_back({m, b, d, bases[b] + d * random_unit(rng, n)});
  std::vector<MapValue> baseH(bases.size()), baseL(bases.size());
  long nb = static_cast<long>(bases.size());
  ParallelErrors errs;
#pragma omp parallel for schedule(dynamic, 1)
  for (long b = 0; b < nb; ++b) {
    errs.run([&] {
      baseH[static_cast<std::size_t>(b)] = engine.H(t, bases[static_cast<std::size_t>(b)]);
      baseL[static_cast<std::size_t>(b)] = engine.L(t, bases[static_cast<std::size_t>(b)]);
    });
  }
  errs.rethrow();
  rep.empirical.resize(jobs.size());
  long nj = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long j = 0; j < nj; ++j) {
    errs.run([&] {
      const Job& jb = jobs[static_cast<std::size_t>(j)];
      HolderSample& s = rep.empirical[static_cast<std::size_t>(j)];
      const MapValue& base = jb.map == 'H' ? baseH[jb.base] : baseL[jb.base];
      MapValue other = jb.map == 'H' ? engine.H(t, jb.other) : MapValue(engine.L(t, jb.other));
      s.map = jb.map;
      s.base = jb.base;
      s.delta = jb.delta;
      s.d_output = (base.value - other.value).norm();
      s.bound = jb.map == 'H' ? rep.coeff_H * std::pow(jb.delta, rep.exponent_H)
                              : rep.coeff_L * std::pow(jb.delta, rep.exponent_L);
      s.implied_exponent = s.d_output > 0.0 ? std::log(s.d_output) / std::log(jb.delta)
                                            : std::numeric_limits<double>::quiet_NaN();
      s.pass = s.d_output - (base.error_bar + other.error_bar) <= s.bound;
    });
  }
  errs.rethrow();
  rep.pass = std::all_of(rep.empirical.begin(), rep.empirical.end(),
                         [](const HolderSample& s) { return s.pass; });
  return rep;
}

ContinuityReport uniform_continuity_report(const ConjugacyEngine& engine, double t, double eps,
                                           double horizon_L, const std::vector<Vec>& bases,
                                           std::uint64_t seed) {
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  const TheoremConditions& c = engine.conditions();
  if (!c.p1 || !c.p2) throw InapplicableError("continuity constants need v < 1 and v~ < 1");
  const GreenContext& ctx = engine.context();
  double K = ctx.dichotomy().K, a = ctx.dichotomy().alpha, rs = ctx.rho_star();
  double mu = c.in.mu, l1 = c.in.ell1, l2 = c.in.ell2, th = c.in.theta, gs = c.gamma_star;
  ContinuityReport rep;
  rep.t = t;
  rep.eps = eps;
  rep.horizon_L_min = mu > 0.0 ? std::max(0.0, std::log(8.0 * K * mu * rs / (a * eps)) / a) : 0.0;
  if (horizon_L > 0.0 && horizon_L < rep.horizon_L_min)
    throw DomainError("horizon L is below the admissible minimum " + std::to_string(rep.horizon_L_min));
  double Lh = horizon_L > 0.0 ? horizon_L : rep.horizon_L_min;
  rep.horizon_L = Lh;
  auto D = [&](double p) {
    return K * rs * std::exp(p * Lh) * (1.0 - std::exp(-a * Lh)) * (l1 + l2 * std::exp(p * th)) / a;
  };
  rep.D_H = D(*c.p1);
  rep.D_L = D(*c.p2);
  rep.delta_H = rep.D_H > 0.0 ? eps / (4.0 * rep.D_H) : 1.0;
  rep.delta_L = rep.D_L > 0.0 ? eps * (1.0 - gs) / (4.0 * rep.D_L) : 1.0;
  std::mt19937_64 rng(seed);
  int n = ctx.system().dim();
  rep.pass = true;
  for (const Vec& b : bases) {
    Vec bh = b + 0.999 * rep.delta_H * random_unit(rng, n);
    Vec bl = b + 0.999 * rep.delta_L * random_unit(rng, n);
    MapValue h0 = engine.H(t, b), h1 = engine.H(t, bh);
    VarthetaValue l0 = engine.L(t, b), l1v = engine.L(t, bl);
    // compare the chi and vartheta parts, i.e. the maps minus the identity
    double dh = ((h0.value - b) - (h1.value - bh)).norm();
    double dl = ((l0.value - b) - (l1v.value - bl)).norm();
    rep.worst_H = std::max(rep.worst_H, dh);
    rep.worst_L = std::max(rep.worst_L, dl);
    double slack_h = h0.error_bar + h1.error_bar, slack_l = l0.error_bar + l1v.error_bar;
    if (!(dh - slack_h < eps && dl - slack_l < eps)) rep.pass = false;
    ++rep.checked;
  }
  return rep;
}

}  // namespace depcag
