#include "depcag/bounded.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace depcag {

ForcingTerm ForcingTerm::sampled(std::vector<Expr> g, double t_lo, double t_hi, int samples,
                                 double inflation) {
  for (const Expr& e : g)
    if (e.max_x_index() > 0 || e.max_y_index() > 0)
      throw DomainError("a forcing term may only depend on t");
  ForcingTerm f;
  f.g_sup = bound_norm(g, {{"t", {t_lo, t_hi}}}, samples, inflation);
  f.g = std::move(g);
  return f;
}

ForcingTerm ForcingTerm::with_bound(std::vector<Expr> g, CertifiedBound g_sup) {
  for (const Expr& e : g)
    if (e.max_x_index() > 0 || e.max_y_index() > 0)
      throw DomainError("a forcing term may only depend on t");
  return {std::move(g), g_sup};
}

ForcingTerm ForcingTerm::zero(int n) {
  return {std::vector<Expr>(static_cast<std::size_t>(n)), CertifiedBound::analytic(0.0)};
}

bool ForcingTerm::is_zero() const {
  return std::all_of(g.begin(), g.end(), [](const Expr& e) { return e.is_zero_literal(); });
}

Vec ForcingTerm::at(double t) const {
  Vec v(dim());
  for (int i = 0; i < dim(); ++i) v(i) = g[static_cast<std::size_t>(i)].eval(t, nullptr, nullptr);
  return v;
}

double default_horizon(const GreenContext& ctx) {
  return std::max(20.0 / ctx.dichotomy().alpha, 10.0 * ctx.system().grid.theta());
}

TruncationPolicy TruncationPolicy::standard(const GreenContext& ctx, double g_sup, double horizon) {
  TruncationPolicy p;
  p.horizon_T = horizon > 0.0 ? horizon : default_horizon(ctx);
  double alpha = ctx.dichotomy().alpha;
  p.tail_bound =
      2.0 * ctx.dichotomy().K * ctx.rho_star() * g_sup * std::exp(-alpha * p.horizon_T) / alpha;
  return p;
}

std::vector<BoundedValue> bounded_solution_many(const GreenContext& ctx, const ForcingTerm& g,
                                                const std::vector<double>& ts,
                                                const TruncationPolicy& policy, Exec exec) {
  std::vector<BoundedValue> out;
  if (ts.empty()) return out;
  int n = ctx.system().dim();
  if (g.dim() != n) throw DomainError("forcing dimension does not match the system");
  if (!(policy.horizon_T > 0.0)) throw DomainError("truncation horizon must be positive");
  double T = policy.horizon_T;
  double lo = *std::min_element(ts.begin(), ts.end()) - T;
  double hi = *std::max_element(ts.begin(), ts.end()) + T;
  if (!ctx.table().covers(lo, hi))
    throw DomainError("window insufficient: transition data does not cover [t - T, t + T]");
  auto run = [&](double step) {
    SweepPlan plan(ctx, lo, hi, ts, step, false, exec);
    const auto& st = plan.stage_times();
    long ns = static_cast<long>(st.size());
    Mat G(n, ns);
    ParallelErrors errs;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (long q = 0; q < ns; ++q) errs.run([&] { G.col(q) = g.at(st[static_cast<std::size_t>(q)]); });
    errs.rethrow();
    return plan.apply(G, exec);
  };
  double h = ctx.system().step();
  Mat fine = run(h);
  Mat coarse = run(2.0 * h);
  for (std::size_t e = 0; e < ts.size(); ++e) {
    BoundedValue v;
    v.t = ts[e];
    v.value = fine.col(static_cast<Eigen::Index>(e));
    v.horizon = T;
    v.tail = policy.tail_bound;
    v.quadrature = (fine.col(static_cast<Eigen::Index>(e)) - coarse.col(static_cast<Eigen::Index>(e))).norm();
    v.error_bar = v.tail + v.quadrature;
    out.push_back(std::move(v));
  }
  return out;
}

BoundedValue bounded_solution(const GreenContext& ctx, const ForcingTerm& g, double t,
                              const TruncationPolicy& policy, Exec exec) {
  return bounded_solution_many(ctx, g, {t}, policy, exec).front();
}

LipschitzBoundReport lipschitz_bound_check(const GreenContext& ctx, const ForcingTerm& g,
                                           const std::vector<double>& sample_ts,
                                           const TruncationPolicy& policy, Exec exec) {
  LipschitzBoundReport rep;
  const DichotomySpec& d = ctx.dichotomy();
  rep.bound = 2.0 * d.K * ctx.rho_star() * g.g_sup.value / d.alpha;
  rep.values = bounded_solution_many(ctx, g, sample_ts, policy, exec);
  for (std::size_t q = 0; q < rep.values.size(); ++q) {
    double nv = rep.values[q].value.norm();
    if (nv > rep.max_norm || q == 0) {
      rep.max_norm = nv;
      rep.worst_t = rep.values[q].t;
    }
    if (!(nv <= rep.bound + rep.values[q].error_bar)) rep.violations.push_back(q);
  }
  rep.pass = rep.violations.empty();
  return rep;
}

namespace {

/// RK4 for Y' = A Y + F(s) from `from` (Y = 0) to `to`, inside one interval.
Mat forced_local(const LinearSystem& sys, const std::function<Mat(double)>& forcing, double from,
                 double to, long cols) {
  Mat y = Mat::Zero(sys.dim(), cols);
  int ns = steps_for(from, to, sys.step());
  if (ns == 0) return y;
  double hh = (to - from) / ns;
  for (int k = 0; k < ns; ++k) {
    double s0 = from + k * hh, sm = s0 + 0.5 * hh, s1 = k + 1 == ns ? to : s0 + hh;
    Mat a0 = sys.A.at(s0), am = sys.A.at(sm), a1 = sys.A.at(s1);
    Mat f0 = forcing(s0), fm = forcing(sm), f1 = forcing(s1);
    Mat k1 = a0 * y + f0;
    Mat k2 = am * (y + 0.5 * hh * k1) + fm;
    Mat k3 = am * (y + 0.5 * hh * k2) + fm;
    Mat k4 = a1 * (y + hh * k3) + f1;
    y += (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace

Vec variation_of_parameters(const LinearSystem& sys, const ForcingTerm& g, double tau,
                            const Vec& xi, double t) {
  const Grid& grid = sys.grid;
  int n = sys.dim();
  if (g.dim() != n || xi.size() != n) throw DomainError("dimension mismatch");
  long i = grid.interval_index(tau);
  if (!(tau < grid.zeta(i)))
    throw DomainError("variation of parameters needs tau in [t_i, zeta_i); integrate directly");
  if (t < tau) throw DomainError("variation of parameters is evaluated for t >= tau");
  long j = grid.interval_index(t);
  TransitionTable tab(sys, i, j, Exec::Serial);
  auto gf = [&](double s) { return Mat(g.at(s)); };
  // y_r solves y' = A y + g with y(zeta_r) = 0; the displayed integrals are
  // -y_r(t_r) on the left piece and y_r(t_{r+1}) on the right piece.
  auto local = [&](long r, double target) {
    return Vec(forced_local(sys, gf, grid.zeta(r), target, 1));
  };
  Vec x = tab.Z(t, tau) * (xi - local(i, tau));
  for (long r = i + 1; r <= j; ++r) x -= tab.Z(t, grid.t(r)) * local(r, grid.t(r));
  for (long r = i; r <= j - 1; ++r) x += tab.Z(t, grid.t(r + 1)) * local(r, grid.t(r + 1));
  x += local(j, t);
  return x;
}

namespace {

SeriesTail summarize(std::vector<double> norms) {
  SeriesTail s;
  s.term_norms = std::move(norms);
  for (double v : s.term_norms) s.partial_sum += v;
  s.last_term = s.term_norms.back();
  std::vector<std::pair<double, double>> pts;
  for (std::size_t m = 0; m < s.term_norms.size(); ++m)
    if (s.term_norms[m] > 1e-300) pts.push_back({static_cast<double>(m), std::log(s.term_norms[m])});
  if (pts.size() >= 2) {
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= pts.size();
    my /= pts.size();
    double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
    s.ratio = std::exp(sxy / sxx);
  }
  s.pass = s.last_term < 1e-8 || s.ratio < 1.0 - 1e-9;
  return s;
}

}  // namespace

SeriesTailReport series_tail_report(const GreenContext& ctx, long k, int terms) {
  if (terms < 10) throw DomainError("series_tail_report needs terms >= 10");
  const LinearSystem& sys = ctx.system();
  const Grid& grid = sys.grid;
  int n = sys.dim();
  TransitionTable tab(sys, k - terms, k + terms);
  const Mat& P = ctx.dichotomy().P;
  Mat Q = Mat::Identity(n, n) - P;
  Mat id = Mat::Identity(n, n);
  auto unit = [&](double) { return id; };
  auto left = [&](long r) { return Mat(-forced_local(sys, unit, grid.zeta(r), grid.t(r), n)); };
  auto right = [&](long r) { return forced_local(sys, unit, grid.zeta(r), grid.t(r + 1), n); };
  std::vector<double> sl, sr, ul, ur;
  for (int m = 0; m < terms; ++m) {
    long r = k - m;
    sl.push_back(op_norm(P * tab.Z_0_tk(r) * left(r)));
    sr.push_back(op_norm(P * tab.Z_0_tk(r + 1) * right(r)));
    long q = k + m;
    ul.push_back(op_norm(Q * tab.Z_0_tk(q) * left(q)));
    ur.push_back(op_norm(Q * tab.Z_0_tk(q + 1) * right(q)));
  }
  SeriesTailReport rep;
  rep.k = k;
  rep.terms = terms;
  rep.stable_left = summarize(std::move(sl));
  rep.stable_right = summarize(std::move(sr));
  rep.unstable_left = summarize(std::move(ul));
  rep.unstable_right = summarize(std::move(ur));
  rep.pass = rep.stable_left.pass && rep.stable_right.pass && rep.unstable_left.pass &&
             rep.unstable_right.pass;
  return rep;
}

}  // namespace depcag
