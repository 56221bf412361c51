#include "depcag/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace depcag {

Nonlinearity Nonlinearity::sampled(std::vector<Expr> f, int n, double t_lo, double t_hi,
                                   double radius, int samples, double inflation) {
  if (static_cast<int>(f.size()) != n) throw DomainError("nonlinearity needs one expression per component");
  for (const Expr& e : f)
    if (e.max_x_index() > n || e.max_y_index() > n)
      throw DomainError("nonlinearity refers to a component beyond the system dimension");
  Ranges ranges{{"t", {t_lo, t_hi}}};
  for (int i = 1; i <= n; ++i) {
    ranges["x" + std::to_string(i)] = {-radius, radius};
    ranges["y" + std::to_string(i)] = {-radius, radius};
  }
  Nonlinearity out;
  out.mu = bound_norm(f, ranges, samples, inflation);
  out.ell1 = lipschitz_estimate(f, Block::X, ranges, samples, inflation);
  out.ell2 = lipschitz_estimate(f, Block::Y, ranges, samples, inflation);
  out.f = std::move(f);
  return out;
}

void Nonlinearity::eval(double t, const double* x, const double* y, double* out) const {
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].eval(t, x, y);
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::General: return "general";
    case Variant::OdeLimit: return "ode-limit";
    case Variant::PurePca: return "pure-pca";
  }
  return "?";
}

double expm1_ratio(double x) { return x == 0.0 ? 1.0 : std::expm1(x) / x; }

TheoremConditions evaluate_conditions(const ConditionInputs& in) {
  for (double v : {in.M, in.M0, in.mu, in.ell1, in.ell2})
    if (!(v >= 0.0)) throw DomainError("bounds must be non-negative");
  if (!(in.theta > 0.0 && in.alpha > 0.0 && in.K >= 1.0 && in.rho_A >= 1.0))
    throw DomainError("theta, alpha must be positive and K, rho(A) at least 1");
  TheoremConditions c;
  c.in = in;
  double th = in.theta;
  double rho_A = in.variant == Variant::PurePca ? 1.0 : in.rho_A;
  c.in.rho_A = rho_A;
  c.rho_star = rho_A * std::exp(in.alpha * th);
  c.eta1 = in.M + in.ell1;
  c.eta2 = in.M0 + in.ell2;
  c.F1_theta = expm1_ratio(c.eta1 * th);
  c.F0_theta = expm1_ratio(in.M * th);
  if (in.variant == Variant::PurePca) {
    // the A == 0 constants: v~0 with F~1(theta) = F1 at M = 0, and u~0
    c.F1_theta = expm1_ratio(in.ell1 * th);
    c.v = c.F1_theta * c.eta2 * th;
    c.v_tilde = c.eta2 * th;
    if (c.v < 1.0) c.p1 = in.ell1 + c.eta2 * std::exp(in.ell1 * th) / (1.0 - c.v);
    if (c.v_tilde < 1.0) c.p2 = in.M0 / (1.0 - c.v_tilde);
  } else {
    c.v = c.F1_theta * c.eta2 * th;
    c.v_tilde = c.F0_theta * in.M0 * th;
    if (c.v < 1.0) c.p1 = c.eta1 + c.eta2 * std::exp(c.eta1 * th) / (1.0 - c.v);
    if (c.v_tilde < 1.0) c.p2 = in.M + in.M0 * std::exp(in.M * th) / (1.0 - c.v_tilde);
  }
  c.fpt_lhs = 2.0 * (in.ell1 + in.ell2) * in.K * c.rho_star;
  c.gamma_star = c.fpt_lhs / in.alpha;
  c.flags.fpt = c.fpt_lhs < in.alpha;
  c.flags.schema0 = c.v < 1.0;
  c.flags.schema0B = c.v_tilde < 1.0;
  if (c.p1 && c.p2) {
    c.alpha_upper = std::min(*c.p1, *c.p2);
    c.flags.alfa = in.alpha < *c.alpha_upper;
  }
  return c;
}

Variant detect_variant(const LinearSystem& sys) {
  if (sys.A.is_zero()) return Variant::PurePca;
  if (sys.A0.is_zero()) return Variant::OdeLimit;
  return Variant::General;
}

TheoremConditions evaluate_conditions(const GreenContext& ctx, const Nonlinearity& f) {
  const LinearSystem& sys = ctx.system();
  ConditionInputs in;
  in.variant = detect_variant(sys);
  in.M = sys.M.value;
  in.M0 = sys.M0.value;
  if (f.present()) {
    in.mu = f.mu.value;
    in.ell1 = f.ell1.value;
    in.ell2 = f.ell2.value;
  }
  in.theta = sys.grid.theta();
  in.K = ctx.dichotomy().K;
  in.alpha = ctx.dichotomy().alpha;
  in.rho_A = ctx.rho_A();
  return evaluate_conditions(in);
}

Vec depcag_rhs(const LinearSystem& sys, const Nonlinearity& f, double t, const Vec& x,
               const Vec& y) {
  Vec out = sys.A.at(t) * x + sys.A0.at(t) * y;
  if (f.present()) {
    Vec fv(x.size());
    f.eval(t, x.data(), y.data(), fv.data());
    out += fv;
  }
  return out;
}

namespace {

struct Marcher {
  const LinearSystem& sys;
  const Nonlinearity& f;
  double h;
  mutable Mat a_buf, a0_buf;
  mutable Vec f_buf;

  void rhs(double t, const Vec& x, const Vec& c, Vec& out) const {
    const Mat* a = &sys.A.constant_value();
    const Mat* a0 = &sys.A0.constant_value();
    if (!sys.A.is_constant()) {
      sys.A.eval_into(t, a_buf);
      a = &a_buf;
    }
    if (!sys.A0.is_constant()) {
      sys.A0.eval_into(t, a0_buf);
      a0 = &a0_buf;
    }
    out.noalias() = *a * x;
    out.noalias() += *a0 * c;
    if (f.present()) {
      f_buf.resize(x.size());
      f.eval(t, x.data(), c.data(), f_buf.data());
      out += f_buf;
    }
  }

  /// RK4 from (s0, x0) to s1 with frozen value c; appends nodes after the
  /// start when `piece` is given.
  Vec march(double s0, const Vec& x0, double s1, const Vec& c, Trajectory::Piece* piece) const {
    Vec x = x0;
    int ns = steps_for(s0, s1, h);
    if (ns == 0) return x;
    double hh = (s1 - s0) / ns;
    Vec k1(x.size()), k2(x.size()), k3(x.size()), k4(x.size()), tmp(x.size());
    for (int k = 0; k < ns; ++k) {
      double a = s0 + k * hh, b = k + 1 == ns ? s1 : s0 + (k + 1) * hh;
      double d = b - a, m = a + 0.5 * d;
      rhs(a, x, c, k1);
      tmp = x + 0.5 * d * k1;
      rhs(m, tmp, c, k2);
      tmp = x + 0.5 * d * k2;
      rhs(m, tmp, c, k3);
      tmp = x + d * k3;
      rhs(b, tmp, c, k4);
      x += (d / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!x.allFinite()) throw Error("non-finite state at t = " + std::to_string(b));
      if (piece) {
        piece->t.push_back(b);
        piece->x.push_back(x);
        rhs(b, x, c, tmp);
        piece->dx.push_back(tmp);
      }
    }
    return x;
  }

  /// x(zeta_k) for the solution through (s0, x0) on interval k. The fixed
  /// point c = x(zeta_k; c) is iterated with the linear part of its Jacobian
  /// removed, so only the nonlinearity limits the contraction.
  Vec frozen_value(long k, double s0, const Vec& x0) const {
    double zk = sys.grid.zeta(k);
    if (!f.present()) return checked_inverse(e_matrix(sys, s0, zk), k) * x0;
    int n = sys.dim();
    Mat lin = e_matrix(sys, zk, s0) - fundamental_matrix(sys, zk, s0);
    Mat pre = checked_inverse(Mat::Identity(n, n) - lin, k);
    Vec c = x0;
    for (int it = 0; it < 100; ++it) {
      Vec res = march(s0, x0, zk, c, nullptr) - c;
      double gap = res.norm();
      c += pre * res;
      if (gap < 1e-12 * std::max(1.0, c.norm())) return c;
    }
    throw ConvergenceError("frozen-value iteration did not converge on interval " +
                           std::to_string(k) + " (is v < 1?)");
  }

  /// Nodes from s0 to s_end inside interval k, in ascending time order.
  Trajectory::Piece piece(long k, double s0, const Vec& x0, double s_end, const Vec& c) const {
    Trajectory::Piece p;
    p.interval = k;
    p.frozen = c;
    p.t.push_back(s0);
    p.x.push_back(x0);
    p.dx.push_back(depcag_rhs(sys, f, s0, x0, c));
    double zk = sys.grid.zeta(k);
    bool cut = (zk - s0) * (s_end - zk) > 0.0;
    Vec x = x0;
    if (cut) x = march(s0, x, zk, c, &p);
    march(cut ? zk : s0, x, s_end, c, &p);
    if (s_end < s0) {
      std::reverse(p.t.begin(), p.t.end());
      std::reverse(p.x.begin(), p.x.end());
      std::reverse(p.dx.begin(), p.dx.end());
    }
    return p;
  }
};

}  // namespace

Trajectory integrate_span(const LinearSystem& sys, const Nonlinearity& f, double tau, const Vec& xi,
                          double lo, double hi, double step) {
  const Grid& g = sys.grid;
  int n = sys.dim();
  if (xi.size() != n) throw DomainError("initial value has the wrong dimension");
  if (f.present() && f.dim() != n) throw DomainError("nonlinearity has the wrong dimension");
  if (!(lo <= tau && tau <= hi)) throw DomainError("tau must lie in [lo, hi]");
  g.require_covers(lo, hi);
  Marcher mr{sys, f, step > 0.0 ? step : sys.step(), {}, {}, {}};
  Trajectory tr;
  tr.n_ = n;
  tr.lo_ = lo;
  tr.hi_ = hi;
  tr.grid_ = &g;

  long i = g.interval_index(tau);
  if (tau == hi && i > g.interval_index(lo) && g.t(i) == tau) --i;  // keep tau inside a piece
  Vec c = mr.frozen_value(i, tau, xi);
  Trajectory::Piece back = mr.piece(i, tau, xi, std::max(lo, g.t(i)), c);
  Trajectory::Piece fwd = mr.piece(i, tau, xi, std::min(hi, g.t(i + 1)), c);
  Trajectory::Piece start = back;
  start.t.insert(start.t.end(), fwd.t.begin() + 1, fwd.t.end());
  start.x.insert(start.x.end(), fwd.x.begin() + 1, fwd.x.end());
  start.dx.insert(start.dx.end(), fwd.dx.begin() + 1, fwd.dx.end());

  std::vector<Trajectory::Piece> before;
  for (long k = i - 1; g.t(k + 1) > lo; --k) {
    const Trajectory::Piece& right = before.empty() ? start : before.back();
    double s0 = g.t(k + 1);
    const Vec& x0 = right.x.front();
    Vec ck = mr.frozen_value(k, s0, x0);
    before.push_back(mr.piece(k, s0, x0, std::max(lo, g.t(k)), ck));
  }
  std::reverse(before.begin(), before.end());
  tr.pieces_ = std::move(before);
  tr.pieces_.push_back(std::move(start));
  for (long k = i + 1; g.t(k) < hi; ++k) {
    double s0 = g.t(k);
    Vec x0 = tr.pieces_.back().x.back();
    Vec ck = mr.frozen_value(k, s0, x0);
    tr.pieces_.push_back(mr.piece(k, s0, x0, std::min(hi, g.t(k + 1)), ck));
  }
  return tr;
}

Trajectory integrate_depcag(const LinearSystem& sys, const Nonlinearity& f, double tau,
                            const Vec& xi, double t_end, double step) {
  return integrate_span(sys, f, tau, xi, std::min(tau, t_end), std::max(tau, t_end), step);
}

namespace {

const Trajectory::Piece& find_piece(const std::vector<Trajectory::Piece>& pieces, const Grid& g,
                                    double s) {
  long k = g.interval_index(s);
  long m = k - pieces.front().interval;
  m = std::clamp(m, 0L, static_cast<long>(pieces.size()) - 1);
  return pieces[static_cast<std::size_t>(m)];
}

}  // namespace

Vec Trajectory::at(double s) const {
  if (!(s >= lo_ && s <= hi_)) throw DomainError("trajectory queried outside its span");
  const Piece& p = find_piece(pieces_, *grid_, s);
  auto it = std::upper_bound(p.t.begin(), p.t.end(), s);
  if (it == p.t.begin()) return p.x.front();
  if (it == p.t.end()) return p.x.back();
  std::size_t q = static_cast<std::size_t>(it - p.t.begin()) - 1;
  double t0 = p.t[q], t1 = p.t[q + 1], d = t1 - t0;
  if (s == t0) return p.x[q];
  double u = (s - t0) / d;
  double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  return h00 * p.x[q] + h10 * d * p.dx[q] + h01 * p.x[q + 1] + h11 * d * p.dx[q + 1];
}

const Vec& Trajectory::frozen_at(double s) const {
  if (!(s >= lo_ && s <= hi_)) throw DomainError("trajectory queried outside its span");
  return find_piece(pieces_, *grid_, s).frozen;
}

const Vec& Trajectory::frozen(long k) const {
  long m = k - pieces_.front().interval;
  if (m < 0 || m >= static_cast<long>(pieces_.size()))
    throw DomainError("trajectory has no frozen value for interval " + std::to_string(k));
  return pieces_[static_cast<std::size_t>(m)].frozen;
}

std::vector<std::pair<double, Vec>> Trajectory::samples() const {
  std::vector<std::pair<double, Vec>> out;
  for (const Piece& p : pieces_)
    for (std::size_t q = 0; q < p.t.size(); ++q) {
      if (!out.empty() && out.back().first == p.t[q]) continue;
      out.push_back({p.t[q], p.x[q]});
    }
  return out;
}

namespace {

double simpson(const auto& fn, double a, double b, int panels) {
  if (a == b) return 0.0;
  double h = (b - a) / panels, acc = fn(a) + fn(b);
  for (int q = 1; q < panels; ++q) acc += (q % 2 ? 4.0 : 2.0) * fn(a + q * h);
  return acc * h / 3.0;
}

}  // namespace

GronwallResult gronwall_bound(const Expr& eta1, const Expr& eta2, double C, const Grid& grid,
                              double tau, double t) {
  for (const Expr* e : {&eta1, &eta2})
    if (e->max_x_index() > 0 || e->max_y_index() > 0)
      throw DomainError("Gronwall weights may only depend on t");
  if (!(C > 0.0)) throw DomainError("Gronwall constant must be positive");
  if (t < tau) throw DomainError("Gronwall bound needs t >= tau");
  auto e1 = [&](double s) { return eta1.eval(s, nullptr, nullptr); };
  auto e2 = [&](double s) { return eta2.eval(s, nullptr, nullptr); };
  long k_lo = grid.interval_index(tau), k_hi = grid.interval_index(t);
  if (k_hi > k_lo && grid.t(k_hi) == t) --k_hi;
  GronwallResult r;
  double i1 = 0.0, i2 = 0.0;
  for (long k = k_lo; k <= k_hi; ++k) {
    double tk = grid.t(k), zk = grid.zeta(k);
    double wk = simpson([&](double s) { return e2(s) * std::exp(simpson(e1, s, zk, 64)); }, tk, zk, 256);
    r.w = std::max(r.w, wk);
    double a = std::max(tau, tk), b = std::min(t, grid.t(k + 1));
    i1 += simpson(e1, a, b, 512);
    i2 += std::exp(simpson(e1, tk, zk, 256)) * simpson(e2, a, b, 512);
  }
  if (!(r.w < 1.0))
    throw InapplicableError("Gronwall inequality needs w < 1 (w = " + std::to_string(r.w) + ")");
  r.bound = C * std::exp(i1 + i2 / (1.0 - r.w));
  return r;
}

EnvelopeReport continuity_envelope_check(const LinearSystem& sys, const Nonlinearity& f,
                                         const TheoremConditions& cond,
                                         const std::vector<std::pair<Vec, Vec>>& pairs, double tau,
                                         double t) {
  EnvelopeReport rep;
  bool pca = cond.in.variant == Variant::PurePca;
  const std::optional<double>& p = f.present() ? cond.p1 : cond.p2;
  rep.exponent_name = std::string(f.present() ? "p1" : "p2") + (pca ? "~" : "");
  if (!p) throw InapplicableError(rep.exponent_name + " is undefined: its smallness condition fails");
  rep.exponent = *p;
  rep.tau = tau;
  rep.t = t;
  rep.cases.resize(pairs.size());
  long np = static_cast<long>(pairs.size());
  ParallelErrors errs;
#pragma omp parallel for schedule(dynamic, 1)
  for (long q = 0; q < np; ++q) {
    errs.run([&] {
      const auto& [a, b] = pairs[static_cast<std::size_t>(q)];
      EnvelopeCase& ec = rep.cases[static_cast<std::size_t>(q)];
      ec.xi = a;
      ec.xi2 = b;
      ec.distance = (a - b).norm();
      Trajectory ta = integrate_depcag(sys, f, tau, a, t);
      Trajectory tb = integrate_depcag(sys, f, tau, b, t);
      ec.worst_margin = std::numeric_limits<double>::infinity();
      ec.pass = true;
      for (const auto& [s, xa] : ta.samples()) {
        double diff = (xa - tb.at(s)).norm();
        double env = ec.distance * std::exp(rep.exponent * std::fabs(s - tau));
        // both sides equal |xi - xi2| at s = tau, so that point says nothing
        if (s != tau && env - diff < ec.worst_margin) {
          ec.worst_margin = env - diff;
          ec.worst_time = s;
        }
        if (!(diff <= env * (1.0 + 1e-8) + 1e-12)) ec.pass = false;
      }
    });
  }
  errs.rethrow();
  rep.pass = std::all_of(rep.cases.begin(), rep.cases.end(), [](const EnvelopeCase& c) { return c.pass; });
  return rep;
}

}  // namespace depcag
