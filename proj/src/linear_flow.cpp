#include "depcag/linear_flow.hpp"

#include <algorithm>
#include <cmath>

namespace depcag {

MatrixFunction MatrixFunction::constant(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DomainError("matrix must be square and non-empty");
  MatrixFunction f;
  f.n_ = static_cast<int>(m.rows());
  f.constant_ = true;
  f.value_ = m;
  return f;
}

MatrixFunction MatrixFunction::from_exprs(int n, std::vector<Expr> entries) {
  if (n < 1 || static_cast<int>(entries.size()) != n * n)
    throw DomainError("matrix needs n*n entries");
  MatrixFunction f;
  f.n_ = n;
  f.constant_ = true;
  for (const auto& e : entries) {
    if (e.max_x_index() > 0 || e.max_y_index() > 0)
      throw DomainError("matrix entry '" + e.print() + "' may only depend on t");
    if (e.uses_t()) f.constant_ = false;
  }
  f.entries_ = std::move(entries);
  f.value_ = Mat::Zero(n, n);
  if (f.constant_)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f.value_(i, j) = f.entries_[i * n + j].eval(0.0, nullptr, nullptr);
  return f;
}

void MatrixFunction::eval_into(double t, Mat& out) const {
  if (constant_) {
    out = value_;
    return;
  }
  out.resize(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) out(i, j) = entries_[i * n_ + j].eval(t, nullptr, nullptr);
}

Mat MatrixFunction::at(double t) const {
  Mat m;
  eval_into(t, m);
  return m;
}

std::vector<std::string> MatrixFunction::entry_text() const {
  std::vector<std::string> out;
  if (!entries_.empty()) {
    for (const auto& e : entries_) out.push_back(e.print());
    return out;
  }
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) out.push_back(Expr::constant(value_(i, j)).print());
  return out;
}

CertifiedBound MatrixFunction::sampled_bound(double t_lo, double t_hi, int samples,
                                             double inflation) const {
  if (!entries_.empty()) return bound_matrix_norm(entries_, n_, t_lo, t_hi, samples, inflation);
  std::vector<Expr> es;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) es.push_back(Expr::constant(value_(i, j)));
  return bound_matrix_norm(es, n_, t_lo, t_hi, samples, inflation);
}

LinearSystem::LinearSystem(Grid g, MatrixFunction a, MatrixFunction a0, CertifiedBound m,
                           CertifiedBound m0)
    : grid(std::move(g)), A(std::move(a)), A0(std::move(a0)), M(m), M0(m0) {
  if (A.dim() < 1 || A.dim() != A0.dim()) throw DomainError("A and A0 must have the same size");
}

double LinearSystem::step() const { return std::min(grid.theta() / 200.0, 1e-2); }

int steps_for(double a, double b, double h) {
  double len = std::fabs(b - a);
  if (len == 0.0) return 0;
  return std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
}

namespace {

void require_same_interval(const LinearSystem& sys, double t, double tau, const char* what) {
  double lo = std::min(t, tau), hi = std::max(t, tau);
  long i = sys.grid.interval_index(lo);
  if (hi > sys.grid.t(i + 1))
    throw DomainError(std::string(what) + ": t and tau must lie in one grid interval");
}

/// X' = A X on [s, t] without crossing a breakpoint.
void phi_segment(const LinearSystem& sys, double s, double t, Mat& x) {
  int n = steps_for(s, t, sys.step());
  if (n == 0) return;
  double h = (t - s) / n;
  Mat a0, am, a1, k1, k2, k3, k4;
  sys.A.eval_into(s, a0);
  for (int i = 0; i < n; ++i) {
    double u = s + i * h;
    sys.A.eval_into(u + 0.5 * h, am);
    sys.A.eval_into(i + 1 == n ? t : u + h, a1);
    k1.noalias() = a0 * x;
    k2.noalias() = am * (x + 0.5 * h * k1);
    k3.noalias() = am * (x + 0.5 * h * k2);
    k4.noalias() = a1 * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    a0 = a1;
  }
}

/// E(t, tau) with E' = A E + A0, one interval.
Mat e_integrate(const LinearSystem& sys, double t, double tau) {
  int dim = sys.dim();
  Mat e = Mat::Identity(dim, dim);
  int n = steps_for(tau, t, sys.step());
  if (n == 0) return e;
  double h = (t - tau) / n;
  Mat a0, am, a1, b0, bm, b1, k1, k2, k3, k4;
  sys.A.eval_into(tau, a0);
  sys.A0.eval_into(tau, b0);
  for (int i = 0; i < n; ++i) {
    double u = tau + i * h;
    double um = u + 0.5 * h, u1 = i + 1 == n ? t : u + h;
    sys.A.eval_into(um, am);
    sys.A0.eval_into(um, bm);
    sys.A.eval_into(u1, a1);
    sys.A0.eval_into(u1, b1);
    k1.noalias() = a0 * e;
    k1 += b0;
    k2.noalias() = am * (e + 0.5 * h * k1);
    k2 += bm;
    k3.noalias() = am * (e + 0.5 * h * k2);
    k3 += bm;
    k4.noalias() = a1 * (e + h * k3);
    k4 += b1;
    e += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    a0 = a1;
    b0 = b1;
  }
  if (!e.allFinite()) throw Error("E-matrix integration produced non-finite values");
  return e;
}

/// Composite Simpson of |Q(s)| over [a, b].
double norm_integral(const MatrixFunction& q, double a, double b, double h) {
  if (b <= a) return 0.0;
  if (q.is_constant()) return op_norm(q.constant_value()) * (b - a);
  int n = steps_for(a, b, h);
  if (n % 2) ++n;
  double dh = (b - a) / n, sum = 0.0;
  Mat m;
  for (int i = 0; i <= n; ++i) {
    q.eval_into(i == n ? b : a + i * dh, m);
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * op_norm(m);
  }
  return sum * dh / 3.0;
}

}  // namespace

Mat fundamental_matrix(const LinearSystem& sys, double t, double s) {
  Mat x = Mat::Identity(sys.dim(), sys.dim());
  if (t == s) return x;
  std::vector<double> pts{s};
  auto inner = sys.grid.breakpoints_between(std::min(s, t), std::max(s, t));
  if (t > s) pts.insert(pts.end(), inner.begin(), inner.end());
  else pts.insert(pts.end(), inner.rbegin(), inner.rend());
  pts.push_back(t);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) phi_segment(sys, pts[i], pts[i + 1], x);
  if (!x.allFinite()) throw Error("fundamental matrix integration produced non-finite values");
  return x;
}

Mat j_matrix(const LinearSystem& sys, double t, double tau) {
  require_same_interval(sys, t, tau, "j_matrix");
  int dim = sys.dim();
  // W(s) = Phi(tau, s) solves W' = -W A(s); J' = W A0(s).
  Mat w = Mat::Identity(dim, dim), j = Mat::Identity(dim, dim);
  int n = steps_for(tau, t, sys.step());
  if (n == 0) return j;
  double h = (t - tau) / n;
  Mat a0, am, a1, b0, bm, b1;
  sys.A.eval_into(tau, a0);
  sys.A0.eval_into(tau, b0);
  for (int i = 0; i < n; ++i) {
    double u = tau + i * h;
    double um = u + 0.5 * h, u1 = i + 1 == n ? t : u + h;
    sys.A.eval_into(um, am);
    sys.A0.eval_into(um, bm);
    sys.A.eval_into(u1, a1);
    sys.A0.eval_into(u1, b1);
    Mat kw1 = -w * a0, kj1 = w * b0;
    Mat w2 = w + 0.5 * h * kw1;
    Mat kw2 = -w2 * am, kj2 = w2 * bm;
    Mat w3 = w + 0.5 * h * kw2;
    Mat kw3 = -w3 * am, kj3 = w3 * bm;
    Mat w4 = w + h * kw3;
    Mat kw4 = -w4 * a1, kj4 = w4 * b1;
    w += (h / 6.0) * (kw1 + 2.0 * kw2 + 2.0 * kw3 + kw4);
    j += (h / 6.0) * (kj1 + 2.0 * kj2 + 2.0 * kj3 + kj4);
    a0 = a1;
    b0 = b1;
  }
  return j;
}

Mat e_matrix(const LinearSystem& sys, double t, double tau) {
  require_same_interval(sys, t, tau, "e_matrix");
  return e_integrate(sys, t, tau);
}

ConditionCReport check_condition_c(const LinearSystem& sys, long k_lo, long k_hi) {
  if (k_lo > k_hi) throw DomainError("check_condition_c: empty window");
  ConditionCReport rep;
  rep.k_lo = k_lo;
  rep.k_hi = k_hi;
  rep.rho_A = 0.0;
  double h = sys.step();
  for (long k = k_lo; k <= k_hi; ++k) {
    double tk = sys.grid.t(k), zk = sys.grid.zeta(k), tk1 = sys.grid.t(k + 1);
    ConditionCInterval row{k, std::exp(norm_integral(sys.A, tk, zk, h)),
                           std::exp(norm_integral(sys.A, zk, tk1, h)),
                           std::exp(norm_integral(sys.A0, tk, zk, h)),
                           std::exp(norm_integral(sys.A0, zk, tk1, h))};
    rep.nu_plus = std::max(rep.nu_plus, row.rho_plus_A * std::log(row.rho_plus_A0));
    rep.nu_minus = std::max(rep.nu_minus, row.rho_minus_A * std::log(row.rho_minus_A0));
    rep.rho_A = std::max(rep.rho_A, row.rho_plus_A * row.rho_minus_A);
    rep.per_interval.push_back(row);
  }
  rep.satisfied = rep.nu_plus < 1.0 && rep.nu_minus < 1.0;
  return rep;
}

Mat checked_inverse(const Mat& m, long interval) {
  Eigen::PartialPivLU<Mat> lu(m);
  double rc = lu.rcond();
  if (!(rc >= 1e-12)) throw SingularError("E-factor is numerically singular; condition (C) fails", interval);
  return lu.inverse();
}

Mat transition_matrix(const LinearSystem& sys, double t, double tau) {
  int dim = sys.dim();
  if (t == tau) return Mat::Identity(dim, dim);
  const Grid& g = sys.grid;
  long i = g.interval_index(tau);
  long j = g.interval_index(t);
  if (i == j) return e_integrate(sys, t, g.zeta(i)) * checked_inverse(e_integrate(sys, tau, g.zeta(i)), i);
  Mat z;
  if (t > tau) {
    z = e_integrate(sys, g.t(i + 1), g.zeta(i)) * checked_inverse(e_integrate(sys, tau, g.zeta(i)), i);
    for (long k = i + 1; k < j; ++k)
      z = e_integrate(sys, g.t(k + 1), g.zeta(k)) *
          checked_inverse(e_integrate(sys, g.t(k), g.zeta(k)), k) * z;
    z = e_integrate(sys, t, g.zeta(j)) * checked_inverse(e_integrate(sys, g.t(j), g.zeta(j)), j) * z;
  } else {
    z = e_integrate(sys, g.t(i), g.zeta(i)) * checked_inverse(e_integrate(sys, tau, g.zeta(i)), i);
    for (long k = i - 1; k > j; --k)
      z = e_integrate(sys, g.t(k), g.zeta(k)) *
          checked_inverse(e_integrate(sys, g.t(k + 1), g.zeta(k)), k) * z;
    z = e_integrate(sys, t, g.zeta(j)) *
        checked_inverse(e_integrate(sys, g.t(j + 1), g.zeta(j)), j) * z;
  }
  return z;
}

TransitionTable::TransitionTable(const LinearSystem& sys, long k_lo, long k_hi, Exec exec)
    : sys_(&sys) {
  const Grid& g = sys.grid;
  k0_ = g.interval_index(0.0);
  k_lo_ = std::min(k_lo, k0_);
  k_hi_ = std::max(k_hi, k0_);
  if (g.is_window() && (k_lo_ < g.first_index() || k_hi_ > g.last_index()))
    throw DomainError("transition table exceeds the explicit grid window");
  std::size_t cnt = static_cast<std::size_t>(k_hi_ - k_lo_ + 1);
  for (auto* v : {&e_left_, &e_right_, &e_left_inv_, &e_right_inv_, &step_, &inv_step_})
    v->resize(cnt);
  long n = static_cast<long>(cnt);
  // a SingularError inside the parallel loop is captured and rethrown
  std::vector<long> bad(cnt, 0);
  ParallelErrors errs;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (long m = 0; m < n; ++m) {
    errs.run([&] {
      long k = k_lo_ + m;
      double z = g.zeta(k);
      e_left_[m] = e_integrate(sys, g.t(k), z);
      e_right_[m] = e_integrate(sys, g.t(k + 1), z);
      Eigen::PartialPivLU<Mat> l(e_left_[m]), r(e_right_[m]);
      if (!(l.rcond() >= 1e-12) || !(r.rcond() >= 1e-12)) {
        bad[m] = 1;
        return;
      }
      e_left_inv_[m] = l.inverse();
      e_right_inv_[m] = r.inverse();
      step_[m] = e_right_[m] * e_left_inv_[m];
      inv_step_[m] = e_left_[m] * e_right_inv_[m];
    });
  }
  errs.rethrow();
  for (long m = 0; m < n; ++m)
    if (bad[m]) throw SingularError("E-factor is numerically singular; condition (C) fails", k_lo_ + m);

  e0_inv_ = checked_inverse(e_integrate(sys, 0.0, g.zeta(k0_)), k0_);
  Mat e0 = e_integrate(sys, 0.0, g.zeta(k0_));
  z_tk_0_.resize(cnt + 1);
  z_0_tk_.resize(cnt + 1);
  auto slot = [&](long k) { return static_cast<std::size_t>(k - k_lo_); };
  z_tk_0_[slot(k0_)] = E_left(k0_) * e0_inv_;
  z_0_tk_[slot(k0_)] = e0 * E_left_inv(k0_);
  z_tk_0_[slot(k0_ + 1)] = E_right(k0_) * e0_inv_;
  z_0_tk_[slot(k0_ + 1)] = e0 * E_right_inv(k0_);
  for (long k = k0_ + 2; k <= k_hi_ + 1; ++k) {
    z_tk_0_[slot(k)] = step(k - 1) * z_tk_0_[slot(k - 1)];
    z_0_tk_[slot(k)] = z_0_tk_[slot(k - 1)] * inv_step(k - 1);
  }
  for (long k = k0_ - 1; k >= k_lo_; --k) {
    z_tk_0_[slot(k)] = inv_step(k) * z_tk_0_[slot(k + 1)];
    z_0_tk_[slot(k)] = z_0_tk_[slot(k + 1)] * step(k);
  }
}

const Mat& TransitionTable::at(const std::vector<Mat>& v, long k) const {
  if (k < k_lo_ || k > k_hi_)
    throw DomainError("interval " + std::to_string(k) + " outside transition table [" +
                      std::to_string(k_lo_) + ", " + std::to_string(k_hi_) + "]");
  return v[static_cast<std::size_t>(k - k_lo_)];
}

bool TransitionTable::covers(double a, double b) const {
  const Grid& g = sys_->grid;
  return a >= g.t(k_lo_) && b <= g.t(k_hi_ + 1);
}

long TransitionTable::local_index(double t) const {
  const Grid& g = sys_->grid;
  if (t == g.t(k_hi_ + 1)) return k_hi_ + 1;
  long k = g.interval_index(t);
  if (k < k_lo_ || k > k_hi_)
    throw DomainError("time " + std::to_string(t) + " outside transition table");
  return k;
}

Mat TransitionTable::E_local(double t, long k) const {
  const Grid& g = sys_->grid;
  if (t < g.t(k) || t > g.t(k + 1)) throw DomainError("E_local: t outside interval");
  double z = g.zeta(k);
  if (t == g.t(k)) return E_left(k);
  if (t == g.t(k + 1)) return E_right(k);
  return e_integrate(*sys_, t, z);
}

const Mat& TransitionTable::Z_tk_0(long k) const {
  if (k < k_lo_ || k > k_hi_ + 1) throw DomainError("Z_tk_0: index outside table");
  return z_tk_0_[static_cast<std::size_t>(k - k_lo_)];
}

const Mat& TransitionTable::Z_0_tk(long k) const {
  if (k < k_lo_ || k > k_hi_ + 1) throw DomainError("Z_0_tk: index outside table");
  return z_0_tk_[static_cast<std::size_t>(k - k_lo_)];
}

Mat TransitionTable::Z_t_0(double t) const {
  long k = local_index(t);
  if (k == k_hi_ + 1) return Z_tk_0(k);
  // Z(t, 0) = Z(t, t_k) Z(t_k, 0) = E(t, zeta_k) E(t_k, zeta_k)^{-1} Z(t_k, 0)
  return E_local(t, k) * E_left_inv(k) * Z_tk_0(k);
}

Mat TransitionTable::Z_0_t(double t) const {
  long k = local_index(t);
  if (k == k_hi_ + 1) return Z_0_tk(k);
  return Z_0_tk(k) * E_left(k) * checked_inverse(E_local(t, k), k);
}

Mat TransitionTable::Z(double t, double tau) const {
  int dim = sys_->dim();
  if (t == tau) return Mat::Identity(dim, dim);
  long i = local_index(tau), j = local_index(t);
  // right end of the table belongs to interval k_hi in closure
  if (i == k_hi_ + 1) i = k_hi_;
  if (j == k_hi_ + 1) j = k_hi_;
  Mat e_tau_inv = checked_inverse(E_local(tau, i), i);
  if (i == j) return E_local(t, i) * e_tau_inv;
  Mat z;
  if (t > tau) {
    z = E_right(i) * e_tau_inv;
    for (long k = i + 1; k < j; ++k) z = step(k) * z;
    return E_local(t, j) * E_left_inv(j) * z;
  }
  z = E_left(i) * e_tau_inv;
  for (long k = i - 1; k > j; --k) z = inv_step(k) * z;
  return E_local(t, j) * E_right_inv(j) * z;
}

}  // namespace depcag
