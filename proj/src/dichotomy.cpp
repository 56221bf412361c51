#include "depcag/dichotomy.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>

namespace depcag {

void check_projection(const Mat& P, const char* what) {
  if (P.rows() != P.cols()) throw DomainError(std::string(what) + " must be square");
  if ((P * P - P).norm() > 1e-10) throw DomainError(std::string(what) + " is not a projection");
}

GreenContext::GreenContext(std::shared_ptr<const LinearSystem> sys, DichotomySpec dicho, long k_lo,
                           long k_hi, Exec exec)
    : sys_(std::move(sys)), dicho_(std::move(dicho)) {
  int n = sys_->dim();
  if (dicho_.P.rows() != n) throw DomainError("projection size does not match the system");
  check_projection(dicho_.P, "P");
  if (!(dicho_.alpha > 0.0)) throw DomainError("alpha must be positive");
  if (!(dicho_.K >= 1.0)) throw DomainError("K must be >= 1");
  table_ = std::make_shared<TransitionTable>(*sys_, k_lo, k_hi, exec);
  cond_c_ = check_condition_c(*sys_, table_->k_lo(), table_->k_hi());
  rho_star_ = cond_c_.rho_A * std::exp(dicho_.alpha * sys_->grid.theta());
  Q_ = Mat::Identity(n, n) - dicho_.P;
}

Mat GreenContext::zp_from(const Mat& z_t0, const Mat& z_0s, bool t_ge_s) const {
  if (t_ge_s) return z_t0 * dicho_.P * z_0s;
  return -(z_t0 * Q_ * z_0s);
}

Mat GreenContext::zp(double t, double s) const {
  return zp_from(table_->Z_t_0(t), table_->Z_0_t(s), t >= s);
}

Mat GreenContext::green(double t, double s) const {
  const Grid& g = sys_->grid;
  long j = g.interval_index(t), r = g.interval_index(s);
  double tr = g.t(r), zr = g.zeta(r), tr1 = g.t(r + 1);
  Mat k;
  if (s < zr) k = zp(t, tr) * fundamental_matrix(*sys_, tr, s);
  else k = zp(t, tr1) * fundamental_matrix(*sys_, tr1, s);
  if (r == j) {
    if (zr <= s && s < t) k += fundamental_matrix(*sys_, t, s);
    else if (t <= s && s < zr) k -= fundamental_matrix(*sys_, t, s);
  }
  return k;
}

Mat GreenContext::green_as_displayed(double t, double s) const {
  const Grid& g = sys_->grid;
  int n = sys_->dim();
  long j = g.interval_index(t), r = g.interval_index(s);
  double tr = g.t(r), zr = g.zeta(r), tr1 = g.t(r + 1);
  bool late = t > g.zeta(j);
  bool left_piece = s < zr;
  if (r != j) {
    if (left_piece) return zp(t, tr) * fundamental_matrix(*sys_, tr, s);
    return zp(t, tr1) * fundamental_matrix(*sys_, tr1, s);
  }
  if (late) {
    if (left_piece) return zp(t, tr) * fundamental_matrix(*sys_, tr, s);
    if (s < t) return fundamental_matrix(*sys_, t, s);
    return Mat::Zero(n, n);
  }
  if (!left_piece) return zp(t, tr1) * fundamental_matrix(*sys_, tr1, s);
  if (s < t) return Mat::Zero(n, n);
  return -fundamental_matrix(*sys_, t, s);
}

Ed1Report verify_ed1(const GreenContext& ctx, long k_lo, long k_hi, int samples_per_interval,
                     bool K_auto, Exec exec) {
  if (samples_per_interval < 4) throw DomainError("verify_ed1 needs samples_per_interval >= 4");
  if (k_lo > k_hi) throw DomainError("verify_ed1: empty window");
  const Grid& g = ctx.system().grid;
  const TransitionTable& tab = ctx.table();
  if (k_lo < tab.k_lo() || k_hi > tab.k_hi())
    throw DomainError("verify_ed1 window exceeds the context's transition data");
  std::vector<double> pts;
  for (long k = k_lo; k <= k_hi; ++k)
    for (int q = 0; q < samples_per_interval; ++q)
      pts.push_back(g.t(k) + (g.t(k + 1) - g.t(k)) * q / samples_per_interval);
  long np = static_cast<long>(pts.size());
  std::vector<Mat> zt0(pts.size()), z0t(pts.size());
  ParallelErrors errs;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (long a = 0; a < np; ++a) {
    errs.run([&] {
      zt0[a] = tab.Z_t_0(pts[a]);
      z0t[a] = tab.Z_0_t(pts[a]);
    });
  }
  errs.rethrow();
  double alpha = ctx.dichotomy().alpha;
  double half_span = 0.5 * (pts.back() - pts.front());
  struct RowBest {
    double worst = -1.0, near = 0.0;
    long b = 0;
  };
  std::vector<RowBest> rows(pts.size());
#pragma omp parallel for schedule(dynamic, 4) if (exec == Exec::Parallel)
  for (long a = 0; a < np; ++a) {
    errs.run([&] {
      RowBest best;
      for (long b = 0; b < np; ++b) {
        double gap = std::fabs(pts[a] - pts[b]);
        double ratio = op_norm(ctx.zp_from(zt0[a], z0t[b], pts[a] >= pts[b])) * std::exp(alpha * gap);
        if (ratio > best.worst) {
          best.worst = ratio;
          best.b = b;
        }
        if (gap <= half_span) best.near = std::max(best.near, ratio);
      }
      rows[a] = best;
    });
  }
  errs.rethrow();
  Ed1Report rep;
  rep.k_lo = k_lo;
  rep.k_hi = k_hi;
  rep.samples_per_interval = samples_per_interval;
  rep.K_auto = K_auto;
  rep.worst_ratio = -1.0;
  for (long a = 0; a < np; ++a) {
    if (rows[a].worst > rep.worst_ratio) {
      rep.worst_ratio = rows[a].worst;
      rep.worst_t = pts[a];
      rep.worst_s = pts[rows[a].b];
    }
    rep.worst_ratio_near = std::max(rep.worst_ratio_near, rows[a].near);
  }
  if (K_auto) {
    rep.K = std::max(1.0, 1.05 * rep.worst_ratio);
    rep.pass = std::isfinite(rep.worst_ratio) && rep.worst_ratio <= 1.05 * rep.worst_ratio_near;
  } else {
    rep.K = ctx.dichotomy().K;
    rep.pass = rep.worst_ratio <= rep.K * (1.0 + 1e-6);
  }
  return rep;
}

std::vector<Mat> discrete_reduction(const LinearSystem& sys, long n_lo, long n_hi) {
  if (n_lo > n_hi) throw DomainError("discrete_reduction: empty window");
  TransitionTable tab(sys, n_lo, n_hi, Exec::Serial);
  std::vector<Mat> out;
  for (long n = n_lo; n <= n_hi; ++n) out.push_back(tab.step(n));
  return out;
}

EdpCheck verify_edp(const std::vector<Mat>& mats, const Mat& P_hat, double r) {
  if (mats.empty()) throw DomainError("verify_edp: no matrices");
  if (!(r > 0.0 && r < 1.0)) throw DomainError("verify_edp: r must lie in (0, 1)");
  check_projection(P_hat, "P_hat");
  std::size_t N = mats.size();
  int n = static_cast<int>(P_hat.rows());
  std::vector<Mat> inv(N);
  for (std::size_t q = 0; q < N; ++q) inv[q] = checked_inverse(mats[q], static_cast<long>(q));
  // projections carried along the recursion: P_m = Y_m P_hat Y_m^{-1}
  std::vector<Mat> proj(N + 1);
  proj[0] = P_hat;
  for (std::size_t q = 0; q < N; ++q) proj[q + 1] = mats[q] * proj[q] * inv[q];
  Mat id = Mat::Identity(n, n);
  double worst = 0.0, near = 0.0;
  std::size_t half = N / 2;
  for (std::size_t m = 0; m <= N; ++m) {
    Mat fwd = proj[m];  // Y_n P_hat Y_m^{-1} for n = m, m+1, ...
    for (std::size_t nn = m; nn <= N; ++nn) {
      if (nn > m) fwd = mats[nn - 1] * fwd;
      double v = op_norm(fwd) / std::pow(r, static_cast<double>(nn - m));
      worst = std::max(worst, v);
      if (nn - m <= half) near = std::max(near, v);
    }
    Mat bwd = id - proj[m];  // Y_n (I - P_hat) Y_m^{-1} for n = m-1, m-2, ...
    for (std::size_t nn = m; nn-- > 0;) {
      bwd = inv[nn] * bwd;
      double v = op_norm(bwd) / std::pow(r, static_cast<double>(m - nn));
      worst = std::max(worst, v);
      if (m - nn <= half) near = std::max(near, v);
    }
  }
  EdpCheck out;
  out.r = r;
  out.K_hat = std::max(1.0, worst);
  out.pass = std::isfinite(worst) && worst <= 1.05 * std::max(1.0, near);
  return out;
}

DiscreteDichotomy find_discrete_dichotomy(const std::vector<Mat>& mats) {
  if (mats.empty()) throw DomainError("find_discrete_dichotomy: no matrices");
  const Mat& B = mats.front();
  double scale = std::max(1.0, op_norm(B));
  for (std::size_t q = 0; q < mats.size(); ++q) {
    checked_inverse(mats[q], static_cast<long>(q));
    if ((mats[q] - B).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw DomainError(
          "reduction is not constant; supply P_hat and r and use the sampled check instead");
  }
  int n = static_cast<int>(B.rows());
  Eigen::EigenSolver<Mat> es(B);
  if (es.info() != Eigen::Success) throw Error("eigen-decomposition failed");
  Eigen::VectorXcd lam = es.eigenvalues();
  Eigen::MatrixXcd V = es.eigenvectors();
  Eigen::VectorXcd mask(n);
  double r = 0.0;
  for (int i = 0; i < n; ++i) {
    double mod = std::abs(lam(i));
    if (std::fabs(mod - 1.0) < 1e-9) throw DomainError("eigenvalue on the unit circle: no dichotomy");
    mask(i) = mod < 1.0 ? 1.0 : 0.0;
    r = std::max(r, mod < 1.0 ? mod : 1.0 / mod);
  }
  DiscreteDichotomy d;
  Eigen::MatrixXcd Pc = V * mask.asDiagonal() * V.inverse();
  d.P_hat = Pc.real();
  d.r = std::min(1.01 * r, 0.5 * (1.0 + r));
  d.K_hat = verify_edp(mats, d.P_hat, d.r).K_hat;
  return d;
}

Mat promote_discrete_projection(const LinearSystem& sys, const Mat& P_hat) {
  double t0 = sys.grid.t(0);
  return transition_matrix(sys, 0.0, t0) * P_hat * transition_matrix(sys, t0, 0.0);
}

}  // namespace depcag
