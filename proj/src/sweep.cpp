#include "depcag/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace depcag {

namespace {

struct StepCoef {
  Mat R, B0, Bm, B1;
};

/// RK4 for y' = A(s) y + g(s) written as y+ = R y + B0 g(s0) + Bm g(sm) + B1 g(s1).
StepCoef rk4_coefficients(const Mat& a0, const Mat& am, const Mat& a1, double hh) {
  int n = static_cast<int>(a0.rows());
  Mat id = Mat::Identity(n, n);
  double half = 0.5 * hh;
  Mat k2y = am + half * am * a0;
  Mat k2g0 = half * am;
  Mat k3y = am + half * am * k2y;
  Mat k3g0 = half * am * k2g0;
  Mat k3gm = id + half * am;
  Mat k4y = a1 + hh * a1 * k3y;
  Mat k4g0 = hh * a1 * k3g0;
  Mat k4gm = hh * a1 * k3gm;
  double w = hh / 6.0;
  StepCoef c;
  c.R = id + w * (a0 + 2.0 * k2y + 2.0 * k3y + k4y);
  c.B0 = w * (id + 2.0 * k2g0 + 2.0 * k3g0 + k4g0);
  c.Bm = w * (2.0 * id + 2.0 * k3gm + k4gm);
  c.B1 = w * id;
  return c;
}

/// One classical RK4 step of E' = A E + A0 of length hh from s.
Mat e_step(const LinearSystem& sys, const Mat& e, double s, double hh) {
  Mat a0 = sys.A.at(s), am = sys.A.at(s + 0.5 * hh), a1 = sys.A.at(s + hh);
  Mat b0 = sys.A0.at(s), bm = sys.A0.at(s + 0.5 * hh), b1 = sys.A0.at(s + hh);
  Mat k1 = a0 * e + b0;
  Mat k2 = am * (e + 0.5 * hh * k1) + bm;
  Mat k3 = am * (e + 0.5 * hh * k2) + bm;
  Mat k4 = a1 * (e + hh * k3) + b1;
  return e + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct LocalStep {
  bool forced;
  std::size_t s0, sm, s1;  // local stage ids
};

struct LocalSweep {
  std::vector<LocalStep> steps;
  std::vector<double> coef;
  std::vector<double> stage_t;
  std::vector<Mat> stage_e;
  std::size_t n_fwd = 0;
  std::vector<std::pair<std::size_t, std::size_t>> fwd_rec, bwd_rec;  // (after, eval)
  std::vector<std::pair<std::size_t, Mat>> eval_e;                     // (eval, E(e, zeta_r))
};

}  // namespace

SweepPlan::SweepPlan(const GreenContext& ctx, double a, double b, std::vector<double> eval_times,
                     double step, bool stage_states, Exec exec)
    : ctx_(&ctx), n_(ctx.system().dim()), a_(a), b_(b), h_(step), eval_(std::move(eval_times)) {
  const LinearSystem& sys = ctx.system();
  const Grid& g = sys.grid;
  const TransitionTable& tab = ctx.table();
  if (!(a < b)) throw DomainError("sweep window must have a < b");
  if (!(step > 0.0)) throw DomainError("sweep step must be positive");
  if (!tab.covers(a, b)) throw DomainError("window not covered by the transition data; widen it");
  for (double e : eval_)
    if (e < a || e > b) throw DomainError("evaluation time outside the sweep window");
  ka_ = g.interval_index(a);
  kb_ = g.interval_index(b);
  if (g.t(kb_) == b && kb_ > ka_) --kb_;
  std::size_t nint = static_cast<std::size_t>(kb_ - ka_ + 1);
  eval_interval_.resize(eval_.size());
  std::vector<std::vector<std::size_t>> bucket(nint);
  for (std::size_t e = 0; e < eval_.size(); ++e) {
    long j = std::min(g.interval_index(eval_[e]), kb_);
    eval_interval_[e] = j;
    bucket[static_cast<std::size_t>(j - ka_)].push_back(e);
  }

  std::vector<LocalSweep> local(nint);
  long nl = static_cast<long>(nint);
  ParallelErrors errs;
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::Parallel)
  for (long m = 0; m < nl; ++m) {
    errs.run([&] {
      long r = ka_ + m;
      LocalSweep& L = local[m];
      double tr = g.t(r), zr = g.zeta(r), tr1 = g.t(r + 1);
      std::map<double, std::size_t> ids;
      auto stage = [&](double s) {
        auto [it, fresh] = ids.emplace(s, L.stage_t.size());
        if (fresh) {
          L.stage_t.push_back(s);
          if (stage_states) L.stage_e.emplace_back();
        }
        return it->second;
      };
      // One direction: from zeta_r towards `end`, recording evaluation times.
      auto sweep_dir = [&](double end, std::vector<std::pair<std::size_t, std::size_t>>& rec) {
        std::vector<std::pair<double, long>> cuts;  // (time, eval index or -1)
        double lo = std::min(zr, end), hi = std::max(zr, end);
        for (double c : {a, b})
          if (c > lo && c < hi) cuts.push_back({c, -1});
        for (std::size_t e : bucket[m]) {
          double te = eval_[e];
          bool mine = end > zr ? (te > zr && te <= end) : (te < zr && te >= end);
          if (end > zr && te == zr) mine = true;  // zeta itself recorded on the forward pass
          if (mine) cuts.push_back({te, static_cast<long>(e)});
        }
        cuts.push_back({end, -1});
        if (end > zr) std::sort(cuts.begin(), cuts.end());
        else std::sort(cuts.begin(), cuts.end(), [](auto& p, auto& q) { return p.first > q.first; });
        Mat e = Mat::Identity(n_, n_);
        double from = zr;
        std::size_t taken = 0;
        for (const auto& [to, ev] : cuts) {
          int ns = steps_for(from, to, h_);
          double hh = ns ? (to - from) / ns : 0.0;
          for (int k = 0; k < ns; ++k) {
            double s0 = from + k * hh, s1 = k + 1 == ns ? to : from + (k + 1) * hh;
            double sm = 0.5 * (s0 + s1);
            double step_h = s1 - s0;
            Mat a0 = sys.A.at(s0), am = sys.A.at(sm), a1 = sys.A.at(s1);
            StepCoef c = rk4_coefficients(a0, am, a1, step_h);
            LocalStep st{std::min(s0, s1) >= a && std::max(s0, s1) <= b, 0, 0, 0};
            if (st.forced) {
              st.s0 = stage(s0);
              st.sm = stage(sm);
              st.s1 = stage(s1);
              if (stage_states) {
                if (L.stage_e[st.s0].size() == 0) L.stage_e[st.s0] = e;
                if (L.stage_e[st.sm].size() == 0) L.stage_e[st.sm] = e_step(sys, e, s0, 0.5 * step_h);
              }
            }
            for (const Mat* blk : {&c.R, &c.B0, &c.Bm, &c.B1})
              for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) L.coef.push_back((*blk)(i, j));
            e = c.R * e + c.B0 * sys.A0.at(s0) + c.Bm * sys.A0.at(sm) + c.B1 * sys.A0.at(s1);
            if (st.forced && stage_states && L.stage_e[st.s1].size() == 0) L.stage_e[st.s1] = e;
            L.steps.push_back(st);
            ++taken;
          }
          if (ev >= 0) {
            rec.push_back({taken, static_cast<std::size_t>(ev)});
            L.eval_e.push_back({static_cast<std::size_t>(ev), e});
          }
          from = to;
        }
      };
      sweep_dir(tr1, L.fwd_rec);
      L.n_fwd = L.steps.size();
      sweep_dir(tr, L.bwd_rec);
    });
  }
  errs.rethrow();

  // Merge in interval order so the layout does not depend on scheduling.
  eval_z0_.assign(eval_.size(), Mat());
  for (std::size_t m = 0; m < nint; ++m) {
    long r = ka_ + static_cast<long>(m);
    LocalSweep& L = local[m];
    Mat anchor = tab.E_left_inv(r) * tab.Z_tk_0(r);  // Z(s,0) = E(s,zeta_r) * anchor
    std::size_t base_stage = stage_time_.size();
    for (std::size_t q = 0; q < L.stage_t.size(); ++q) {
      stage_time_.push_back(L.stage_t[q]);
      stage_interval_.push_back(r);
      if (stage_states) stage_z0_.push_back(L.stage_e[q] * anchor);
    }
    Sweep sw;
    sw.r = r;
    sw.fwd_begin = steps_.size();
    for (std::size_t k = 0; k < L.steps.size(); ++k) {
      const LocalStep& ls = L.steps[k];
      if (k == L.n_fwd) {
        sw.fwd_end = steps_.size();
        sw.bwd_begin = steps_.size();
      }
      steps_.push_back({ls.forced, base_stage + ls.s0, base_stage + ls.sm, base_stage + ls.s1});
    }
    if (L.n_fwd == L.steps.size()) {
      sw.fwd_end = steps_.size();
      sw.bwd_begin = steps_.size();
    }
    sw.bwd_end = steps_.size();
    coef_.insert(coef_.end(), L.coef.begin(), L.coef.end());
    for (auto [after, ev] : L.fwd_rec) sw.fwd_rec.push_back({after, ev});
    for (auto [after, ev] : L.bwd_rec) sw.bwd_rec.push_back({after, ev});
    for (auto& [ev, e] : L.eval_e) eval_z0_[ev] = e * anchor;
    sweeps_.push_back(std::move(sw));
  }
}

void SweepPlan::step_into(std::size_t k, const double* y, const Mat& g, double* yn) const {
  std::size_t nn = static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  const double* c = coef_.data() + 4 * nn * k;
  const StepRef& st = steps_[k];
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    const double* R = c + i * n_;
    for (int j = 0; j < n_; ++j) acc += R[j] * y[j];
    if (st.forced) {
      const double* B0 = c + nn + i * n_;
      const double* Bm = c + 2 * nn + i * n_;
      const double* B1 = c + 3 * nn + i * n_;
      const double* g0 = g.col(static_cast<Eigen::Index>(st.s0)).data();
      const double* gm = g.col(static_cast<Eigen::Index>(st.sm)).data();
      const double* g1 = g.col(static_cast<Eigen::Index>(st.s1)).data();
      for (int j = 0; j < n_; ++j) acc += B0[j] * g0[j] + Bm[j] * gm[j] + B1[j] * g1[j];
    }
    yn[i] = acc;
  }
}

void SweepPlan::run_sweep(const Sweep& sw, const Mat& g, double* u, double* w, Mat& out) const {
  std::vector<double> y(static_cast<std::size_t>(n_)), yn(static_cast<std::size_t>(n_));
  auto pass = [&](std::size_t begin, std::size_t end, const std::vector<Record>& rec) {
    std::fill(y.begin(), y.end(), 0.0);
    std::size_t ri = 0;
    auto flush = [&](std::size_t taken) {
      while (ri < rec.size() && rec[ri].after_steps == taken) {
        for (int i = 0; i < n_; ++i) out(i, static_cast<Eigen::Index>(rec[ri].eval)) = y[i];
        ++ri;
      }
    };
    flush(0);
    for (std::size_t k = begin; k < end; ++k) {
      step_into(k, y.data(), g, yn.data());
      std::swap(y, yn);
      flush(k - begin + 1);
    }
  };
  pass(sw.fwd_begin, sw.fwd_end, sw.fwd_rec);
  for (int i = 0; i < n_; ++i) w[i] = y[i];
  pass(sw.bwd_begin, sw.bwd_end, sw.bwd_rec);
  for (int i = 0; i < n_; ++i) u[i] = -y[i];
}

Mat SweepPlan::apply(const Mat& g, Exec exec) const {
  if (g.rows() != n_ || static_cast<std::size_t>(g.cols()) != stage_time_.size())
    throw DomainError("forcing must be n x stage_count");
  const TransitionTable& tab = ctx_->table();
  const Mat& P = ctx_->dichotomy().P;
  Mat Q = Mat::Identity(n_, n_) - P;
  long nint = static_cast<long>(sweeps_.size());
  Mat out = Mat::Zero(n_, static_cast<Eigen::Index>(eval_.size()));
  Mat U(n_, nint), W(n_, nint);
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::Parallel)
  for (long m = 0; m < nint; ++m) run_sweep(sweeps_[m], g, U.col(m).data(), W.col(m).data(), out);

  // c_r = Z(0,t_r) u_r and d_r = Z(0,t_{r+1}) w_r, summed in fixed order
  Mat C(n_, nint), D(n_, nint);
  for (long m = 0; m < nint; ++m) {
    long r = ka_ + m;
    C.col(m) = tab.Z_0_tk(r) * U.col(m);
    D.col(m) = tab.Z_0_tk(r + 1) * W.col(m);
  }
  // stable part at interval j: sum_{r<=j} c_r + sum_{r<=j-1} d_r
  // unstable part:             sum_{r>j} c_r + sum_{r>=j} d_r
  Mat SP(n_, nint), SU(n_, nint);
  Vec acc_c = Vec::Zero(n_), acc_d = Vec::Zero(n_);
  for (long m = 0; m < nint; ++m) {
    acc_c += C.col(m);
    SP.col(m) = acc_c + acc_d;
    acc_d += D.col(m);
  }
  acc_c.setZero();
  acc_d.setZero();
  for (long m = nint - 1; m >= 0; --m) {
    acc_d += D.col(m);
    SU.col(m) = acc_c + acc_d;
    acc_c += C.col(m);
  }
  long ne = static_cast<long>(eval_.size());
  ParallelErrors errs;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (long e = 0; e < ne; ++e) {
    errs.run([&] {
      long m = eval_interval_[e] - ka_;
      Vec v = P * SP.col(m) - Q * SU.col(m);
      out.col(e) += eval_z0_[e] * v;
    });
  }
  errs.rethrow();
  return out;
}

}  // namespace depcag
