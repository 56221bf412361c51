#include "depcag/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace depcag {

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.size() == 1) return std::fabs(m(0, 0));
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

CertifiedBound CertifiedBound::analytic(double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("analytic bound must be finite and >= 0");
  CertifiedBound b;
  b.value = v;
  return b;
}

std::string CertifiedBound::describe() const {
  if (method == Method::Analytic) return "analytic";
  char buf[96];
  std::snprintf(buf, sizeof buf, "grid-sample(samples=%d, inflation=%.17g)", samples, inflation);
  return buf;
}

namespace {

struct Slot {
  Expr::VarKind kind;
  int index;
  double lo, hi;
};

Slot slot_for(const std::string& name, const Ranges& ranges) {
  auto it = ranges.find(name);
  if (it == ranges.end()) throw DomainError("no sampling range for variable '" + name + "'");
  if (!(it->second.first <= it->second.second))
    throw DomainError("empty sampling range for '" + name + "'");
  Slot s{Expr::VarKind::T, 0, it->second.first, it->second.second};
  if (name != "t") {
    s.kind = name[0] == 'x' ? Expr::VarKind::X : Expr::VarKind::Y;
    s.index = std::stoi(name.substr(1));
  }
  return s;
}

/// Tensor-grid walker over the free variables of a set of expressions.
class SampleGrid {
 public:
  SampleGrid(const std::set<std::string>& vars, const Ranges& ranges, int samples) {
    for (const auto& v : vars) slots_.push_back(slot_for(v, ranges));
    for (const auto& s : slots_) {
      if (s.kind == Expr::VarKind::X) nx_ = std::max(nx_, s.index);
      if (s.kind == Expr::VarKind::Y) ny_ = std::max(ny_, s.index);
    }
    int d = static_cast<int>(slots_.size());
    per_axis_ = d == 0 ? 1
                       : std::max(2, static_cast<int>(std::floor(
                                         std::pow(static_cast<double>(samples), 1.0 / d) + 1e-9)));
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const std::vector<Slot>& slots() const { return slots_; }

  /// Calls fn(t, x, y) at each grid point.
  template <class Fn>
  void for_each(int nx_min, int ny_min, Fn&& fn) const {
    std::vector<double> x(static_cast<std::size_t>(std::max(nx_, nx_min)), 0.0);
    std::vector<double> y(static_cast<std::size_t>(std::max(ny_, ny_min)), 0.0);
    std::vector<int> idx(slots_.size(), 0);
    for (;;) {
      double t = 0.0;
      for (std::size_t a = 0; a < slots_.size(); ++a) {
        const Slot& s = slots_[a];
        double v = per_axis_ == 1 ? s.lo : s.lo + (s.hi - s.lo) * idx[a] / (per_axis_ - 1);
        if (s.kind == Expr::VarKind::T) t = v;
        else (s.kind == Expr::VarKind::X ? x : y)[s.index - 1] = v;
      }
      fn(t, x.data(), y.data());
      std::size_t a = 0;
      for (; a < slots_.size(); ++a) {
        if (++idx[a] < per_axis_) break;
        idx[a] = 0;
      }
      if (a == slots_.size()) return;
    }
  }

 private:
  std::vector<Slot> slots_;
  int per_axis_ = 1;
  int nx_ = 0, ny_ = 0;
};

void check_knobs(int samples, double inflation) {
  if (samples < 100) throw DomainError("bound sampling needs samples >= 100");
  if (!(inflation >= 1.0)) throw DomainError("inflation must be >= 1");
}

CertifiedBound sampled(double sup, int samples, double inflation) {
  CertifiedBound b;
  b.value = sup * inflation;
  b.method = CertifiedBound::Method::GridSample;
  b.samples = samples;
  b.inflation = inflation;
  return b;
}

std::set<std::string> union_vars(const std::vector<Expr>& es) {
  std::set<std::string> vars;
  for (const auto& e : es) {
    auto v = e.variables();
    vars.insert(v.begin(), v.end());
  }
  return vars;
}

double step_for(const Slot& s) {
  double w = s.hi - s.lo;
  return w > 0.0 ? 1e-3 * w : 1e-6;
}

/// Sup of the operator norm of d(es)/d(block) by one-sided differences.
double sampled_jacobian_sup(const std::vector<Expr>& es, Block wrt, const Ranges& ranges,
                            int samples) {
  auto vars = union_vars(es);
  SampleGrid grid(vars, ranges, samples);
  Expr::VarKind kind = wrt == Block::X ? Expr::VarKind::X : Expr::VarKind::Y;
  std::vector<const Slot*> block;
  for (const auto& s : grid.slots())
    if (s.kind == kind) block.push_back(&s);
  if (block.empty()) return 0.0;
  int rows = static_cast<int>(es.size());
  int cols = 0;
  for (const Slot* s : block) cols = std::max(cols, s->index);
  double sup = 0.0;
  Mat jac = Mat::Zero(rows, cols);
  grid.for_each(cols, cols, [&](double t, double* x, double* y) {
    double* v = kind == Expr::VarKind::X ? x : y;
    jac.setZero();
    for (const Slot* s : block) {
      double& coord = v[s->index - 1];
      double base = coord, h = step_for(*s);
      if (base + h > s->hi && base - h >= s->lo) h = -h;
      for (int r = 0; r < rows; ++r) {
        double f0 = es[r].eval(t, x, y);
        coord = base + h;
        double f1 = es[r].eval(t, x, y);
        coord = base;
        jac(r, s->index - 1) = (f1 - f0) / h;
      }
    }
    sup = std::max(sup, op_norm(jac));
  });
  return sup;
}

}  // namespace

CertifiedBound bound_abs(const Expr& e, const Ranges& ranges, int samples, double inflation) {
  check_knobs(samples, inflation);
  SampleGrid grid(e.variables(), ranges, samples);
  double sup = 0.0;
  grid.for_each(0, 0, [&](double t, double* x, double* y) {
    sup = std::max(sup, std::fabs(e.eval(t, x, y)));
  });
  return sampled(sup, samples, inflation);
}

CertifiedBound bound_norm(const std::vector<Expr>& es, const Ranges& ranges, int samples,
                          double inflation) {
  check_knobs(samples, inflation);
  SampleGrid grid(union_vars(es), ranges, samples);
  double sup = 0.0;
  grid.for_each(0, 0, [&](double t, double* x, double* y) {
    double s2 = 0.0;
    for (const auto& e : es) {
      double v = e.eval(t, x, y);
      s2 += v * v;
    }
    sup = std::max(sup, std::sqrt(s2));
  });
  return sampled(sup, samples, inflation);
}

CertifiedBound lipschitz_estimate(const Expr& e, Block wrt, const Ranges& ranges, int samples,
                                  double inflation) {
  check_knobs(samples, inflation);
  return sampled(sampled_jacobian_sup({e}, wrt, ranges, samples), samples, inflation);
}

CertifiedBound lipschitz_estimate(const std::vector<Expr>& es, Block wrt, const Ranges& ranges,
                                  int samples, double inflation) {
  check_knobs(samples, inflation);
  return sampled(sampled_jacobian_sup(es, wrt, ranges, samples), samples, inflation);
}

CertifiedBound bound_matrix_norm(const std::vector<Expr>& entries, int n, double t_lo,
                                 double t_hi, int samples, double inflation) {
  check_knobs(samples, inflation);
  if (static_cast<int>(entries.size()) != n * n) throw DomainError("matrix entry count mismatch");
  for (const auto& e : entries)
    if (e.max_x_index() > 0 || e.max_y_index() > 0)
      throw DomainError("matrix entries may only depend on t");
  bool varies = false;
  for (const auto& e : entries) varies = varies || e.uses_t();
  int pts = varies ? samples : 1;
  Mat m(n, n);
  double sup = 0.0;
  for (int k = 0; k < pts; ++k) {
    double t = pts == 1 ? t_lo : t_lo + (t_hi - t_lo) * k / (pts - 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = entries[i * n + j].eval(t, nullptr, nullptr);
    sup = std::max(sup, op_norm(m));
  }
  return sampled(sup, samples, inflation);
}

}  // namespace depcag
