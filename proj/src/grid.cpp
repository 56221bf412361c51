#include "depcag/grid.hpp"

#include <algorithm>
#include <cmath>

namespace depcag {

namespace {

double param(std::span<const double> p, std::size_t i, std::string_view family) {
  if (p.size() <= i)
    throw DomainError(std::string(family) + ": expected at least " + std::to_string(i + 1) +
                      " parameter(s)");
  return p[i];
}

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

Grid Grid::builtin_family(std::string_view name, std::span<const double> params) {
  Grid g;
  g.family_ = std::string(name);
  g.params_.assign(params.begin(), params.end());
  if (name == "floor") {
    // t_k = k, zeta_k = k
  } else if (name == "floor_minus_j" || name == "floor_plus_j") {
    double j = param(params, 0, name);
    if (!is_integer(j) || j < 0) throw DomainError(std::string(name) + ": j must be a non-negative integer");
    double off = name == "floor_plus_j" ? j : -j;
    // zeta_k = k -/+ j must stay inside [k, k+1] for the interval structure to hold.
    if (off < 0.0 || off > 1.0)
      throw DomainError(std::string(name) + ": j = " + std::to_string(static_cast<long>(j)) +
                        " puts zeta_k outside [t_k, t_{k+1}]");
    g.offset_ = off;
  } else if (name == "floor_half") {
    g.offset_ = 0.5;
  } else if (name == "even_round") {
    g.spacing_ = 2.0;
    g.offset_ = 1.0;
  } else if (name == "alpha_h") {
    double a = param(params, 0, name), h = param(params, 1, name);
    if (!(a > 0.0) || !(h > 0.0)) throw DomainError("alpha_h: alpha and h must be positive");
    g.spacing_ = a * h;
  } else if (name == "m_j") {
    double m = param(params, 0, name), j = param(params, 1, name);
    if (!(m > j && j > 0.0)) throw DomainError("m_j: requires m > j > 0");
    g.spacing_ = m;
    g.shift_ = -j;
    g.offset_ = j;
  } else {
    throw DomainError("unknown grid family '" + std::string(name) + "'");
  }
  g.theta_ = g.spacing_;
  return g;
}

Grid Grid::explicit_window(std::vector<double> t, std::vector<double> zeta, long first_index,
                           double theta) {
  if (zeta.empty() || t.size() != zeta.size() + 1)
    throw DomainError("explicit grid: need len(t) == len(zeta) + 1 >= 2");
  double widest = 0.0;
  for (std::size_t m = 0; m < zeta.size(); ++m) {
    if (!(t[m] < t[m + 1])) throw DomainError("explicit grid: t must be strictly increasing");
    if (!(t[m] <= zeta[m] && zeta[m] <= t[m + 1]))
      throw DomainError("explicit grid: zeta[" + std::to_string(m) + "] outside [t_k, t_{k+1}]");
    widest = std::max(widest, t[m + 1] - t[m]);
  }
  if (theta <= 0.0) theta = widest;
  if (theta < widest) throw DomainError("explicit grid: theta smaller than an interval length");
  Grid g;
  g.family_ = "explicit";
  g.window_ = true;
  g.t_ = std::move(t);
  g.zeta_ = std::move(zeta);
  g.first_ = first_index;
  g.theta_ = theta;
  return g;
}

void Grid::check_index(long k, bool allow_end) const {
  if (!window_) return;
  long hi = last_index() + (allow_end ? 1 : 0);
  if (k < first_ || k > hi)
    throw DomainError("grid index " + std::to_string(k) + " outside explicit window [" +
                      std::to_string(first_) + ", " + std::to_string(last_index()) + "]");
}

double Grid::t(long k) const {
  if (!window_) return shift_ + static_cast<double>(k) * spacing_;
  check_index(k, true);
  return t_[static_cast<std::size_t>(k - first_)];
}

double Grid::zeta(long k) const {
  if (!window_) return t(k) + offset_;
  check_index(k, false);
  return zeta_[static_cast<std::size_t>(k - first_)];
}

long Grid::interval_index(double s) const {
  if (!std::isfinite(s)) throw DomainError("grid query at non-finite time");
  if (window_) {
    if (s < t_.front() || s >= t_.back())
      throw DomainError("time " + std::to_string(s) + " outside explicit window");
    auto it = std::upper_bound(t_.begin(), t_.end(), s);
    return first_ + static_cast<long>(it - t_.begin()) - 1;
  }
  long k = static_cast<long>(std::floor((s - shift_) / spacing_));
  while (t(k) > s) --k;
  while (t(k + 1) <= s) ++k;
  return k;
}

long Grid::count_breakpoints(double tau, double t_hi) const {
  if (tau > t_hi) throw DomainError("count_breakpoints: requires tau <= t");
  long lo = interval_index(tau) + 1;  // first k with t_k > tau
  long hi;
  if (window_ && t_hi == t_.back()) {
    hi = last_index();
  } else {
    hi = interval_index(t_hi);
    if (t(hi) >= t_hi) --hi;  // last k with t_k < t
  }
  return std::max(0L, hi - lo + 1);
}

bool Grid::covers(double a, double b) const {
  if (!window_) return true;
  return a >= t_.front() && b <= t_.back() && a <= b;
}

void Grid::require_covers(double a, double b) const {
  if (!covers(a, b))
    throw DomainError("explicit grid window does not cover [" + std::to_string(a) + ", " +
                      std::to_string(b) + "]");
}

std::vector<double> Grid::breakpoints_between(double a, double b) const {
  std::vector<double> out;
  if (!(a < b)) return out;
  long k = interval_index(a) + 1;
  for (; t(k) < b; ++k) out.push_back(t(k));
  return out;
}

std::vector<double> Grid::nodes_between(double a, double b) const {
  std::vector<double> out;
  if (!(a < b)) return out;
  long k = interval_index(a);
  long last = (window_ && b >= t_.back()) ? last_index() : interval_index(b);
  for (; k <= last; ++k) {
    double tk = t(k), zk = zeta(k);
    if (tk > a && tk < b) out.push_back(tk);
    if (zk > a && zk < b) out.push_back(zk);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace depcag
