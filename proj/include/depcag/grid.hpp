#pragma once

#include "depcag/common.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace depcag {

/// The breakpoint sequences {t_k}, {zeta_k} and the piecewise constant
/// argument gamma(t) = zeta_k on [t_k, t_{k+1}).
///
/// Builtin families are affine lattices t_k = shift + k*spacing,
/// zeta_k = t_k + offset and extend to every integer k. Explicit windows
/// hold a finite slice and reject queries outside it.
class Grid {
 public:
  static Grid builtin_family(std::string_view name, std::span<const double> params = {});
  /// `t` has one more entry than `zeta`; interval `first_index + m` is
  /// [t[m], t[m+1]) with frozen point zeta[m]. theta <= 0 means "use the
  /// largest spacing".
  static Grid explicit_window(std::vector<double> t, std::vector<double> zeta, long first_index,
                              double theta = 0.0);

  double t(long k) const;
  double zeta(long k) const;
  double theta() const { return theta_; }

  long interval_index(double s) const;
  double gamma(double s) const { return zeta(interval_index(s)); }
  /// Number of t_k with tau < t_k < t.
  long count_breakpoints(double tau, double t) const;

  bool is_window() const { return window_; }
  /// Lowest and highest represented interval index (windows only).
  long first_index() const { return first_; }
  long last_index() const { return first_ + static_cast<long>(zeta_.size()) - 1; }
  /// True if every point of [a, b] lies in a represented interval or at
  /// the right end of the last one.
  bool covers(double a, double b) const;
  void require_covers(double a, double b) const;

  const std::string& family() const { return family_; }
  const std::vector<double>& params() const { return params_; }

  /// Sorted t_k and zeta_k strictly inside (a, b).
  std::vector<double> nodes_between(double a, double b) const;
  /// Sorted t_k strictly inside (a, b).
  std::vector<double> breakpoints_between(double a, double b) const;

 private:
  Grid() = default;
  void check_index(long k, bool allow_end) const;

  std::string family_;
  std::vector<double> params_;
  bool window_ = false;
  double spacing_ = 1.0, shift_ = 0.0, offset_ = 0.0;
  std::vector<double> t_, zeta_;
  long first_ = 0;
  double theta_ = 1.0;
};

}  // namespace depcag
