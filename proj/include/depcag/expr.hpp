#pragma once

#include "depcag/common.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace depcag {

/// Arithmetic expression over t, x1..xn, y1..yn.
///
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := atom ('^' factor)?        right-associative
///   atom   := number | ident | func '(' args ')' | '(' expr ')' | '-' atom
///
/// A negated atom cannot be the base of '^': "-2^2" is rejected, write
/// "(-2)^2" or "-(2^2)". Functions: sin cos exp tanh abs (one argument),
/// min max (two). The identifier `pi` is a constant.
class Expr {
 public:
  enum class Op { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Tanh, Abs, Min, Max };
  enum class VarKind { T, X, Y };

  struct Node {
    Op op = Op::Num;
    double value = 0.0;
    VarKind var = VarKind::T;
    int index = 0;  // 1-based for x/y
    int lhs = -1, rhs = -1;
  };

  Expr();  // the constant 0
  static Expr parse(const std::string& src);
  static Expr constant(double v);

  /// Fully parenthesised text that parses back to the same tree.
  std::string print() const;
  std::string print_node(int node) const;

  double eval(const std::map<std::string, double>& env) const;
  /// Fast path; `x` and `y` must have at least max_x_index()/max_y_index()
  /// entries.
  double eval(double t, const double* x, const double* y) const;

  std::set<std::string> variables() const;
  int max_x_index() const { return max_x_; }
  int max_y_index() const { return max_y_; }
  bool uses_t() const { return uses_t_; }
  bool is_constant() const { return !uses_t_ && max_x_ == 0 && max_y_ == 0; }
  /// True for a literal 0 tree.
  bool is_zero_literal() const;

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  friend class Parser;
  void finalize();
  bool same_subtree(int a, const Expr& other, int b) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::vector<int> program_;  // post-order node indices
  int stack_depth_ = 1;
  int max_x_ = 0, max_y_ = 0;
  bool uses_t_ = false;
};

struct CertifiedBound {
  enum class Method { Analytic, GridSample };
  double value = 0.0;
  Method method = Method::Analytic;
  int samples = 0;
  double inflation = 1.0;

  static CertifiedBound analytic(double v);
  std::string describe() const;
};

using Ranges = std::map<std::string, std::pair<double, double>>;
enum class Block { X, Y };

/// Sup of |e| over a uniform tensor grid of the free variables, times
/// `inflation`. The grid has max(2, floor(samples^(1/d))) points per axis.
CertifiedBound bound_abs(const Expr& e, const Ranges& ranges, int samples, double inflation);

/// Largest sampled difference quotient of `e` with respect to the x- or
/// y-block (Euclidean norm of the block gradient), times `inflation`.
CertifiedBound lipschitz_estimate(const Expr& e, Block wrt, const Ranges& ranges, int samples,
                                  double inflation = 1.0);

/// Vector-valued versions: sup of the Euclidean norm of (e_1..e_n), and the
/// operator norm of the sampled Jacobian block.
CertifiedBound bound_norm(const std::vector<Expr>& es, const Ranges& ranges, int samples,
                          double inflation);
CertifiedBound lipschitz_estimate(const std::vector<Expr>& es, Block wrt, const Ranges& ranges,
                                  int samples, double inflation = 1.0);

/// Sup over t in [t_lo, t_hi] of the 2-norm of the matrix with the given
/// row-major entries.
CertifiedBound bound_matrix_norm(const std::vector<Expr>& entries, int n, double t_lo,
                                 double t_hi, int samples, double inflation);

}  // namespace depcag
