#include "depcag/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace depcag {

namespace {

struct FuncInfo {
  const char* name;
  Expr::Op op;
  int arity;
};

constexpr FuncInfo kFuncs[] = {
    {"sin", Expr::Op::Sin, 1},  {"cos", Expr::Op::Cos, 1}, {"exp", Expr::Op::Exp, 1},
    {"tanh", Expr::Op::Tanh, 1}, {"abs", Expr::Op::Abs, 1}, {"min", Expr::Op::Min, 2},
    {"max", Expr::Op::Max, 2},
};

const FuncInfo* find_func(std::string_view name) {
  for (const auto& f : kFuncs)
    if (name == f.name) return &f;
  return nullptr;
}

const char* func_name(Expr::Op op) {
  for (const auto& f : kFuncs)
    if (f.op == op) return f.name;
  return "?";
}

bool is_binary(Expr::Op op) {
  using O = Expr::Op;
  return op == O::Add || op == O::Sub || op == O::Mul || op == O::Div || op == O::Pow ||
         op == O::Min || op == O::Max;
}

char infix_symbol(Expr::Op op) {
  switch (op) {
    case Expr::Op::Add: return '+';
    case Expr::Op::Sub: return '-';
    case Expr::Op::Mul: return '*';
    case Expr::Op::Div: return '/';
    case Expr::Op::Pow: return '^';
    default: return '?';
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

class Parser {
 public:
  explicit Parser(const std::string& src) : src_(src) {}

  Expr run() {
    Expr e;
    e.nodes_.clear();
    out_ = &e;
    int root = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    e.root_ = root;
    e.finalize();
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int add(Expr::Node n) {
    out_->nodes_.push_back(n);
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  int binary(Expr::Op op, int a, int b) {
    Expr::Node n;
    n.op = op;
    n.lhs = a;
    n.rhs = b;
    return add(n);
  }

  struct Depth {
    Parser& p;
    explicit Depth(Parser& parser) : p(parser) {
      if (++p.depth_ > 200) p.fail("expression nested too deeply");
    }
    ~Depth() { --p.depth_; }
  };

  int parse_expr() {
    Depth guard(*this);
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = binary(Expr::Op::Add, lhs, parse_term());
      else if (accept('-')) lhs = binary(Expr::Op::Sub, lhs, parse_term());
      else return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      if (accept('*')) lhs = binary(Expr::Op::Mul, lhs, parse_factor());
      else if (accept('/')) lhs = binary(Expr::Op::Div, lhs, parse_factor());
      else return lhs;
    }
  }

  int parse_factor() {
    Depth guard(*this);
    bool negated = false;
    int base = parse_atom(&negated);
    skip_ws();
    std::size_t caret = pos_;
    if (accept('^')) {
      if (negated) {
        pos_ = caret;
        fail("negated base of '^' needs parentheses, e.g. (-a)^b");
      }
      return binary(Expr::Op::Pow, base, parse_factor());
    }
    return base;
  }

  int parse_atom(bool* negated) {
    Depth guard(*this);
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '-') {
      ++pos_;
      Expr::Node n;
      n.op = Expr::Op::Neg;
      n.lhs = parse_atom(nullptr);
      if (negated) *negated = true;
      return add(n);
    }
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  int parse_number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t s = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t nd = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) fail("malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        pos_ = save;
        fail("malformed exponent");
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_ || !std::isfinite(v)) {
      pos_ = start;
      fail("number out of range");
    }
    Expr::Node n;
    n.value = v;
    return add(n);
  }

  int parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string_view name(src_.data() + start, pos_ - start);
    skip_ws();
    bool call = pos_ < src_.size() && src_[pos_] == '(';
    if (call) {
      const FuncInfo* f = find_func(name);
      if (!f) {
        pos_ = start;
        fail("unknown function '" + std::string(name) + "'");
      }
      ++pos_;
      std::vector<int> args;
      skip_ws();
      if (!accept(')')) {
        do args.push_back(parse_expr());
        while (accept(','));
        expect(')');
      }
      if (static_cast<int>(args.size()) != f->arity) {
        pos_ = start;
        fail(std::string(f->name) + " takes " + std::to_string(f->arity) + " argument(s), got " +
             std::to_string(args.size()));
      }
      Expr::Node n;
      n.op = f->op;
      n.lhs = args[0];
      if (f->arity == 2) n.rhs = args[1];
      return add(n);
    }
    Expr::Node n;
    if (name == "pi") {
      n.value = std::numbers::pi;
      return add(n);
    }
    n.op = Expr::Op::Var;
    if (name == "t") {
      n.var = Expr::VarKind::T;
      return add(n);
    }
    if ((name[0] == 'x' || name[0] == 'y') && name.size() >= 2 && name[1] != '0') {
      int idx = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec == std::errc() && ptr == name.data() + name.size() && idx >= 1) {
        n.var = name[0] == 'x' ? Expr::VarKind::X : Expr::VarKind::Y;
        n.index = idx;
        return add(n);
      }
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  Expr* out_ = nullptr;
};

Expr::Expr() {
  nodes_.push_back(Node{});
  root_ = 0;
  finalize();
}

Expr Expr::parse(const std::string& src) { return Parser(src).run(); }

Expr Expr::constant(double v) {
  Expr e;
  e.nodes_[0].value = v;
  return e;
}

void Expr::finalize() {
  program_.clear();
  max_x_ = max_y_ = 0;
  uses_t_ = false;
  // iterative post-order so deep trees cannot blow the stack
  std::vector<std::pair<int, bool>> todo{{root_, false}};
  int depth = 0;
  stack_depth_ = 1;
  while (!todo.empty()) {
    auto [n, expanded] = todo.back();
    todo.pop_back();
    const Node& node = nodes_[n];
    if (!expanded) {
      todo.push_back({n, true});
      if (node.rhs >= 0) todo.push_back({node.rhs, false});
      if (node.lhs >= 0) todo.push_back({node.lhs, false});
      continue;
    }
    program_.push_back(n);
    if (node.op == Op::Num || node.op == Op::Var) {
      ++depth;
      if (node.op == Op::Var) {
        if (node.var == VarKind::T) uses_t_ = true;
        if (node.var == VarKind::X) max_x_ = std::max(max_x_, node.index);
        if (node.var == VarKind::Y) max_y_ = std::max(max_y_, node.index);
      }
    } else if (is_binary(node.op)) {
      --depth;
    }
    stack_depth_ = std::max(stack_depth_, depth);
  }
}

std::string Expr::print() const { return print_node(root_); }

std::string Expr::print_node(int i) const {
  const Node& n = nodes_[i];
  switch (n.op) {
    case Op::Num: return format_number(n.value);
    case Op::Var:
      if (n.var == VarKind::T) return "t";
      return (n.var == VarKind::X ? "x" : "y") + std::to_string(n.index);
    case Op::Neg: return "(-" + print_node(n.lhs) + ")";
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return "(" + print_node(n.lhs) + " " + infix_symbol(n.op) + " " + print_node(n.rhs) + ")";
    case Op::Min:
    case Op::Max:
      return std::string(func_name(n.op)) + "(" + print_node(n.lhs) + ", " + print_node(n.rhs) +
             ")";
    default: return std::string(func_name(n.op)) + "(" + print_node(n.lhs) + ")";
  }
}

double Expr::eval(double t, const double* x, const double* y) const {
  constexpr int kInline = 32;
  double inline_stack[kInline] = {};
  std::vector<double> heap;
  double* st = inline_stack;
  if (stack_depth_ > kInline) {
    heap.resize(static_cast<std::size_t>(stack_depth_));
    st = heap.data();
  }
  int sp = 0;
  for (int i : program_) {
    const Node& n = nodes_[i];
    double r;
    switch (n.op) {
      case Op::Num: st[sp++] = n.value; continue;
      case Op::Var:
        st[sp++] = n.var == VarKind::T ? t : (n.var == VarKind::X ? x : y)[n.index - 1];
        continue;
      case Op::Neg: r = -st[sp - 1]; break;
      case Op::Sin: r = std::sin(st[sp - 1]); break;
      case Op::Cos: r = std::cos(st[sp - 1]); break;
      case Op::Exp: r = std::exp(st[sp - 1]); break;
      case Op::Tanh: r = std::tanh(st[sp - 1]); break;
      case Op::Abs: r = std::fabs(st[sp - 1]); break;
      default: {
        double b = st[--sp], a = st[sp - 1];
        switch (n.op) {
          case Op::Add: r = a + b; break;
          case Op::Sub: r = a - b; break;
          case Op::Mul: r = a * b; break;
          case Op::Div:
            if (b == 0.0) throw EvalError("division by zero", print_node(i));
            r = a / b;
            break;
          case Op::Pow: r = std::pow(a, b); break;
          case Op::Min: r = std::min(a, b); break;
          default: r = std::max(a, b); break;
        }
      }
    }
    if (!std::isfinite(r)) throw EvalError("non-finite result", print_node(i));
    st[sp - 1] = r;
  }
  return st[0];
}

double Expr::eval(const std::map<std::string, double>& env) const {
  auto lookup = [&](const std::string& name) {
    auto it = env.find(name);
    if (it == env.end()) throw DomainError("unbound variable '" + name + "'");
    return it->second;
  };
  double t = uses_t_ ? lookup("t") : 0.0;
  std::vector<double> x(static_cast<std::size_t>(max_x_)), y(static_cast<std::size_t>(max_y_));
  for (int k = 1; k <= max_x_; ++k)
    x[k - 1] = env.count("x" + std::to_string(k)) ? env.at("x" + std::to_string(k)) : 0.0;
  for (int k = 1; k <= max_y_; ++k)
    y[k - 1] = env.count("y" + std::to_string(k)) ? env.at("y" + std::to_string(k)) : 0.0;
  // only the variables that actually occur must be bound
  for (const auto& v : variables()) lookup(v);
  return eval(t, x.data(), y.data());
}

std::set<std::string> Expr::variables() const {
  std::set<std::string> out;
  for (int i : program_) {
    const Node& n = nodes_[i];
    if (n.op != Op::Var) continue;
    if (n.var == VarKind::T) out.insert("t");
    else out.insert((n.var == VarKind::X ? "x" : "y") + std::to_string(n.index));
  }
  return out;
}

bool Expr::is_zero_literal() const {
  return nodes_[root_].op == Op::Num && nodes_[root_].value == 0.0;
}

bool Expr::same_subtree(int a, const Expr& other, int b) const {
  const Node& p = nodes_[a];
  const Node& q = other.nodes_[b];
  if (p.op != q.op) return false;
  if (p.op == Op::Num) return p.value == q.value || (std::isnan(p.value) && std::isnan(q.value));
  if (p.op == Op::Var) return p.var == q.var && p.index == q.index;
  if ((p.lhs >= 0) != (q.lhs >= 0) || (p.rhs >= 0) != (q.rhs >= 0)) return false;
  if (p.lhs >= 0 && !same_subtree(p.lhs, other, q.lhs)) return false;
  if (p.rhs >= 0 && !same_subtree(p.rhs, other, q.rhs)) return false;
  return true;
}

bool operator==(const Expr& a, const Expr& b) { return a.same_subtree(a.root_, b, b.root_); }

}  // namespace depcag
