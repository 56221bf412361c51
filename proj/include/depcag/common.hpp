#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>

namespace depcag {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query outside the represented range, or a precondition on arguments.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Division by zero or a non-finite value; carries the printed subexpression.
class EvalError : public Error {
 public:
  EvalError(const std::string& msg, std::string subexpr)
      : Error(msg + " in '" + subexpr + "'"), subexpr_(std::move(subexpr)) {}
  const std::string& subexpression() const { return subexpr_; }

 private:
  std::string subexpr_;
};

/// An E-factor whose reciprocal condition number fell below 1e-12.
class SingularError : public Error {
 public:
  SingularError(const std::string& msg, long interval)
      : Error(msg + " (interval " + std::to_string(interval) + ")"), interval_(interval) {}
  long interval() const { return interval_; }

 private:
  long interval_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A theorem hypothesis needed by the requested quantity does not hold.
class InapplicableError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& pointer, const std::string& msg)
      : Error(pointer + ": " + msg), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// Serial runs the reference loops; Parallel distributes them with OpenMP.
/// Both produce bit-identical results.
enum class Exec { Serial, Parallel };

/// An exception escaping an OpenMP region terminates the process, so loop
/// bodies run through `run` and the first exception is rethrown after the
/// region closes.
class ParallelErrors {
 public:
  template <class F>
  void run(F&& body) noexcept {
    try {
      body();
    } catch (...) {
#pragma omp critical(depcag_parallel_errors)
      if (!first_) first_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::exception_ptr first_;
};

/// Induced 2-norm.
double op_norm(const Mat& m);

/// Portable uniform double in [0,1) from a 64-bit generator word.
inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace depcag
