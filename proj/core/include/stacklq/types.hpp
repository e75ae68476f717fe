#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stacklq {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Argument outside the mathematical domain of an operation (e.g. t outside [0,T]).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A weight matrix that must be inverted is not positive definite.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, double t)
      : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

/// A backward or forward integration produced a non-finite or exploding value.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, std::size_t node, double t)
      : std::runtime_error(what), node_(node), t_(t) {}
  std::size_t node() const { return node_; }
  double time() const { return t_; }

 private:
  std::size_t node_;
  double t_;
};

/// Malformed specification document. Line and column are 1-based; 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exogenous control outside the class whose filters can be computed in closed form.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReductionNotApplicable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace stacklq
