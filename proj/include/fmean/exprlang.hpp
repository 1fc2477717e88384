#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "fmean/errors.hpp"

namespace fmean {

enum class NodeKind { Number, Var, Add, Sub, Mul, Div, Pow, Neg, Call };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind;
  double number = 0.0;      // Number
  int var_index = 0;        // Var (0-based)
  std::string call_name;    // Call
  ExprPtr a, b;             // operands; unary nodes use only a
};

// Single-variable expression in `x`.
class ScalarFn {
 public:
  ScalarFn() = default;
  explicit ScalarFn(ExprPtr root) : root_(std::move(root)) {}

  double operator()(double x) const;
  std::string str() const;
  const ExprPtr& root() const { return root_; }

  bool is_var() const;                          // g(x) = x
  bool is_square_of_var() const;                // g(x) = x^2
  std::optional<double> constant_value() const; // g constant

 private:
  ExprPtr root_;
};

// Expression in named variables y1..yk.
class MultiFn {
 public:
  MultiFn() = default;
  MultiFn(ExprPtr root, int arity) : root_(std::move(root)), arity_(arity) {}

  double operator()(std::span<const double> args) const;
  std::string str() const;
  int arity() const { return arity_; }
  const ExprPtr& root() const { return root_; }

 private:
  ExprPtr root_;
  int arity_ = 0;
};

// Parse with the fixed precedence ladder: ^ (right-assoc) > unary - > * / > + -.
// Unknown identifiers and implicit multiplication are rejected with a byte
// offset in the error message.
ScalarFn parse_scalar(const std::string& src);

// Variables are y1, y2, ...; arity is the highest index used, or the declared
// arity when given (uses beyond it are rejected).
MultiFn parse_multi(const std::string& src, int declared_arity = 0);

ScalarFn differentiate(const ScalarFn& f);

}  // namespace fmean
