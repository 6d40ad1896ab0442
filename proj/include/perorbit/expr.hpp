#pragma once

// Scalar expression language used to define the right-hand sides of a system.
//
// Grammar (see docs/grammar.md for the EBNF):
//   expr    := term { ("+" | "-") term }
//   term    := unary { ("*" | "/") unary }
//   unary   := "-" unary | power
//   power   := primary [ "^" unary ]          (right-associative)
//   primary := number | identifier | identifier "(" expr { "," expr } ")" | "(" expr ")"
//
// Variables are t, x1..xk, y1..ym and the declared parameter names; `pi` is a
// built-in constant. Functions: sin cos exp tanh sqrt abs (unary), norm (n-ary).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace perorbit {

/// Variable layout of an expression environment: slot 0 is t, then x1..xk,
/// y1..ym, then the parameters in declaration order.
struct Signature {
  int k = 0;
  int m = 0;
  std::vector<std::string> parameters;

  int slot_count() const { return 1 + k + m + static_cast<int>(parameters.size()); }
  int x_slot(int i) const { return 1 + i; }
  int y_slot(int i) const { return 1 + k + i; }
  std::optional<int> slot_of(std::string_view name) const;
  std::string slot_name(int slot) const;
};

enum class Op : std::uint8_t { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Tanh, Sqrt, Abs, Norm };

struct Node {
  Op op = Op::Const;
  int arg = 0;  // variable slot for Var, argument count for Norm
  double value = 0.0;
  std::uint32_t offset = 0;  // byte offset of the originating token
};

/// Value and directional derivative.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

/// Immutable expression tree stored in postfix order.
class Expr {
 public:
  Expr() = default;
  Expr(std::vector<Node> code, Signature signature);

  static Expr constant(double value, Signature signature);

  const Signature& signature() const noexcept { return signature_; }
  std::span<const Node> code() const noexcept { return code_; }

  /// Evaluates at `env`, laid out as described by Signature.
  double eval(std::span<const double> env) const;

  /// Forward-mode evaluation seeded with d(env[seed_slot]) = 1.
  /// Sets `nonsmooth` when a subderivative was substituted (abs or norm at 0).
  Dual eval_dual(std::span<const double> env, int seed_slot, bool& nonsmooth) const;

  bool depends_on(int slot) const;
  /// True when the tree contains abs, norm or sqrt.
  bool has_nonsmooth_nodes() const;

  /// Replaces every parameter reference by the matching constant; the result
  /// has a signature without parameters.
  Expr bind_parameters(std::span<const double> values) const;

 private:
  std::vector<Node> code_;
  Signature signature_;
  int max_depth_ = 0;
};

Expr parse(std::string_view source, const Signature& signature);

/// Prints a fully parenthesised form that parses back to an equivalent tree;
/// constants use 17 significant digits.
std::string print(const Expr& expr);

double eval(const Expr& expr, std::span<const double> env);

struct JacobianResult {
  Eigen::MatrixXd values;
  bool nonsmooth = false;
};

/// Rows follow `exprs`, columns follow `wrt` (environment slots).
JacobianResult jacobian(std::span<const Expr> exprs, std::span<const double> env, std::span<const int> wrt);

}  // namespace perorbit
