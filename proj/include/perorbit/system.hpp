#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "perorbit/expr.hpp"

namespace perorbit {

/// Textual definition of a system
///   x' = eps * phi(t, x, y) + psi1(t, x)
///   y' = psi2(t, x, y) - A y
/// before parsing.
struct SystemDefinition {
  int k = 0;
  int m = 0;
  double period = 0.0;
  std::vector<std::string> phi;
  std::vector<std::string> psi1;
  std::vector<std::string> psi2;
  Eigen::MatrixXd A;
  std::vector<std::pair<std::string, double>> parameters;
};

/// Parsed and validated system. Parameters are folded into the expressions, so
/// every environment is [t, x1..xk, y1..ym].
class SystemSpec {
 public:
  /// Parses every expression and validates dimensions, variable usage and
  /// sampled T-periodicity in t.
  static SystemSpec build(const SystemDefinition& def);

  SystemSpec(int k, int m, double period, std::vector<Expr> phi, std::vector<Expr> psi1, std::vector<Expr> psi2,
             Eigen::MatrixXd A, std::vector<std::pair<std::string, double>> parameters = {});

  int k() const noexcept { return k_; }
  int m() const noexcept { return m_; }
  double period() const noexcept { return period_; }
  const Eigen::MatrixXd& A() const noexcept { return A_; }
  const std::vector<Expr>& phi() const noexcept { return phi_; }
  const std::vector<Expr>& psi1() const noexcept { return psi1_; }
  const std::vector<Expr>& psi2() const noexcept { return psi2_; }
  const std::vector<std::pair<std::string, double>>& parameters() const noexcept { return parameters_; }
  /// Non-fatal validation findings (e.g. non-smooth nodes in psi1).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  void psi1(double t, std::span<const double> x, std::span<double> out) const;
  /// Column-major k*k Jacobian of psi1 with respect to x. Returns true when a
  /// subderivative was used.
  bool psi1_jacobian(double t, std::span<const double> x, std::span<double> out) const;
  void phi(double t, std::span<const double> x, std::span<const double> y, std::span<double> out) const;
  void psi2(double t, std::span<const double> x, std::span<const double> y, std::span<double> out) const;

  /// Right-hand side of the full system at perturbation size eps; u = (x, y).
  void full_rhs(double eps, double t, std::span<const double> u, std::span<double> out) const;
  /// Column-major (k+m)^2 Jacobian of full_rhs with respect to u.
  void full_jacobian(double eps, double t, std::span<const double> u, std::span<double> out) const;

  /// Same system with every phi component replaced.
  SystemSpec with_phi(std::vector<Expr> phi) const;

 private:
  void validate();

  int k_ = 0;
  int m_ = 0;
  double period_ = 0.0;
  std::vector<Expr> phi_;
  std::vector<Expr> psi1_;
  std::vector<Expr> psi2_;
  Eigen::MatrixXd A_;
  std::vector<std::pair<std::string, double>> parameters_;
  std::vector<std::string> warnings_;
};

}  // namespace perorbit
