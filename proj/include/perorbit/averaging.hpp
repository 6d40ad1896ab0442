#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "perorbit/ode.hpp"
#include "perorbit/system.hpp"

namespace perorbit {

/// T-periodic fast path given as a truncated Fourier series
///   y(t) = mean + sum_n cos(2 pi n t / T) a_n + sin(2 pi n t / T) b_n.
/// The phase is reduced modulo T and quantized to 2^-36 of a period, which
/// makes y(t + T) == y(t) bitwise.
class PeriodicPath {
 public:
  PeriodicPath() = default;
  /// `cos_coeffs` and `sin_coeffs` are m x N. `norm_projector` is P_plus of the
  /// dichotomy split used for sup-norms; empty selects the Euclidean norm.
  PeriodicPath(double period, Eigen::VectorXd mean, Eigen::MatrixXd cos_coeffs, Eigen::MatrixXd sin_coeffs,
               Eigen::MatrixXd norm_projector = {});

  static PeriodicPath zero(double period, int m, int harmonics = 3);
  static PeriodicPath constant(double period, const Eigen::VectorXd& value, Eigen::MatrixXd norm_projector = {});

  int dimension() const noexcept { return static_cast<int>(mean_.size()); }
  int harmonics() const noexcept { return static_cast<int>(cos_.cols()); }
  double period() const noexcept { return period_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& cos_coefficients() const noexcept { return cos_; }
  const Eigen::MatrixXd& sin_coefficients() const noexcept { return sin_; }

  void evaluate(double t, std::span<double> out) const;
  Eigen::VectorXd operator()(double t) const;

  double norm(const Eigen::VectorXd& y) const;
  /// Maximum norm over a uniform 512-point grid.
  double grid_max() const noexcept { return grid_max_; }
  /// grid_max inflated by 2%.
  double sup_norm() const noexcept { return 1.02 * grid_max_; }

  PeriodicPath scaled(double factor) const;

 private:
  double period_ = 1.0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cos_, sin_;
  Eigen::MatrixXd projector_;
  double grid_max_ = 0.0;
};

/// z(t) for z' = dpsi1/dx(tau, Omega(tau,0,xi)) z + phi(tau, Omega(tau,0,xi), y(tau)), z(s) = 0.
Eigen::VectorXd eta(const SystemSpec& system, const PeriodicPath& y, double t, double s, const Eigen::VectorXd& xi,
                    const IntegratorConfig& config = {});

/// eta(T, s, xi) - eta(0, s, xi) from one base-flow integration.
Eigen::VectorXd displacement(const SystemSpec& system, const PeriodicPath& y, double s, const Eigen::VectorXd& xi,
                             const IntegratorConfig& config = {});

/// Displacement at every s in `s_values` from a single integration of
/// (x, X, eta(., 0)) over [0, T]:
///   D(s) = eta(T, 0) - (X(T) - I) X(s)^-1 eta(s, 0).
std::vector<Eigen::VectorXd> displacement_batch(const SystemSpec& system, const PeriodicPath& y,
                                                std::span<const double> s_values, const Eigen::VectorXd& xi,
                                                const IntegratorConfig& config = {});

/// Integral of X^-1(tau) f(tau) over [s - T, s] with X^-1 from the adjoint
/// W' = -W dpsi1/dx, W(0) = I, and f the T-periodic extension of
/// phi(tau, Omega(tau,0,xi), y(tau)). The linearization is extended
/// T-periodically as well, so X^-1(tau) = X(T) W(tau + T) for tau < 0.
Eigen::VectorXd displacement_via_lemma2(const SystemSpec& system, const PeriodicPath& y, double s,
                                        const Eigen::VectorXd& xi, const IntegratorConfig& config = {});

/// Delta_0(xi) = int_0^T W(tau) phi(tau, Omega(tau,0,xi), 0) dtau, integrated as
/// one augmented system (x, W, zeta).
Eigen::VectorXd averaged_map(const SystemSpec& system, const Eigen::VectorXd& xi, const IntegratorConfig& config = {});

/// xi -> displacement(system, y, s, xi).
struct DisplacementField {
  const SystemSpec* system = nullptr;
  const PeriodicPath* y = nullptr;
  double s = 0.0;
  IntegratorConfig config;

  Eigen::VectorXd operator()(const Eigen::VectorXd& xi) const { return displacement(*system, *y, s, xi, config); }
};

}  // namespace perorbit
