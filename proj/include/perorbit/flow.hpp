#pragma once

#include <Eigen/Dense>

#include "perorbit/ode.hpp"
#include "perorbit/system.hpp"

namespace perorbit {

/// Trajectory of the unperturbed slow equation x' = psi1(t, x), x(t0) = xi,
/// integrated from t0 to t.
Trajectory flow_trajectory(const SystemSpec& system, double t, double t0, const Eigen::VectorXd& xi,
                           const IntegratorConfig& config = {});

/// Omega(t, t0, xi).
Eigen::VectorXd flow(const SystemSpec& system, double t, double t0, const Eigen::VectorXd& xi,
                     const IntegratorConfig& config = {});

struct FlowVariation {
  Eigen::VectorXd state;
  Eigen::MatrixXd variation;  // dOmega/dz (t, t0, xi)
};

/// Integrates the base flow together with Y' = dpsi1/dx(t, x(t)) Y, Y(t0) = I in
/// one augmented state of size k + k^2 (Y stored column-major after x).
Trajectory variational_trajectory(const SystemSpec& system, double t, double t0, const Eigen::VectorXd& xi,
                                  const IntegratorConfig& config = {});

FlowVariation flow_with_variation(const SystemSpec& system, double t, double t0, const Eigen::VectorXd& xi,
                                  const IntegratorConfig& config = {});

/// Unpacks an augmented (x, Y) state.
FlowVariation unpack_variation(std::span<const double> augmented, int k);

}  // namespace perorbit
