#pragma once

#include <Eigen/Dense>

namespace perorbit::linalg {

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// Induced 2-norm (largest singular value).
double norm2(const Eigen::MatrixXd& a);

/// Induced infinity-norm (maximum absolute row sum).
double norm_inf(const Eigen::MatrixXd& a);

/// 2-norm condition number; infinity for singular input.
double condition_number(const Eigen::MatrixXd& a);

}  // namespace perorbit::linalg
