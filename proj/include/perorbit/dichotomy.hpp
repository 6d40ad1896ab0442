#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "perorbit/domain.hpp"
#include "perorbit/system.hpp"

namespace perorbit {

/// Spectral projectors of A onto the eigenvalues with positive (P_plus) and
/// negative (P_minus) real part. For y' = -A y, the P_plus range decays forward.
struct SpectralSplit {
  Eigen::MatrixXd P_plus;
  Eigen::MatrixXd P_minus;
  /// min |Re lambda| over the spectrum of A, from Gelfand decay fitting.
  double spectral_margin = 0.0;
  int iterations = 0;

  int dimension() const noexcept { return static_cast<int>(P_plus.rows()); }
};

struct DichotomyConstants {
  double c = 1.0;
  double delta = 0.0;
};

/// Matrix sign function by Newton iteration; P± = (I ± sign(A)) / 2.
SpectralSplit spectral_split(const Eigen::MatrixXd& A, double tol = 1e-12);

/// delta = 0.95 * margin; c is the sampled sup on a 256-point grid over
/// [0, horizon] (horizon <= 0 selects 10 / delta), clamped to >= 1.
DichotomyConstants dichotomy_constants(const SpectralSplit& split, const Eigen::MatrixXd& A, double horizon = 0.0);

/// max(|P_plus y|, |P_minus y|).
double dichotomy_norm(const SpectralSplit& split, const Eigen::VectorXd& y);

struct GrowthBounds {
  double M = 0.0;
  double gamma = 0.0;
  double probe_radius = 0.0;
  std::size_t samples = 0;
  /// Fraction of the last fresh validation sample that violated the bound.
  double validation_violation_rate = 0.0;
  int validation_rounds = 0;
  std::string region;
  bool sampled_evidence_only = true;
};

struct GrowthOptions {
  double inflation = 0.05;
  int max_validation_rounds = 3;
};

/// Sampled affine bound |psi2(t, x, y)| <= M + gamma |y| over t in [0, T],
/// x in the region and |y| <= probe radius (all norms dichotomy norms).
/// M is the sampled sup at y = 0 and gamma the smallest slope covering the
/// remaining samples; both are inflated afterwards.
GrowthBounds growth_bounds(const SystemSpec& system, const SpectralSplit& split, const DomainSpec& x_region,
                           double y_radius_probe, std::size_t samples, const GrowthOptions& options = {});

/// c M / (delta - gamma c).
double y_ball_radius(double c, double delta, double gamma, double M);

}  // namespace perorbit
