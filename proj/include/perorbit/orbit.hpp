#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perorbit/dichotomy.hpp"
#include "perorbit/domain.hpp"
#include "perorbit/ode.hpp"
#include "perorbit/system.hpp"

namespace perorbit {

struct AveragedZeroConfig {
  int grid_per_axis = 33;
  int max_newton_steps = 50;
  int max_halvings = 8;
  double fd_step = 1e-6;
  double tol = 1e-10;
  IntegratorConfig integrator{1e-12, 1e-14};
  /// Grid scan and winding localization only need coarse values.
  IntegratorConfig scan_integrator{1e-9, 1e-11};
};

/// Zero of the averaged map inside U: grid scan, then damped Newton with a
/// central-difference Jacobian. For k = 2, if Newton fails, star-shaped cells
/// with nonzero winding number are bisected until Newton converges from the
/// centre of the surviving cell.
Eigen::VectorXd averaged_zero(const SystemSpec& system, const DomainSpec& domain, const AveragedZeroConfig& config = {});

/// T-periodic fast response on a uniform grid.
struct FastPeriodicSolution {
  double period = 0.0;
  std::vector<double> times;  // t_i = i T / n, i = 0..n-1
  Eigen::MatrixXd values;     // m x n
  int iterations = 0;
  double contraction_bound = 0.0;  // c gamma / delta
  std::vector<double> differences;  // sup-norm change per Picard step

  int dimension() const noexcept { return static_cast<int>(values.rows()); }
  /// Periodic piecewise-linear interpolation.
  Eigen::VectorXd at(double t) const;
};

struct FastSolveOptions {
  double tol = 1e-12;
  int max_iterations = 200;
  int nodes = 512;
};

/// Picard iteration on the dichotomy Green's-function form of
/// y' = psi2(t, x(t), y) - A y. Each sweep integrates the exponential kernel
/// exactly against the piecewise-linear interpolant of psi2 on the grid.
FastPeriodicSolution solve_fast_periodic(const SystemSpec& system, const SpectralSplit& split,
                                         const DichotomyConstants& constants, double gamma,
                                         const std::function<Eigen::VectorXd(double)>& x_path,
                                         const FastSolveOptions& options = {});

struct PeriodicOrbit {
  double epsilon = 0.0;
  Eigen::VectorXd u0;
  Trajectory trajectory;  // full state (x, y) over [0, T] from u0
  double residual = 0.0;  // |u(T) - u(0)| at the accepted Newton iterate
  double reverify_residual = 0.0;  // from the independent re-integration in `trajectory`
  std::vector<double> z_times;
  std::vector<Eigen::VectorXd> z_samples;  // Omega(0, t, x(t))
  double z_diameter = 0.0;
  bool in_domain = false;
  double y_sup = 0.0;
  double r_y = std::numeric_limits<double>::quiet_NaN();
  bool y_within_bound = true;
  int iterations = 0;
  /// "averaged_zero", "warm_start" or "residual_scan".
  std::string seed_source;
  std::string seed_note;

  /// CSV `t,x1..xk,y1..ym` on 256 uniform samples of [0, T).
  void write_csv(std::ostream& os, int k, int m) const;
};

struct ShootGuess {
  Eigen::VectorXd xi;
  Eigen::VectorXd y0;
};

struct ShootOptions {
  IntegratorConfig integrator{1e-12, 1e-14};
  double tol = 1e-8;
  int max_iterations = 25;
  int max_halvings = 8;
  double condition_limit = 1e12;
  int z_samples = 256;
  const DomainSpec* domain = nullptr;
  const SpectralSplit* split = nullptr;
  double r_y = std::numeric_limits<double>::quiet_NaN();
};

/// Newton on u0 = P_eps(u0) for the time-T map of the full system.
PeriodicOrbit shoot(const SystemSpec& system, double epsilon, const ShootGuess& guess, const ShootOptions& options = {});

/// Everything needed to go from a system to orbits.
struct SolveConfig {
  AveragedZeroConfig averaged;
  FastSolveOptions fast;
  ShootOptions shoot;
  std::size_t growth_samples = 1000;
  double growth_probe = 1.0;
  int flow_grid = 33;
  double flow_inflation = 0.02;
  /// When Newton fails from the primary seed, interior grid points (per axis)
  /// are ranked by period-map residual and the best few are tried; 0 disables.
  int fallback_grid = 17;
  int fallback_tries = 3;
};

/// Dichotomy data shared by the solves of one system.
struct SolveContext {
  std::optional<SpectralSplit> split;
  DichotomyConstants constants;
  double gamma = 0.0;
  double r_y = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd xi_star;
  ShootGuess guess;
};

/// Averaged zero, fast response along Omega(t, 0, xi*), and the radius r_y.
SolveContext prepare_solve(const SystemSpec& system, const DomainSpec& domain, const SolveConfig& config);

PeriodicOrbit solve_orbit(const SystemSpec& system, const DomainSpec& domain, double epsilon, const SolveContext& context,
                          const SolveConfig& config, const std::optional<ShootGuess>& warm_start = std::nullopt);

struct SweepEntry {
  double epsilon = 0.0;
  std::optional<PeriodicOrbit> orbit;
  std::string error;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  /// Least-squares slope of log z_diameter against log eps over successful entries.
  double slope = std::numeric_limits<double>::quiet_NaN();
  bool slope_is_heuristic = true;
  bool diameters_strictly_decreasing = false;
};

SweepResult continue_in_eps(const SystemSpec& system, const DomainSpec& domain, const std::vector<double>& eps_list,
                            const SolveConfig& config = {});

/// CSV `eps,residual,z_diameter,y_sup,iters`.
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);

}  // namespace perorbit
