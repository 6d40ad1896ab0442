#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

namespace perorbit {

using RhsFunction = std::function<void(double t, std::span<const double> u, std::span<double> du)>;

struct OdeProblem {
  std::size_t dimension = 0;
  RhsFunction rhs;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<double> initial_state;
};

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0: automatic
  double max_step = 0.0;      // 0: |t_end - t_start|
  std::size_t max_steps = 200000;
  // Abort with OutOfBounds when any component exceeds this magnitude.
  double state_bound = std::numeric_limits<double>::infinity();
};

/// Dense-output solution of an initial-value problem. The mesh is strictly
/// monotone in the direction of integration.
class Trajectory {
 public:
  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return times_.size(); }
  double time(std::size_t i) const { return times_[i]; }
  std::span<const double> state(std::size_t i) const { return {states_.data() + i * dim_, dim_}; }
  double t_start() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  std::span<const double> final_state() const { return state(size() - 1); }

  /// Quartic continuous extension of the 5(4) pair.
  void evaluate(double t, std::span<double> out) const;
  std::vector<double> at(double t) const;

  std::size_t accepted_steps() const noexcept { return accepted_; }
  std::size_t rejected_steps() const noexcept { return rejected_; }
  std::size_t rhs_evaluations() const noexcept { return evaluations_; }

  /// CSV with header t,u1,...,un and 17 significant digits.
  void write_csv(std::ostream& os) const;

 private:
  friend Trajectory integrate(const OdeProblem&, const IntegratorConfig&);

  std::size_t dim_ = 0;
  std::vector<double> times_;
  std::vector<double> states_;
  std::vector<double> dense_;  // per interval: 4 * dim coefficients
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
  std::size_t evaluations_ = 0;
};

/// Dormand-Prince 5(4) with PI step-size control. Backward problems
/// (t_end < t_start) are integrated through time reversal of the right-hand side.
Trajectory integrate(const OdeProblem& problem, const IntegratorConfig& config = {});

}  // namespace perorbit
