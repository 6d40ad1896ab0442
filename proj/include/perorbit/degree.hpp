#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "perorbit/domain.hpp"

namespace perorbit {

using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// Closed plane curve parameterized over [0, 1).
using PlaneCurve = std::function<Eigen::VectorXd(double)>;

struct DegreeResult {
  int degree = 0;
  double min_boundary_magnitude = 0.0;
  int refinement_levels = 0;
  /// Unrounded winding number or normalized flux.
  double raw = 0.0;
  std::size_t evaluations = 0;
};

/// deg(F, U, 0). k = 2: winding number along 64 boundary samples with adaptive
/// midpoint insertion; k = 3: solid-angle flux over a refined icosphere mesh.
/// zero_tol <= 0 selects 1e-8 (1 + max |F|) over the initial samples.
DegreeResult brouwer_degree(const VectorMap& F, const DomainSpec& domain, double zero_tol = 0.0);

/// Winding number of F along a closed polyline on the boundary of a k = 2
/// domain, traversed in the given order. Inserted midpoints are projected onto
/// the boundary.
DegreeResult winding_number(const VectorMap& F, const DomainSpec& domain, const std::vector<Eigen::VectorXd>& polyline,
                            double zero_tol = 0.0);

/// Winding number of F along a closed parameterized curve (not necessarily on
/// a domain boundary). Inserted points bisect the parameter interval.
DegreeResult winding_number(const VectorMap& F, const PlaneCurve& curve, std::size_t samples, double zero_tol = 0.0);

}  // namespace perorbit
