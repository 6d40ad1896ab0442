#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perorbit/expr.hpp"

namespace perorbit {

/// Open bounded set U in R^k (k = 2 or 3): a ball, or {h < 0} inside a box.
class DomainSpec {
 public:
  static DomainSpec ball(Eigen::VectorXd center, double radius);
  /// `h` uses the variables x1..xk (signature (k, 0)); h < 0 inside.
  static DomainSpec level_set(Expr h, Eigen::VectorXd box_lo, Eigen::VectorXd box_hi);

  int dimension() const noexcept { return k_; }
  bool is_ball() const noexcept { return !h_.has_value(); }
  const Eigen::VectorXd& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  const Eigen::VectorXd& box_lo() const noexcept { return lo_; }
  const Eigen::VectorXd& box_hi() const noexcept { return hi_; }

  /// Signed level: negative inside, zero on the boundary.
  double level(const Eigen::VectorXd& x) const;
  Eigen::VectorXd level_gradient(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x) const;
  /// Distance-like measure of how far x lies from the boundary (exact for balls).
  double boundary_distance(const Eigen::VectorXd& x) const;
  /// Nearest boundary point (radial for balls, Newton along the gradient for level sets).
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  /// Ball: 2r. Level set: diagonal of the bounding box (an upper bound).
  double diameter() const;

  std::string describe() const;

 private:
  int k_ = 0;
  Eigen::VectorXd center_;
  double radius_ = 0.0;
  std::optional<Expr> h_;
  Eigen::VectorXd lo_, hi_;
};

/// Boundary sample: k = 2 gives a closed counter-clockwise polyline (`points`,
/// closure implicit); k = 3 adds an outward-oriented triangle list.
struct BoundarySample {
  int k = 0;
  std::vector<Eigen::VectorXd> points;
  std::vector<std::array<int, 3>> triangles;
};

/// n >= 16 for k = 2; n >= 128 for k = 3 (smallest icosphere with >= n triangles).
BoundarySample sample_boundary(const DomainSpec& domain, std::size_t n);

/// Icosahedron subdivided `subdivisions` times (20 * 4^s triangles) and mapped
/// onto the boundary of a k = 3 domain.
BoundarySample icosphere_boundary(const DomainSpec& domain, int subdivisions);

/// Subdivides every triangle of a k = 3 sample into four, mapping new edge
/// midpoints onto the boundary.
BoundarySample refine_mesh(const DomainSpec& domain, const BoundarySample& mesh);

/// Boundary point on the ray from center() along `direction` (level sets are
/// assumed star-shaped about their center).
Eigen::VectorXd boundary_point_along(const DomainSpec& domain, const Eigen::VectorXd& direction);

/// Points of a uniform per-axis grid over the bounding box that lie strictly inside U.
std::vector<Eigen::VectorXd> interior_grid(const DomainSpec& domain, int per_axis);

}  // namespace perorbit
