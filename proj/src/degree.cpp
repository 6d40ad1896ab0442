#include "perorbit/degree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "perorbit/error.hpp"

namespace perorbit {

namespace {

constexpr int kMaxLevels = 12;
constexpr double kQuarterTurn = std::numbers::pi / 2.0;

struct Sample {
  Eigen::VectorXd point;
  Eigen::VectorXd value;
  int level = 0;  // refinement depth of the segment starting here
  double param = 0.0;
};

Eigen::VectorXd checked_eval(const VectorMap& F, const Eigen::VectorXd& x, int k) {
  Eigen::VectorXd v = F(x);
  if (v.size() != k) throw InvalidArgument("degree", "brouwer_degree", "map must return a k-vector");
  if (!v.allFinite()) throw InvalidArgument("degree", "brouwer_degree", "map returned non-finite values on the boundary");
  return v;
}

double resolve_tol(double zero_tol, double max_norm) { return zero_tol > 0.0 ? zero_tol : 1e-8 * (1.0 + max_norm); }

void require_nonzero(double magnitude, double tol) {
  if (magnitude <= tol) {
    throw ZeroOnBoundary(magnitude, "map vanishes on the boundary (|F| = " + std::to_string(magnitude) + ")");
  }
}

double angle_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::atan2(a(0) * b(1) - a(1) * b(0), a(0) * b(0) + a(1) * b(1));
}

// Signed solid angle of the spherical triangle spanned by three unit vectors.
double solid_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const double num = a.dot(b.cross(c));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

DegreeResult degree_3d(const VectorMap& F, const DomainSpec& domain, double zero_tol) {
  BoundarySample mesh = sample_boundary(domain, 128);
  std::vector<Eigen::Vector3d> unit;
  DegreeResult out;
  out.min_boundary_magnitude = std::numeric_limits<double>::infinity();
  double tol = zero_tol;
  auto extend = [&]() {
    double max_norm = 0.0;
    std::vector<double> norms;
    for (std::size_t i = unit.size(); i < mesh.points.size(); ++i) {
      const Eigen::VectorXd v = checked_eval(F, mesh.points[i], 3);
      ++out.evaluations;
      const double n = v.norm();
      norms.push_back(n);
      max_norm = std::max(max_norm, n);
      out.min_boundary_magnitude = std::min(out.min_boundary_magnitude, n);
      unit.emplace_back(n > 0.0 ? Eigen::Vector3d(v / n) : Eigen::Vector3d::Zero());
    }
    if (tol <= 0.0) tol = resolve_tol(zero_tol, max_norm);
    for (double n : norms) require_nonzero(n, tol);
  };
  auto flux = [&]() {
    double total = 0.0;
    for (const auto& t : mesh.triangles) {
      total += solid_angle(unit[static_cast<std::size_t>(t[0])], unit[static_cast<std::size_t>(t[1])],
                           unit[static_cast<std::size_t>(t[2])]);
    }
    return total / (4.0 * std::numbers::pi);
  };
  extend();
  double previous = flux();
  for (int level = 1; level <= kMaxLevels; ++level) {
    mesh = refine_mesh(domain, mesh);
    extend();
    const double current = flux();
    if (std::fabs(current - previous) <= 0.05 && std::fabs(current - std::round(current)) <= 0.05) {
      out.raw = current;
      out.degree = static_cast<int>(std::lround(current));
      out.refinement_levels = level;
      return out;
    }
    previous = current;
  }
  throw NonConvergent("degree", "brouwer_degree", "solid-angle flux did not settle within 12 refinement levels");
}

}  // namespace

namespace {

// Adaptive winding sum over a closed ring. `midpoint(a, b)` returns the point
// inserted between two neighbouring samples together with its curve parameter.
using Midpoint = std::function<std::pair<Eigen::VectorXd, double>(const Sample&, const Sample&)>;

DegreeResult wind(const VectorMap& F, std::vector<Sample> ring, const Midpoint& midpoint, double zero_tol) {
  DegreeResult out;
  double max_norm = 0.0;
  for (auto& s : ring) {
    s.value = checked_eval(F, s.point, 2);
    max_norm = std::max(max_norm, s.value.norm());
  }
  out.evaluations = ring.size();
  const double tol = resolve_tol(zero_tol, max_norm);
  out.min_boundary_magnitude = std::numeric_limits<double>::infinity();
  for (const auto& s : ring) {
    out.min_boundary_magnitude = std::min(out.min_boundary_magnitude, s.value.norm());
    require_nonzero(s.value.norm(), tol);
  }

  bool refined = true;
  while (refined) {
    refined = false;
    std::vector<Sample> next;
    next.reserve(ring.size() * 2);
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Sample& a = ring[i];
      const Sample& b = ring[(i + 1) % ring.size()];
      next.push_back(a);
      if (std::fabs(angle_between(a.value, b.value)) < kQuarterTurn) continue;
      if (a.level >= kMaxLevels) {
        throw NonConvergent("degree", "brouwer_degree", "angle increments stay >= pi/2 after 12 refinement levels");
      }
      auto [mid, param] = midpoint(a, b);
      Sample s{mid, checked_eval(F, mid, 2), a.level + 1, param};
      ++out.evaluations;
      const double n = s.value.norm();
      out.min_boundary_magnitude = std::min(out.min_boundary_magnitude, n);
      require_nonzero(n, tol);
      next.back().level = a.level + 1;
      out.refinement_levels = std::max(out.refinement_levels, a.level + 1);
      next.push_back(std::move(s));
      refined = true;
    }
    ring = std::move(next);
  }

  double total = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) total += angle_between(ring[i].value, ring[(i + 1) % ring.size()].value);
  out.raw = total / (2.0 * std::numbers::pi);
  const double rounded = std::round(out.raw);
  if (std::fabs(out.raw - rounded) > 0.01) {
    throw NonConvergent("degree", "brouwer_degree", "winding sum is not within 0.01 of an integer");
  }
  out.degree = static_cast<int>(rounded);
  return out;
}

}  // namespace

DegreeResult winding_number(const VectorMap& F, const DomainSpec& domain, const std::vector<Eigen::VectorXd>& polyline,
                            double zero_tol) {
  if (domain.dimension() != 2) throw InvalidArgument("degree", "winding_number", "needs a k = 2 domain");
  if (polyline.size() < 3) throw InvalidArgument("degree", "winding_number", "polyline needs at least 3 points");
  std::vector<Sample> ring;
  ring.reserve(polyline.size());
  for (const auto& p : polyline) {
    if (p.size() != 2) throw InvalidArgument("degree", "winding_number", "polyline points must be 2-vectors");
    ring.push_back(Sample{p, {}, 0, 0.0});
  }
  return wind(F, std::move(ring),
              [&domain](const Sample& a, const Sample& b) {
                return std::make_pair(domain.project(0.5 * (a.point + b.point)), 0.0);
              },
              zero_tol);
}

DegreeResult winding_number(const VectorMap& F, const PlaneCurve& curve, std::size_t samples, double zero_tol) {
  if (samples < 3) throw InvalidArgument("degree", "winding_number", "curve needs at least 3 samples");
  std::vector<Sample> ring;
  ring.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(samples);
    ring.push_back(Sample{curve(s), {}, 0, s});
  }
  return wind(F, std::move(ring),
              [&curve](const Sample& a, const Sample& b) {
                const double end = b.param > a.param ? b.param : b.param + 1.0;
                double s = 0.5 * (a.param + end);
                if (s >= 1.0) s -= 1.0;
                return std::make_pair(curve(s), s);
              },
              zero_tol);
}

DegreeResult brouwer_degree(const VectorMap& F, const DomainSpec& domain, double zero_tol) {
  if (domain.dimension() == 2) return winding_number(F, domain, sample_boundary(domain, 64).points, zero_tol);
  if (domain.dimension() == 3) return degree_3d(F, domain, zero_tol);
  throw InvalidArgument("degree", "brouwer_degree", "only k = 2 and k = 3 are supported");
}

}  // namespace perorbit
