#include "perorbit/domain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "perorbit/error.hpp"

namespace perorbit {

namespace {

constexpr double kProjectTol = 1e-10;
constexpr int kProjectIters = 60;

// Lowest-level grid point of a level set; used as the star centre for k = 3.
Eigen::VectorXd deepest_point(const DomainSpec& d) {
  const int k = d.dimension();
  const int per_axis = k == 2 ? 65 : 21;
  Eigen::VectorXd best = 0.5 * (d.box_lo() + d.box_hi());
  double best_h = d.level(best);
  Eigen::VectorXi idx = Eigen::VectorXi::Zero(k);
  while (true) {
    Eigen::VectorXd x(k);
    for (int i = 0; i < k; ++i) {
      x(i) = d.box_lo()(i) + (d.box_hi()(i) - d.box_lo()(i)) * idx(i) / (per_axis - 1);
    }
    const double h = d.level(x);
    if (h < best_h) {
      best_h = h;
      best = x;
    }
    int i = 0;
    while (i < k && ++idx(i) == per_axis) idx(i++) = 0;
    if (i == k) break;
  }
  if (!(best_h < 0.0)) throw ContourNotFound("level set has no interior point on the search grid");
  return best;
}

// Boundary point along the ray center + r * dir (level sets assumed star-shaped about center).
Eigen::VectorXd radial_boundary_point(const DomainSpec& d, const Eigen::VectorXd& center, Eigen::VectorXd dir) {
  dir.normalize();
  if (d.is_ball()) return d.center() + d.radius() * dir;
  const double reach = (d.box_hi() - d.box_lo()).norm();
  const int steps = 512;
  double r0 = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double r1 = reach * i / steps;
    if (d.level(center + r1 * dir) >= 0.0) {
      double a = r0, b = r1;
      for (int it = 0; it < 200 && b - a > 1e-15 * reach; ++it) {
        const double mid = 0.5 * (a + b);
        (d.level(center + mid * dir) < 0.0 ? a : b) = mid;
      }
      return d.project(center + 0.5 * (a + b) * dir);
    }
    r0 = r1;
  }
  throw ContourNotFound("ray from the interior never leaves the level set");
}

BoundarySample trace_level_set_2d(const DomainSpec& d, std::size_t n) {
  const Eigen::VectorXd inside = deepest_point(d);
  const double width = (d.box_hi() - d.box_lo()).minCoeff();
  // March in +x1 to the boundary.
  Eigen::VectorXd dir(2);
  dir << 1.0, 0.0;
  const Eigen::VectorXd start = radial_boundary_point(d, inside, dir);

  const double ds = width / 400.0;
  std::vector<Eigen::VectorXd> path{start};
  double length = 0.0;
  Eigen::VectorXd p = start;
  const std::size_t max_steps = 400000;
  bool closed = false;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const Eigen::VectorXd g = d.level_gradient(p);
    const double gn = g.norm();
    if (!(gn > 0.0)) throw ContourNotFound("vanishing gradient while tracing the zero contour");
    Eigen::VectorXd tangent(2);
    tangent << -g(1) / gn, g(0) / gn;
    Eigen::VectorXd q = d.project(p + ds * tangent);
    length += (q - p).norm();
    p = q;
    if (length > 4.0 * ds && (p - start).norm() <= 1.5 * ds) {
      closed = true;
      break;
    }
    path.push_back(p);
  }
  if (!closed) throw ContourNotFound("zero contour did not close within the step budget");

  // Resample at equal arc length.
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i <= path.size(); ++i) {
    cum.push_back(cum.back() + (path[i % path.size()] - path[i - 1]).norm());
  }
  const double total = cum.back();
  BoundarySample out;
  out.k = 2;
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = total * static_cast<double>(i) / static_cast<double>(n);
    while (seg + 1 < cum.size() - 1 && cum[seg + 1] < s) ++seg;
    const double w = (s - cum[seg]) / std::max(cum[seg + 1] - cum[seg], 1e-300);
    const Eigen::VectorXd q = (1.0 - w) * path[seg] + w * path[(seg + 1) % path.size()];
    out.points.push_back(d.project(q));
  }
  return out;
}

}  // namespace

DomainSpec DomainSpec::ball(Eigen::VectorXd center, double radius) {
  const auto k = static_cast<int>(center.size());
  if (k != 2 && k != 3) throw InvalidArgument("degree", "DomainSpec", "only k = 2 and k = 3 domains are supported");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("degree", "DomainSpec", "radius must be positive");
  DomainSpec d;
  d.k_ = k;
  d.center_ = std::move(center);
  d.radius_ = radius;
  d.lo_ = d.center_.array() - radius;
  d.hi_ = d.center_.array() + radius;
  return d;
}

DomainSpec DomainSpec::level_set(Expr h, Eigen::VectorXd box_lo, Eigen::VectorXd box_hi) {
  const int k = h.signature().k;
  if (k != 2 && k != 3) throw InvalidArgument("degree", "DomainSpec", "only k = 2 and k = 3 domains are supported");
  if (h.signature().m != 0 || !h.signature().parameters.empty()) {
    throw InvalidArgument("degree", "DomainSpec", "level function must depend on x only");
  }
  if (box_lo.size() != k || box_hi.size() != k || !((box_hi - box_lo).array() > 0.0).all()) {
    throw InvalidArgument("degree", "DomainSpec", "bounding box must be non-degenerate and match k");
  }
  DomainSpec d;
  d.k_ = k;
  d.h_ = std::move(h);
  d.lo_ = std::move(box_lo);
  d.hi_ = std::move(box_hi);
  d.center_ = deepest_point(d);
  return d;
}

double DomainSpec::level(const Eigen::VectorXd& x) const {
  if (!h_) return (x - center_).norm() - radius_;
  double env[4] = {0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < k_; ++i) env[1 + i] = x(i);
  return h_->eval({env, static_cast<std::size_t>(1 + k_)});
}

Eigen::VectorXd DomainSpec::level_gradient(const Eigen::VectorXd& x) const {
  if (!h_) {
    const Eigen::VectorXd r = x - center_;
    const double n = r.norm();
    return n > 0.0 ? Eigen::VectorXd(r / n) : Eigen::VectorXd::Zero(k_);
  }
  double env[4] = {0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < k_; ++i) env[1 + i] = x(i);
  Eigen::VectorXd g(k_);
  bool nonsmooth = false;
  for (int i = 0; i < k_; ++i) g(i) = h_->eval_dual({env, static_cast<std::size_t>(1 + k_)}, 1 + i, nonsmooth).d;
  return g;
}

bool DomainSpec::contains(const Eigen::VectorXd& x) const {
  if (h_ && ((x - lo_).array() < 0.0 || (hi_ - x).array() < 0.0).any()) return false;
  return level(x) < 0.0;
}

double DomainSpec::boundary_distance(const Eigen::VectorXd& x) const {
  if (!h_) return std::fabs((x - center_).norm() - radius_);
  const double gn = level_gradient(x).norm();
  return gn > 0.0 ? std::fabs(level(x)) / gn : std::fabs(level(x));
}

Eigen::VectorXd DomainSpec::project(const Eigen::VectorXd& x) const {
  if (!h_) {
    Eigen::VectorXd r = x - center_;
    const double n = r.norm();
    if (n == 0.0) r = Eigen::VectorXd::Unit(k_, 0);
    else r /= n;
    return center_ + radius_ * r;
  }
  Eigen::VectorXd p = x;
  for (int it = 0; it < kProjectIters; ++it) {
    const double hv = level(p);
    if (std::fabs(hv) <= kProjectTol) return p;
    const Eigen::VectorXd g = level_gradient(p);
    const double g2 = g.squaredNorm();
    if (!(g2 > 0.0)) break;
    p -= hv * g / g2;
  }
  throw ContourNotFound("Newton projection onto the level set did not converge");
}

double DomainSpec::diameter() const { return h_ ? (hi_ - lo_).norm() : 2.0 * radius_; }

std::string DomainSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (!h_) {
    os << "ball(center=(";
    for (int i = 0; i < k_; ++i) os << (i ? "," : "") << center_(i);
    os << "), radius=" << radius_ << ")";
  } else {
    os << "level_set(h=" << print(*h_) << ")";
  }
  return os.str();
}

BoundarySample sample_boundary(const DomainSpec& domain, std::size_t n) {
  if (domain.dimension() == 2) {
    if (n < 16 && !(domain.is_ball() && n >= 3)) {
      throw InvalidArgument("degree", "sample_boundary", "k = 2 needs at least 16 boundary samples");
    }
    if (!domain.is_ball()) return trace_level_set_2d(domain, n);
    BoundarySample out;
    out.k = 2;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
      Eigen::VectorXd p(2);
      p << domain.center()(0) + domain.radius() * std::cos(a), domain.center()(1) + domain.radius() * std::sin(a);
      out.points.push_back(std::move(p));
    }
    return out;
  }
  if (n < 128) throw InvalidArgument("degree", "sample_boundary", "k = 3 needs at least 128 boundary triangles");
  int s = 0;
  while (20u * (1u << (2 * s)) < n) ++s;
  return icosphere_boundary(domain, s);
}

BoundarySample icosphere_boundary(const DomainSpec& domain, int subdivisions) {
  if (domain.dimension() != 3) throw InvalidArgument("degree", "icosphere_boundary", "needs a k = 3 domain");
  if (subdivisions < 0) throw InvalidArgument("degree", "icosphere_boundary", "subdivisions must be non-negative");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double raw[12][3] = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                             {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  const int faces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                            {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                            {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  const Eigen::VectorXd& c = domain.center();
  BoundarySample mesh;
  mesh.k = 3;
  for (const auto& v : raw) {
    Eigen::VectorXd d(3);
    d << v[0], v[1], v[2];
    mesh.points.push_back(radial_boundary_point(domain, c, d));
  }
  for (const auto& f : faces) {
    std::array<int, 3> tri{f[0], f[1], f[2]};
    Eigen::Vector3d a(raw[f[0]][0], raw[f[0]][1], raw[f[0]][2]);
    Eigen::Vector3d b(raw[f[1]][0], raw[f[1]][1], raw[f[1]][2]);
    Eigen::Vector3d e(raw[f[2]][0], raw[f[2]][1], raw[f[2]][2]);
    if ((b - a).cross(e - a).dot(a + b + e) < 0.0) std::swap(tri[1], tri[2]);
    mesh.triangles.push_back(tri);
  }
  for (int s = 0; s < subdivisions; ++s) mesh = refine_mesh(domain, mesh);
  return mesh;
}

BoundarySample refine_mesh(const DomainSpec& domain, const BoundarySample& mesh) {
  if (mesh.k != 3) throw InvalidArgument("degree", "refine_mesh", "needs a triangulated k = 3 sample");
  BoundarySample out;
  out.k = 3;
  out.points = mesh.points;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const Eigen::VectorXd dir = 0.5 * (mesh.points[static_cast<std::size_t>(a)] + mesh.points[static_cast<std::size_t>(b)]) -
                                domain.center();
    out.points.push_back(radial_boundary_point(domain, domain.center(), dir));
    const int idx = static_cast<int>(out.points.size()) - 1;
    midpoint.emplace(key, idx);
    return idx;
  };
  out.triangles.reserve(mesh.triangles.size() * 4);
  for (const auto& t : mesh.triangles) {
    const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }
  return out;
}

std::vector<Eigen::VectorXd> interior_grid(const DomainSpec& domain, int per_axis) {
  if (per_axis < 2) throw InvalidArgument("degree", "interior_grid", "need at least two points per axis");
  const int k = domain.dimension();
  std::vector<Eigen::VectorXd> out;
  Eigen::VectorXi idx = Eigen::VectorXi::Zero(k);
  while (true) {
    Eigen::VectorXd x(k);
    for (int i = 0; i < k; ++i) {
      x(i) = domain.box_lo()(i) + (domain.box_hi()(i) - domain.box_lo()(i)) * idx(i) / (per_axis - 1);
    }
    if (domain.contains(x)) out.push_back(std::move(x));
    int i = 0;
    while (i < k && ++idx(i) == per_axis) idx(i++) = 0;
    if (i == k) break;
  }
  return out;
}

Eigen::VectorXd boundary_point_along(const DomainSpec& domain, const Eigen::VectorXd& direction) {
  if (direction.size() != domain.dimension() || !(direction.norm() > 0.0)) {
    throw InvalidArgument("degree", "boundary_point_along", "direction must be a nonzero k-vector");
  }
  return radial_boundary_point(domain, domain.center(), direction);
}

}  // namespace perorbit
