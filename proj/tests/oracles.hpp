#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perorbit/expr.hpp"
#include "perorbit/system.hpp"

namespace oracle {

// Boundary orbit of the planar example: x0(theta) = (sin theta, cos theta).
inline Eigen::Vector2d circle_point(double theta) { return {std::sin(theta), std::cos(theta)}; }

inline Eigen::Matrix2d K(double t, double theta) {
  const double c = std::cos(t + theta), s = std::sin(t + theta), e = std::exp(2.0 * t);
  Eigen::Matrix2d k;
  k << c, e * s, -s, e * c;
  return k;
}

inline Eigen::Matrix2d Y(double t, double tau, double theta) { return K(t, theta) * K(tau, theta).inverse(); }

// d psi / dx of the planar example's unperturbed field at x0(t + theta).
inline Eigen::Matrix2d dpsi_on_circle(double t, double theta) {
  const double s = std::sin(t + theta), c = std::cos(t + theta);
  Eigen::Matrix2d j;
  j << 2.0 * s * s, 2.0 * s * c + 1.0, 2.0 * s * c - 1.0, 2.0 * c * c;
  return j;
}

inline Eigen::Matrix2d rotation(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return r;
}

// Composite Simpson rule.
template <typename F>
double simpson(F&& f, double a, double b, int n = 4000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Random smooth expression in t, x1, x2 (nonzero denominators, bounded exponents).
class ExpressionGenerator {
 public:
  explicit ExpressionGenerator(std::uint64_t seed) : rng_(seed) {}

  std::string make(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
    switch (pick(rng_)) {
      case 0: return leaf_variable();
      case 1: return number();
      case 2: return "(" + make(depth - 1) + " + " + make(depth - 1) + ")";
      case 3: return "(" + make(depth - 1) + " - " + make(depth - 1) + ")";
      case 4: return "(" + make(depth - 1) + " * " + make(depth - 1) + ")";
      case 5: return "(" + make(depth - 1) + " / (2.5 + sin(" + make(depth - 1) + ")))";
      case 6: return "sin(" + make(depth - 1) + ")";
      case 7: return "cos(" + make(depth - 1) + ")";
      case 8: return "exp(tanh(" + make(depth - 1) + "))";
      default: return "(" + make(depth - 1) + ")^2";
    }
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::string leaf_variable() {
    static const char* names[] = {"t", "x1", "x2"};
    return names[std::uniform_int_distribution<int>(0, 2)(rng_)];
  }
  std::string number() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", std::uniform_real_distribution<double>(0.1, 2.0)(rng_));
    return buf;
  }

  std::mt19937_64 rng_;
};

// Random planar T = 2 pi system with one stable fast variable and smooth
// periodic coefficients of moderate size.
inline perorbit::SystemDefinition random_planar_system(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  auto num = [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "(%.4f)", u(rng));
    return std::string(buf);
  };
  perorbit::SystemDefinition def;
  def.k = 2;
  def.m = 1;
  def.period = 2.0 * std::numbers::pi;
  def.psi1 = {num() + "*x1 + " + num() + "*x2 + " + num() + "*sin(t) + " + num() + "*sin(x2)",
              num() + "*x1 + " + num() + "*x2 + " + num() + "*cos(2*t) + " + num() + "*x1*cos(t)"};
  def.phi = {num() + " + " + num() + "*cos(t)*x2 + " + num() + "*y1",
             num() + "*sin(t + x1) + " + num() + "*y1*x1"};
  def.psi2 = {"sin(x1) + 0.1*y1"};
  def.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  return def;
}

}  // namespace oracle
