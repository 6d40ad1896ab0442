#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "perorbit/averaging.hpp"
#include "perorbit/scenarios.hpp"

using namespace perorbit;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const IntegratorConfig kTight{1e-12, 1e-14};

}  // namespace

TEST_CASE("periodic path is bitwise periodic") {
  Eigen::MatrixXd c(1, 2), s(1, 2);
  c << 0.3, -0.1;
  s << 0.2, 0.05;
  const PeriodicPath y(kTwoPi, Eigen::VectorXd::Constant(1, 0.5), c, s);
  for (double t : {0.0, 0.1, 1.234, 5.0, 100.0}) {
    CHECK(y(t + kTwoPi)(0) == y(t)(0));
    CHECK(y(t - kTwoPi)(0) == y(t)(0));
  }
  CHECK(y(0.0)(0) == doctest::Approx(0.5 + 0.3 - 0.1));
  CHECK(y.sup_norm() == doctest::Approx(1.02 * y.grid_max()));
  CHECK(y.scaled(2.0)(1.0)(0) == doctest::Approx(2.0 * y(1.0)(0)));
  CHECK(PeriodicPath::zero(kTwoPi, 2).grid_max() == 0.0);
}

TEST_CASE("averaged map on the invariant circle is tangential with magnitude 2 pi") {
  const auto sc = build_scenario("paper_example");
  for (double theta : {0.0, 1.0, 2.5, 4.0}) {
    const Eigen::VectorXd xi = oracle::circle_point(theta);
    const Eigen::VectorXd d = averaged_map(sc.system, xi, kTight);
    CHECK(d.norm() == doctest::Approx(kTwoPi).epsilon(1e-6));
    CHECK(std::abs(d.dot(xi)) < 1e-6);
  }
}

TEST_CASE("batched, single and adjoint displacements agree") {
  const auto sc = build_scenario("paper_example");
  Eigen::MatrixXd c(1, 1), s(1, 1);
  c << 0.2;
  s << -0.1;
  const PeriodicPath y(kTwoPi, Eigen::VectorXd::Constant(1, 0.3), c, s);
  const Eigen::Vector2d xi(0.3, 0.4);
  const std::vector<double> ss{0.0, 1.0, 3.0};
  const auto batch = displacement_batch(sc.system, y, ss, xi, kTight);
  REQUIRE(batch.size() == ss.size());
  for (std::size_t i = 0; i < ss.size(); ++i) {
    const Eigen::VectorXd single = displacement(sc.system, y, ss[i], xi, kTight);
    const Eigen::VectorXd adj = displacement_via_lemma2(sc.system, y, ss[i], xi, kTight);
    const double scale = std::max(1.0, single.norm());
    CHECK((batch[i] - single).norm() / scale < 1e-6);
    CHECK((adj - single).norm() / scale < 1e-6);
  }
}

TEST_CASE("displacement with a trivial slow flow is the forcing integral") {
  SystemDefinition def;
  def.k = 1;
  def.m = 1;
  def.period = kTwoPi;
  def.phi = {"cos(t)^2 + y1"};
  def.psi1 = {"0"};
  def.psi2 = {"0"};
  def.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const auto sys = SystemSpec::build(def);
  const auto y = PeriodicPath::constant(kTwoPi, Eigen::VectorXd::Constant(1, 0.25));
  const Eigen::VectorXd xi = Eigen::VectorXd::Constant(1, 0.7);
  CHECK(displacement(sys, y, 0.5, xi, kTight)(0) == doctest::Approx(std::numbers::pi + 0.25 * kTwoPi));
  CHECK(averaged_map(sys, xi, kTight)(0) == doctest::Approx(std::numbers::pi));
  CHECK(eta(sys, y, 0.5, 0.5, xi, kTight)(0) == doctest::Approx(0.0));
}
