#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "perorbit/dichotomy.hpp"
#include "perorbit/orbit.hpp"

using namespace perorbit;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// x' = eps (1 - x1, cos t - x2), y' = x1 - y: averaged zero at (1, 0).
SystemSpec relaxing_system() {
  SystemDefinition def;
  def.k = 2;
  def.m = 1;
  def.period = kTwoPi;
  def.phi = {"1 - x1", "cos(t) - x2 + 0.1*y1*sin(t)"};
  def.psi1 = {"0", "0"};
  def.psi2 = {"x1"};
  def.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  return SystemSpec::build(def);
}

const DomainSpec kBall = DomainSpec::ball(Eigen::Vector2d(0.8, 0.1), 0.5);

}  // namespace

TEST_CASE("averaged zero of a relaxing system") {
  const auto sys = relaxing_system();
  const Eigen::VectorXd z = averaged_zero(sys, kBall);
  CHECK(z(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(z(1)) < 1e-8);
}

TEST_CASE("fast periodic response of a forced scalar equation") {
  SystemDefinition def;
  def.k = 1;
  def.m = 1;
  def.period = kTwoPi;
  def.phi = {"0"};
  def.psi1 = {"0"};
  def.psi2 = {"cos(t)"};
  def.A = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const auto sys = SystemSpec::build(def);
  const auto split = spectral_split(sys.A());
  const auto dc = dichotomy_constants(split, sys.A());
  const auto sol = solve_fast_periodic(sys, split, dc, 0.0, [](double) { return Eigen::VectorXd::Zero(1).eval(); });
  for (double t : {0.0, 1.0, 2.5, 5.0}) {
    CHECK(sol.at(t)(0) == doctest::Approx((2.0 * std::cos(t) + std::sin(t)) / 5.0).epsilon(1e-4));
  }
  CHECK(sol.times.size() == 512);
  CHECK(sol.contraction_bound == 0.0);
}

TEST_CASE("shooting finds a periodic orbit") {
  const auto sys = relaxing_system();
  ShootOptions opt;
  opt.domain = &kBall;
  const auto orbit = shoot(sys, 0.1, {Eigen::Vector2d(1.0, 0.0), Eigen::VectorXd::Constant(1, 1.0)}, opt);
  CHECK(orbit.residual < 1e-8);
  CHECK(orbit.reverify_residual < 1e-7);
  CHECK(orbit.in_domain);
  const auto end = orbit.trajectory.final_state();
  for (int i = 0; i < 3; ++i) CHECK(end[static_cast<std::size_t>(i)] == doctest::Approx(orbit.u0(i)).epsilon(1e-7));
  std::ostringstream os;
  orbit.write_csv(os, 2, 1);
  CHECK(os.str().rfind("t,x1,x2,y1\n", 0) == 0);
}

TEST_CASE("solve and sweep") {
  const auto sys = relaxing_system();
  SolveConfig cfg;
  const auto ctx = prepare_solve(sys, kBall, cfg);
  CHECK(ctx.xi_star(0) == doctest::Approx(1.0).epsilon(1e-8));
  const auto orbit = solve_orbit(sys, kBall, 0.05, ctx, cfg);
  CHECK(orbit.seed_source == "averaged_zero");
  CHECK(orbit.residual < 1e-8);

  const auto sweep = continue_in_eps(sys, kBall, {0.04, 0.02, 0.01}, cfg);
  REQUIRE(sweep.entries.size() == 3);
  for (const auto& e : sweep.entries) CHECK(e.orbit.has_value());
  CHECK(sweep.diameters_strictly_decreasing);
  CHECK(sweep.slope == doctest::Approx(1.0).epsilon(0.05));
  std::ostringstream os;
  write_sweep_csv(os, sweep);
  CHECK(os.str().rfind("eps,residual,z_diameter,y_sup,iters\n", 0) == 0);
}
