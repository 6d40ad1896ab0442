#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "perorbit/error.hpp"
#include "perorbit/flow.hpp"
#include "perorbit/ode.hpp"
#include "perorbit/scenarios.hpp"

using namespace perorbit;

TEST_CASE("exponential decay forward and backward") {
  OdeProblem p;
  p.dimension = 1;
  p.rhs = [](double, std::span<const double> u, std::span<double> du) { du[0] = -u[0]; };
  p.t_start = 0.0;
  p.t_end = 2.0;
  p.initial_state = {1.0};
  const auto fwd = integrate(p, {1e-12, 1e-14});
  CHECK(fwd.final_state()[0] == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
  CHECK(fwd.at(1.0)[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
  CHECK(fwd.time(0) == 0.0);
  CHECK(fwd.t_end() == 2.0);

  p.t_start = 2.0;
  p.t_end = 0.0;
  p.initial_state = {std::exp(-2.0)};
  const auto bwd = integrate(p, {1e-12, 1e-14});
  CHECK(bwd.final_state()[0] == doctest::Approx(1.0).epsilon(1e-10));
  for (std::size_t i = 1; i < bwd.size(); ++i) CHECK(bwd.time(i) < bwd.time(i - 1));
}

TEST_CASE("harmonic oscillator dense output") {
  OdeProblem p;
  p.dimension = 2;
  p.rhs = [](double, std::span<const double> u, std::span<double> du) {
    du[0] = u[1];
    du[1] = -u[0];
  };
  p.t_end = 2.0 * std::numbers::pi;
  p.initial_state = {0.0, 1.0};
  const auto tr = integrate(p, {1e-11, 1e-13});
  for (double t : {0.3, 1.7, 4.1, 6.0}) {
    const auto u = tr.at(t);
    CHECK(u[0] == doctest::Approx(std::sin(t)).epsilon(1e-7));
    CHECK(u[1] == doctest::Approx(std::cos(t)).epsilon(1e-7));
  }
  std::ostringstream os;
  tr.write_csv(os);
  CHECK(os.str().rfind("t,u1,u2\n", 0) == 0);
}

TEST_CASE("integration failures are typed") {
  OdeProblem p;
  p.dimension = 1;
  p.rhs = [](double, std::span<const double> u, std::span<double> du) { du[0] = u[0] * u[0]; };
  p.t_end = 2.0;
  p.initial_state = {1.0};
  IntegratorConfig c;
  c.state_bound = 1e6;
  CHECK_THROWS_AS(integrate(p, c), IntegrationError);
}

TEST_CASE("boundary orbit of the planar example") {
  const auto sc = build_scenario("paper_example");
  for (double theta : {0.0, 0.7, 2.0, 4.5}) {
    const Eigen::VectorXd xi = oracle::circle_point(theta);
    for (double t : {0.5, 1.0, 2.0}) {
      const Eigen::VectorXd x = flow(sc.system, t, 0.0, xi, {1e-13, 1e-15});
      CHECK((x - oracle::circle_point(t + theta)).norm() < 1e-8);
    }
  }
}

TEST_CASE("variational flow matches the closed-form fundamental matrix") {
  const auto sc = build_scenario("paper_example");
  for (double theta : {0.0, 1.3, 3.7}) {
    const auto fv = flow_with_variation(sc.system, 1.5, 0.0, oracle::circle_point(theta), {1e-13, 1e-15});
    const Eigen::Matrix2d expected = oracle::Y(1.5, 0.0, theta);
    CHECK((fv.variation - expected).norm() / expected.norm() < 1e-7);
  }
}

TEST_CASE("flow composes with its inverse") {
  const auto sc = build_scenario("paper_example");
  const Eigen::Vector2d xi(0.2, -0.3);
  const Eigen::VectorXd there = flow(sc.system, 2.0, 0.0, xi, {1e-12, 1e-14});
  const Eigen::VectorXd back = flow(sc.system, 0.0, 2.0, there, {1e-12, 1e-14});
  CHECK((back - xi).norm() < 1e-8);
}
