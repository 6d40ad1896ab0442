#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "perorbit/error.hpp"
#include "perorbit/scenarios.hpp"

using namespace perorbit;

TEST_CASE("catalog") {
  const auto& cat = scenario_catalog();
  REQUIRE(cat.size() == 3);
  CHECK(cat[0].name == "paper_example");
  CHECK(cat[1].name == "paper_example_g0");
  CHECK(cat[2].name == "hale");
  CHECK_THROWS_AS(build_scenario("nope"), InvalidArgument);
  CHECK_THROWS_AS(build_scenario("hale", {{"radius", 4.0}}), InvalidArgument);
  CHECK_THROWS_AS(build_scenario("paper_example", {{"gamma", 1.0}}), InvalidArgument);
  const auto sc = build_scenario("paper_example", {{"a", 2.0}});
  CHECK(sc.system.A()(0, 0) == 2.0);
  CHECK(sc.expected_degree == 1);
}

TEST_CASE("closed-form fundamental matrices") {
  for (double theta : {0.0, 0.4, 2.0}) {
    for (double t : {0.0, 0.7, 1.9}) {
      CHECK((closed_form_K(t, theta) - oracle::K(t, theta)).norm() < 1e-14);
      const double h = 1e-5;
      const Eigen::Matrix2d fd = (oracle::K(t + h, theta) - oracle::K(t - h, theta)) / (2 * h);
      CHECK((closed_form_K_dot(t, theta) - fd).norm() < 1e-6 * std::max(1.0, fd.norm()));
      CHECK((closed_form_K_dot(t, theta) - oracle::dpsi_on_circle(t, theta) * oracle::K(t, theta)).norm() < 1e-10);
      CHECK((closed_form_Y(t, 0.3, theta) - oracle::Y(t, 0.3, theta)).norm() < 1e-10);
    }
  }
}

TEST_CASE("Hale averaged function") {
  const Expr f = hale_forcing();
  for (double a : {0.5, 2.0, 10.0 / 3.0}) {
    for (double theta : {0.0, 1.0, std::numbers::pi / 2}) {
      const Eigen::Vector2d H = hale_H(a, theta, f);
      CHECK(H(0) == doctest::Approx(std::numbers::pi * std::cos(theta)).epsilon(1e-8));
      CHECK(H(1) == doctest::Approx(std::numbers::pi * std::sin(theta) - 0.3 * std::numbers::pi * a).epsilon(1e-8));
      const double ref = oracle::simpson(
          [&](double tau) {
            const double env[] = {tau + theta, a * std::cos(tau), -a * std::sin(tau)};
            return std::sin(tau) * f.eval(env);
          },
          0.0, 2.0 * std::numbers::pi);
      CHECK(H(0) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
  const Eigen::Vector2d xi = hale_xi(10.0 / 3.0, std::numbers::pi / 2);
  CHECK(std::abs(xi(0)) < 1e-15);
  CHECK(xi(1) == doctest::Approx(10.0 / 3.0));
}
