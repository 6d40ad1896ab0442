#include <doctest.h>

#include <cstring>

#include "perorbit/checker.hpp"
#include "perorbit/scenarios.hpp"

using namespace perorbit;

TEST_CASE("verdict names") {
  CHECK(std::strcmp(to_string(Verdict::Pass), "pass") == 0);
  CHECK(std::strcmp(to_string(Verdict::Fail), "fail") == 0);
  CHECK(std::strcmp(to_string(Verdict::Inconclusive), "inconclusive") == 0);
}

TEST_CASE("A1 holds on the invariant circle") {
  const auto sc = build_scenario("paper_example");
  const auto r = check_A1(sc.system, sc.domain, 32, 1e-7, {1e-13, 1e-15});
  CHECK(r.verdict == Verdict::Pass);
  CHECK(r.residual < 1e-7);
  CHECK(r.samples == 32);
}

TEST_CASE("A1 fails when the boundary is not a periodic orbit") {
  const auto sc = build_scenario("paper_example");
  const auto shifted = DomainSpec::ball(Eigen::Vector2d::Zero(), 0.5);
  const auto r = check_A1(sc.system, shifted, 32, 1e-7);
  CHECK(r.verdict == Verdict::Fail);
  CHECK(r.residual > 1e-3);
}

TEST_CASE("A3 degree of the planar example") {
  const auto sc = build_scenario("paper_example");
  const auto r = check_A3(sc.system, sc.domain, 64, {1e-12, 1e-14});
  REQUIRE(r.degree.has_value());
  CHECK(r.degree->degree == 1);
  CHECK(r.verdict == Verdict::Pass);
}

TEST_CASE("flow bound of a rotation") {
  const auto sc = build_scenario("hale");
  const auto b = flow_bound(sc.system, sc.domain, 9, 0.02);
  CHECK(b.bounded);
  CHECK(b.raw <= 10.0 / 3.0 + 1.0 + 1e-9);
  CHECK(b.raw >= 0.99 * (10.0 / 3.0 + 1.0));
  CHECK(b.M_flow == doctest::Approx(1.02 * b.raw));
}
