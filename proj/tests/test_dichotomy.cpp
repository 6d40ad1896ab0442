#include <doctest.h>

#include <cmath>

#include "perorbit/dichotomy.hpp"
#include "perorbit/error.hpp"
#include "perorbit/linalg.hpp"
#include "perorbit/scenarios.hpp"

using namespace perorbit;

TEST_CASE("spectral split of a diagonal matrix") {
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.0, 0.0, -3.0;
  const auto split = spectral_split(A);
  CHECK((split.P_plus - Eigen::Vector2d(1.0, 0.0).asDiagonal().toDenseMatrix()).norm() < 1e-12);
  CHECK((split.P_minus - Eigen::Vector2d(0.0, 1.0).asDiagonal().toDenseMatrix()).norm() < 1e-12);
  CHECK(split.spectral_margin == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(split.dimension() == 2);
}

TEST_CASE("projectors of a non-normal matrix") {
  Eigen::MatrixXd A(3, 3);
  A << 1.0, 4.0, 0.5, 0.0, -2.0, 3.0, 0.0, 0.0, 0.5;
  const auto split = spectral_split(A);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  CHECK((split.P_plus + split.P_minus - I).norm() < 1e-10);
  CHECK((split.P_plus * split.P_plus - split.P_plus).norm() < 1e-10);
  CHECK((A * split.P_plus - split.P_plus * A).norm() < 1e-10);
  CHECK(split.P_plus.trace() == doctest::Approx(2.0));
  CHECK(split.spectral_margin == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("eigenvalues on the imaginary axis are rejected") {
  Eigen::MatrixXd A(2, 2);
  A << 0.0, 1.0, -1.0, 0.0;
  CHECK_THROWS_AS(spectral_split(A), ImaginaryAxisEigenvalue);
  CHECK_THROWS_AS(spectral_split(Eigen::MatrixXd::Zero(1, 1)), ImaginaryAxisEigenvalue);
}

TEST_CASE("dichotomy constants bound the sampled kernels") {
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 5.0, 0.0, 2.0;
  const auto split = spectral_split(A);
  const auto dc = dichotomy_constants(split, A);
  CHECK(dc.delta == doctest::Approx(0.95 * split.spectral_margin));
  CHECK(dc.c >= 1.0);
  const double horizon = 10.0 / dc.delta;
  for (int i = 0; i < 256; i += 17) {
    const double t = horizon * i / 255.0;
    const Eigen::MatrixXd K = linalg::expm(-A * t) * split.P_plus;
    CHECK(linalg::norm2(K) <= dc.c * std::exp(-dc.delta * t) * (1.0 + 1e-9));
  }
}

TEST_CASE("dichotomy norm and radius formula") {
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.0, 0.0, -1.0;
  const auto split = spectral_split(A);
  CHECK(dichotomy_norm(split, Eigen::Vector2d(3.0, 4.0)) == doctest::Approx(4.0));
  CHECK(y_ball_radius(1.0, 2.0, 0.5, 1.0) == doctest::Approx(1.0 / 1.5));
  CHECK(y_ball_radius(2.0, 1.0, 0.1, 0.5) == doctest::Approx(1.0 / 0.8));
}

TEST_CASE("growth bound of the planar example") {
  const auto sc = build_scenario("paper_example");
  const auto split = spectral_split(sc.system.A());
  const auto g = growth_bounds(sc.system, split, sc.domain, 1.0, 400);
  CHECK(g.M >= 1.0);
  CHECK(g.M <= 1.06);
  CHECK(g.gamma <= 1e-12);
  CHECK(g.samples >= 400);
  CHECK(g.sampled_evidence_only);
}

TEST_CASE("linear algebra helpers") {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  const auto e = linalg::expm(a);
  CHECK(e(0, 0) == doctest::Approx(std::cos(1.0)));
  CHECK(e(0, 1) == doctest::Approx(std::sin(1.0)));
  Eigen::MatrixXd b(2, 2);
  b << 1.0, -2.0, 3.0, 4.0;
  CHECK(linalg::norm_inf(b) == doctest::Approx(7.0));
  CHECK(linalg::norm2(Eigen::MatrixXd::Identity(3, 3) * 2.0) == doctest::Approx(2.0));
  CHECK(std::isinf(linalg::condition_number(Eigen::MatrixXd::Zero(2, 2))));
}
