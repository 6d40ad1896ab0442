#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perorbit/domain.hpp"
#include "perorbit/expr.hpp"
#include "perorbit/system.hpp"

namespace perorbit {

struct Scenario {
  std::string name;
  std::string description;
  SystemSpec system;
  DomainSpec domain;
  std::optional<int> expected_degree;
  /// Known facts with their source, e.g. "A1 holds on the unit circle: sigma and grad sigma vanish there".
  std::vector<std::string> facts;
};

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::map<std::string, double> default_parameters;
};

const std::vector<ScenarioInfo>& scenario_catalog();

/// Names: paper_example (a, beta), paper_example_g0 (a), hale (radius).
/// Unspecified parameters take the catalog defaults.
Scenario build_scenario(const std::string& name, const std::map<std::string, double>& params = {});

/// K(t, theta) = [[cos(t+theta), e^{2t} sin(t+theta)], [-sin(t+theta), e^{2t} cos(t+theta)]].
Eigen::Matrix2d closed_form_K(double t, double theta);

/// dK/dt.
Eigen::Matrix2d closed_form_K_dot(double t, double theta);

/// Y(t, tau, theta) = K(t, theta) K(tau, theta)^-1.
Eigen::Matrix2d closed_form_Y(double t, double tau, double theta);

/// H(a, theta) = int_0^{2 pi} (sin tau, cos tau) f(tau + theta, a cos tau, -a sin tau) d tau,
/// with f an expression in (t, x1, x2) = (t, u, v).
Eigen::Vector2d hale_H(double a, double theta, const Expr& f);

/// xi(a, theta) = (-a cos theta, a sin theta).
Eigen::Vector2d hale_xi(double a, double theta);

/// Forcing of the hale scenario as an expression in (t, u, v).
Expr hale_forcing();

}  // namespace perorbit
