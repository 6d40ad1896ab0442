#include "perorbit/scenarios.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "perorbit/error.hpp"

namespace perorbit {

namespace {

double param(const std::map<std::string, double>& given, const ScenarioInfo& info, const std::string& key) {
  const auto it = given.find(key);
  return it != given.end() ? it->second : info.default_parameters.at(key);
}

const ScenarioInfo& lookup(const std::string& name) {
  for (const auto& s : scenario_catalog()) {
    if (s.name == name) return s;
  }
  throw InvalidArgument("scenarios", "build_scenario", "unknown scenario '" + name + "'");
}

void reject_unknown(const std::map<std::string, double>& given, const ScenarioInfo& info) {
  for (const auto& [key, value] : given) {
    if (!info.default_parameters.count(key)) {
      throw InvalidArgument("scenarios", "build_scenario", "scenario '" + info.name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw InvalidArgument("scenarios", "build_scenario", "parameter '" + key + "' is not finite");
  }
}

Scenario planar_example(const std::string& name, double a, double beta) {
  if (!(a > 0.0)) throw InvalidArgument("scenarios", "build_scenario", "parameter 'a' must be positive");
  SystemDefinition def;
  def.k = 2;
  def.m = 1;
  def.period = 2.0 * std::numbers::pi;
  def.phi = {"(1 + 0.5*sin(t)/(1 + y1^2))*x2", "-(1 + 0.5*sin(t)/(1 + y1^2))*x1"};
  def.psi1 = {"beta*sin(t)*(1 - x1^2 - x2^2)^2 + x2 + x1*(x1^2 + x2^2 - 1)",
              "beta*cos(t)*(1 - x1^2 - x2^2)^2 - x1 + x2*(x1^2 + x2^2 - 1)"};
  def.psi2 = {"norm(x1, x2)"};
  def.A = Eigen::MatrixXd::Constant(1, 1, a);
  def.parameters = {{"a", a}, {"beta", beta}};
  Scenario s{name, "", SystemSpec::build(def), DomainSpec::ball(Eigen::Vector2d::Zero(), 1.0), 1, {}};
  s.description = "planar slow system with an invariant unit circle, fast y' = |x| - a y; domain: unit disk";
  s.facts = {
      "A1 holds on the unit circle: sigma = (1 - |x|^2)^2 and its gradient vanish there",
      "boundary flow: (sin theta, cos theta) -> (sin(t + theta), cos(t + theta))",
      "variational matrix on the circle: Y(t, tau, theta) = K(t, theta) K(tau, theta)^-1",
      "tangential displacement component at y = 0 equals 2 pi",
      "degree of the averaged map on the unit disk is 1",
      "fast bound: sup |y| <= 1 / a",
  };
  return s;
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog{
      {"paper_example", "planar system with invariant unit circle and scalar fast variable", {{"a", 1.0}, {"beta", 0.5}}},
      {"paper_example_g0", "paper_example with beta = 0; the origin is an equilibrium of the full system", {{"a", 1.0}}},
      {"hale", "harmonic oscillator forced by sin(t) - 0.3 u; no fast variable", {{"radius", 1.0}}},
  };
  return catalog;
}

Scenario build_scenario(const std::string& name, const std::map<std::string, double>& params) {
  const auto& info = lookup(name);
  reject_unknown(params, info);
  if (name == "paper_example") return planar_example(name, param(params, info, "a"), param(params, info, "beta"));
  if (name == "paper_example_g0") return planar_example(name, param(params, info, "a"), 0.0);

  const double radius = param(params, info, "radius");
  if (!(radius > 0.0) || radius >= 10.0 / 3.0) {
    throw InvalidArgument("scenarios", "build_scenario", "parameter 'radius' must lie in (0, 10/3)");
  }
  SystemDefinition def;
  def.k = 2;
  def.m = 0;
  def.period = 2.0 * std::numbers::pi;
  def.phi = {"0", "sin(t) + 0.3*x1"};
  def.psi1 = {"-x2", "x1"};
  def.A = Eigen::MatrixXd(0, 0);
  Scenario s{name, info.description, SystemSpec::build(def),
             DomainSpec::ball(Eigen::Vector2d(0.0, 10.0 / 3.0), radius), 1, {}};
  s.facts = {
      "phi = (0, f(t, -x1, x2)) with f(t, u, v) = sin t - 0.3 u",
      "displacement at xi(a, theta) = (-a cos theta, a sin theta) equals Rot(theta) H(a, theta)",
      "H(a, theta) = (pi cos theta, pi sin theta - 0.3 pi a); zero at a = 10/3, theta = pi/2, i.e. xi = (0, 10/3)",
  };
  return s;
}

Eigen::Matrix2d closed_form_K(double t, double theta) {
  const double c = std::cos(t + theta), s = std::sin(t + theta), e = std::exp(2.0 * t);
  Eigen::Matrix2d K;
  K << c, e * s, -s, e * c;
  return K;
}

Eigen::Matrix2d closed_form_K_dot(double t, double theta) {
  const double c = std::cos(t + theta), s = std::sin(t + theta), e = std::exp(2.0 * t);
  Eigen::Matrix2d K;
  K << -s, e * (2.0 * s + c), -c, e * (2.0 * c - s);
  return K;
}

Eigen::Matrix2d closed_form_Y(double t, double tau, double theta) {
  return closed_form_K(t, theta) * closed_form_K(tau, theta).inverse();
}

Eigen::Vector2d hale_H(double a, double theta, const Expr& f) {
  if (f.signature().k != 2 || f.signature().m != 0 || !f.signature().parameters.empty()) {
    throw InvalidArgument("scenarios", "hale_H", "f must be an expression in t, x1, x2");
  }
  auto value = [&](double tau) {
    const double env[3] = {tau + theta, a * std::cos(tau), -a * std::sin(tau)};
    return f.eval(env);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  const double two_pi = 2.0 * std::numbers::pi;
  Eigen::Vector2d H;
  H(0) = GK::integrate([&](double tau) { return std::sin(tau) * value(tau); }, 0.0, two_pi, 15, 1e-14);
  H(1) = GK::integrate([&](double tau) { return std::cos(tau) * value(tau); }, 0.0, two_pi, 15, 1e-14);
  return H;
}

Eigen::Vector2d hale_xi(double a, double theta) { return {-a * std::cos(theta), a * std::sin(theta)}; }

Expr hale_forcing() { return parse("sin(t) - 0.3*x1", Signature{2, 0, {}}); }

}  // namespace perorbit
