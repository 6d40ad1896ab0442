#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "perorbit/error.hpp"
#include "perorbit/expr.hpp"
#include "perorbit/system.hpp"

using namespace perorbit;

namespace {

const Signature kPlanar{2, 0, {}};

double at(const std::string& src, std::vector<double> env, const Signature& sig = kPlanar) {
  return parse(src, sig).eval(env);
}

}  // namespace

TEST_CASE("parse and evaluate basic expressions") {
  CHECK(at("x1^2 + sin(t)*x2", {0.0, 2.0, 3.0}) == doctest::Approx(4.0));
  CHECK(at("norm(x1,x2)", {0.0, 3.0, 4.0}) == doctest::Approx(5.0));
  CHECK(at("2^3", {0.0, 0.0, 0.0}) == 8.0);
  CHECK(at("sin(t)", {std::numbers::pi / 2, 0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(at("x2 + x1*(x1^2+x2^2-1)", {0.0, 0.0, 1.0}) == 1.0);
  CHECK(at("-2^2", {0.0, 0.0, 0.0}) == -4.0);
  CHECK(at("2^3^2", {0.0, 0.0, 0.0}) == 512.0);
  CHECK(at("8/4/2", {0.0, 0.0, 0.0}) == 1.0);
  CHECK(at("pi", {0.0, 0.0, 0.0}) == std::numbers::pi);
}

TEST_CASE("parameters resolve by name and can be folded") {
  const Signature sig{1, 1, {"a", "beta"}};
  const Expr e = parse("a*x1 - beta*y1", sig);
  CHECK(e.eval(std::vector<double>{0.0, 2.0, 3.0, 5.0, 7.0}) == 10.0 - 21.0);
  const double values[] = {5.0, 7.0};
  const Expr bound = e.bind_parameters(values);
  CHECK(bound.signature().parameters.empty());
  CHECK(bound.eval(std::vector<double>{0.0, 2.0, 3.0}) == 10.0 - 21.0);
}

TEST_CASE("syntax errors carry byte offsets and expected tokens") {
  try {
    parse("x1 + * 2", kPlanar);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
    CHECK_FALSE(e.expected().empty());
  }
  try {
    parse("x1 + q", kPlanar);
    FAIL("expected an unknown identifier");
  } catch (const UnknownIdentifier& e) {
    CHECK(e.offset() == 5);
    CHECK(e.name() == "q");
  }
  CHECK_THROWS_AS(parse("sin(x1, x2)", kPlanar), ParseError);
  CHECK_THROWS_AS(parse("", kPlanar), ParseError);
}

TEST_CASE("domain errors name the node") {
  CHECK_THROWS_AS(at("sqrt(x1)", {0.0, -1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(at("1/x1", {0.0, 0.0, 0.0}), DomainError);
}

TEST_CASE("forward-mode jacobian") {
  const Expr sq = parse("x1^2", kPlanar);
  const int wrt1[] = {1};
  CHECK(jacobian(std::span<const Expr>(&sq, 1), std::vector<double>{0.0, 3.0, 0.0}, wrt1).values(0, 0) ==
        doctest::Approx(6.0));

  const std::vector<Expr> psi{parse("x2 + x1*(x1^2 + x2^2 - 1)", kPlanar),
                              parse("-x1 + x2*(x1^2 + x2^2 - 1)", kPlanar)};
  const int wrt[] = {1, 2};
  const auto J = jacobian(psi, std::vector<double>{0.0, 0.0, 1.0}, wrt);
  CHECK(J.values(0, 0) == doctest::Approx(0.0));
  CHECK(J.values(0, 1) == doctest::Approx(1.0));
  CHECK(J.values(1, 0) == doctest::Approx(-1.0));
  CHECK(J.values(1, 1) == doctest::Approx(2.0));

  const Expr n = parse("norm(x1, x2)", kPlanar);
  const auto g = jacobian(std::span<const Expr>(&n, 1), std::vector<double>{0.0, 3.0, 4.0}, wrt);
  CHECK(g.values(0, 0) == doctest::Approx(0.6));
  CHECK(g.values(0, 1) == doctest::Approx(0.8));
  CHECK_FALSE(g.nonsmooth);
  const auto g0 = jacobian(std::span<const Expr>(&n, 1), std::vector<double>{0.0, 0.0, 0.0}, wrt);
  CHECK(g0.values(0, 0) == 0.0);
  CHECK(g0.nonsmooth);

  const Expr a = parse("abs(x1)", kPlanar);
  bool flag = false;
  CHECK(a.eval_dual(std::vector<double>{0.0, 0.0, 0.0}, 1, flag).d == 0.0);
  CHECK(flag);
}

TEST_CASE("print and reparse evaluate bitwise equal") {
  oracle::ExpressionGenerator gen(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const Expr e = parse(gen.make(4), kPlanar);
    const Expr back = parse(print(e), kPlanar);
    const std::vector<double> env{u(gen.rng()), u(gen.rng()), u(gen.rng())};
    CHECK(e.eval(env) == back.eval(env));
  }
}

TEST_CASE("system validation") {
  SystemDefinition def;
  def.k = 1;
  def.m = 1;
  def.period = 2.0 * std::numbers::pi;
  def.phi = {"cos(t)"};
  def.psi1 = {"-x1"};
  def.psi2 = {"x1 + y1/2"};
  def.A = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const auto sys = SystemSpec::build(def);
  CHECK(sys.k() == 1);
  CHECK(sys.m() == 1);

  auto bad = def;
  bad.phi = {"sin(t/2)"};
  CHECK_THROWS_AS(SystemSpec::build(bad), Error);
  bad = def;
  bad.psi1 = {"-x1 + y1"};
  CHECK_THROWS_AS(SystemSpec::build(bad), Error);
  bad = def;
  bad.A = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(SystemSpec::build(bad), Error);
  bad = def;
  bad.period = -1.0;
  CHECK_THROWS_AS(SystemSpec::build(bad), Error);
}

TEST_CASE("full right-hand side") {
  SystemDefinition def;
  def.k = 1;
  def.m = 1;
  def.period = 1.0;
  def.phi = {"y1"};
  def.psi1 = {"-x1"};
  def.psi2 = {"x1"};
  def.A = Eigen::MatrixXd::Constant(1, 1, 3.0);
  const auto sys = SystemSpec::build(def);
  const double u[] = {2.0, 5.0};
  double du[2];
  sys.full_rhs(0.1, 0.0, u, du);
  CHECK(du[0] == doctest::Approx(0.1 * 5.0 - 2.0));
  CHECK(du[1] == doctest::Approx(2.0 - 15.0));
  double J[4];
  sys.full_jacobian(0.1, 0.0, u, J);
  CHECK(J[0] == doctest::Approx(-1.0));
  CHECK(J[2] == doctest::Approx(0.1));
  CHECK(J[1] == doctest::Approx(1.0));
  CHECK(J[3] == doctest::Approx(-3.0));
}
