// Acceptance suite: one PASS/FAIL line per criterion.
//
//   perorbit_acceptance [criterion ...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "perorbit/averaging.hpp"
#include "perorbit/checker.hpp"
#include "perorbit/cli.hpp"
#include "perorbit/degree.hpp"
#include "perorbit/dichotomy.hpp"
#include "perorbit/error.hpp"
#include "perorbit/linalg.hpp"
#include "perorbit/expr.hpp"
#include "perorbit/flow.hpp"
#include "perorbit/orbit.hpp"
#include "perorbit/report.hpp"
#include "perorbit/scenarios.hpp"

using namespace perorbit;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

Outcome flow_accuracy() {
  Timer timer;
  OdeProblem p;
  p.dimension = 2;
  p.rhs = [](double, std::span<const double> u, std::span<double> du) {
    du[0] = u[1];
    du[1] = -u[0];
  };
  p.t_start = 0.0;
  p.t_end = kTwoPi;
  p.initial_state = {1.0, 0.5};
  const auto traj = integrate(p, IntegratorConfig{1e-10, 1e-12});
  const auto end = traj.final_state();
  const double err = std::hypot(end[0] - 1.0, end[1] - 0.5);
  const double secs = timer.seconds();
  return {err <= 1e-8 && secs < 1.0, "return error " + fmt("%.3g", err) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome variational_vs_fd() {
  const auto sc = build_scenario("paper_example");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ut(0.1, kTwoPi), uth(0.0, kTwoPi);
  const IntegratorConfig cfg{1e-12, 1e-14};
  auto central = [&](const Eigen::VectorXd& xi, double t, double h) {
    Eigen::MatrixXd fd(2, 2);
    for (int j = 0; j < 2; ++j) {
      Eigen::VectorXd a = xi, b = xi;
      a(j) += h;
      b(j) -= h;
      fd.col(j) = (flow(sc.system, t, 0.0, a, cfg) - flow(sc.system, t, 0.0, b, cfg)) / (2.0 * h);
    }
    return fd;
  };
  double worst = 0.0, worst_small = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double t = ut(rng), theta = uth(rng);
    const Eigen::VectorXd xi = oracle::circle_point(theta);
    const auto fv = flow_with_variation(sc.system, t, 0.0, xi, cfg);
    const double scale = fv.variation.norm();
    worst = std::max(worst, (fv.variation - central(xi, t, 1e-6)).norm() / scale);
    worst_small = std::max(worst_small, (fv.variation - central(xi, t, 1e-7)).norm() / scale);
  }
  // Diagnostic only: the step-1e-7 error shows how much of the gap is finite-difference truncation.
  return {worst <= 1e-4, "max relative error " + fmt("%.3g", worst) + " over 20 (t, theta) at step 1e-6 (" +
                             fmt("%.3g", worst_small) + " at step 1e-7)"};
}

Outcome inverse_identity() {
  const auto sc = build_scenario("paper_example");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ut(0.1, kTwoPi), uth(0.0, kTwoPi), ur(0.0, 0.9);
  const IntegratorConfig cfg{1e-12, 1e-14};
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double t = ut(rng), theta = uth(rng);
    // Half the samples on the invariant circle, half inside the disk.
    const double r = i % 2 ? ur(rng) : 1.0;
    const Eigen::VectorXd xi = r * oracle::circle_point(theta);
    const auto fwd = flow_with_variation(sc.system, t, 0.0, xi, cfg);
    const auto back = flow_with_variation(sc.system, 0.0, t, fwd.state, cfg);
    const Eigen::MatrixXd prod = back.variation * fwd.variation;
    worst = std::max(worst, linalg::norm_inf(prod - Eigen::MatrixXd::Identity(2, 2)));
  }
  return {worst <= 1e-6, "max |product - I|_inf " + fmt("%.3g", worst) + " over 20 samples"};
}

Outcome closed_form_oracle() {
  const auto sc = build_scenario("paper_example");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const IntegratorConfig cfg{1e-12, 1e-14};
  double worst_flow = 0.0, worst_ode = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double t = u(rng), tau = u(rng), theta = u(rng);
    const Eigen::VectorXd base = oracle::circle_point(tau + theta);  // Omega(tau, 0, xi)
    const auto fv = flow_with_variation(sc.system, t, tau, base, cfg);
    const Eigen::Matrix2d Y = oracle::Y(t, tau, theta);
    // Entries grow like e^{2(t - tau)}; errors are measured relative to max(1, |Y|).
    worst_flow = std::max(worst_flow, max_abs(fv.variation - Y) / std::max(1.0, max_abs(Y)));
    const Eigen::Matrix2d lib = closed_form_Y(t, tau, theta);
    const Eigen::Matrix2d dY = closed_form_K_dot(t, theta) * closed_form_K(tau, theta).inverse();
    const Eigen::Matrix2d rhs = oracle::dpsi_on_circle(t, theta) * lib;
    worst_ode = std::max(worst_ode, max_abs(dY - rhs) / std::max(1.0, max_abs(lib)));
    worst_ode = std::max(worst_ode, max_abs(lib - Y) / std::max(1.0, max_abs(Y)));
  }
  return {worst_flow <= 1e-5 && worst_ode <= 1e-10,
          "flow vs K K^-1 " + fmt("%.3g", worst_flow) + ", ODE residual " + fmt("%.3g", worst_ode)};
}

PeriodicPath random_path(std::mt19937_64& rng, double T) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Eigen::VectorXd mean(1);
  mean << u(rng);
  Eigen::MatrixXd c(1, 3), s(1, 3);
  for (int j = 0; j < 3; ++j) {
    c(0, j) = u(rng);
    s(0, j) = u(rng);
  }
  return PeriodicPath(T, mean, c, s);
}

Outcome lemma2() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> us(0.0, kTwoPi), ux(-1.0, 1.0);
  const IntegratorConfig cfg{1e-12, 1e-14};
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto system = SystemSpec::build(oracle::random_planar_system(rng));
    const auto y = random_path(rng, kTwoPi);
    const double s = us(rng);
    const Eigen::Vector2d xi(ux(rng), ux(rng));
    const Eigen::VectorXd a = displacement(system, y, s, xi, cfg);
    const Eigen::VectorXd b = displacement_via_lemma2(system, y, s, xi, cfg);
    worst = std::max(worst, (a - b).norm());
  }
  const auto sc = build_scenario("paper_example");
  double worst_example = 0.0;
  for (int i = 0; i < 5; ++i) {
    const auto y = random_path(rng, kTwoPi);
    const double s = us(rng);
    const Eigen::VectorXd xi = oracle::circle_point(us(rng));
    const Eigen::VectorXd a = displacement(sc.system, y, s, xi, cfg);
    const Eigen::VectorXd b = displacement_via_lemma2(sc.system, y, s, xi, cfg);
    worst_example = std::max(worst_example, (a - b).norm());
  }
  return {worst <= 1e-6 && worst_example <= 1e-6,
          "random systems " + fmt("%.3g", worst) + ", planar example " + fmt("%.3g", worst_example)};
}

Outcome remark1() {
  const auto sc = build_scenario("paper_example");
  const auto y0 = PeriodicPath::zero(kTwoPi, 1);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ur(0.0, 1.0), uth(0.0, kTwoPi);
  const IntegratorConfig cfg{1e-12, 1e-14};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double r = i < 10 ? 1.0 : std::sqrt(ur(rng)) * 0.98;
    const Eigen::VectorXd xi = r * oracle::circle_point(uth(rng));
    const Eigen::VectorXd a = averaged_map(sc.system, xi, cfg);
    const Eigen::VectorXd d = displacement(sc.system, y0, kTwoPi, xi, cfg);
    worst = std::max(worst, (a - d).norm());
  }
  return {worst <= 1e-6, "max |averaged map - displacement(y = 0, s = T)| " + fmt("%.3g", worst) + " over 50 xi"};
}

Outcome degree_suite() {
  const auto disk = DomainSpec::ball(Eigen::Vector2d::Zero(), 1.0);
  std::vector<std::string> notes;
  bool ok = true;
  auto timed = [&](const std::string& name, int expected, const std::function<int()>& f) {
    Timer timer;
    int got = 0;
    try {
      got = f();
    } catch (const Error& e) {
      ok = false;
      notes.push_back(name + " error: " + e.what());
      return;
    }
    const double secs = timer.seconds();
    if (got != expected || secs >= 5.0) ok = false;
    notes.push_back(name + "=" + std::to_string(got) + " (" + fmt("%.2f", secs) + " s)");
  };
  const VectorMap identity = [](const Eigen::VectorXd& x) { return x; };
  const VectorMap z2 = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(Eigen::Vector2d(x(0) * x(0) - x(1) * x(1), 2.0 * x(0) * x(1)));
  };
  const VectorMap constant = [](const Eigen::VectorXd&) { return Eigen::VectorXd(Eigen::Vector2d(1.0, 0.0)); };
  timed("identity", 1, [&] { return brouwer_degree(identity, disk).degree; });
  timed("z^2", 2, [&] { return brouwer_degree(z2, disk).degree; });
  timed("constant", 0, [&] { return brouwer_degree(constant, disk).degree; });
  timed("z^2 reversed", -2, [&] {
    auto pts = sample_boundary(disk, 64).points;
    std::reverse(pts.begin(), pts.end());
    return winding_number(z2, disk, pts).degree;
  });
  const auto sc = build_scenario("paper_example");
  timed("averaged map", 1, [&] {
    const VectorMap F = [&](const Eigen::VectorXd& xi) { return averaged_map(sc.system, xi); };
    return brouwer_degree(F, sc.domain).degree;
  });
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return {ok, detail};
}

Outcome dichotomy() {
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.0, 0.0, -3.0;
  const auto split = spectral_split(A);
  Eigen::MatrixXd Pp = Eigen::MatrixXd::Zero(2, 2), Pm = Eigen::MatrixXd::Zero(2, 2);
  Pp(0, 0) = 1.0;
  Pm(1, 1) = 1.0;
  const double proj_err = std::max(max_abs(split.P_plus - Pp), max_abs(split.P_minus - Pm));
  const auto k = dichotomy_constants(split, A);
  bool imaginary = false;
  Eigen::MatrixXd R(2, 2);
  R << 0.0, 1.0, -1.0, 0.0;
  try {
    spectral_split(R);
  } catch (const ImaginaryAxisEigenvalue&) {
    imaginary = true;
  }
  const bool ok = proj_err <= 1e-10 && k.c >= 1.0 && k.c <= 1.01 && std::fabs(k.delta - 1.9) <= 1e-9 &&
                  split.iterations <= 30 && imaginary;
  return {ok, "projector error " + fmt("%.3g", proj_err) + ", c=" + fmt("%.6f", k.c) + ", delta=" +
                  fmt("%.9f", k.delta) + ", sign iterations " + std::to_string(split.iterations) +
                  (imaginary ? ", +-i rejected" : ", +-i NOT rejected")};
}

Outcome radius() {
  const double r = y_ball_radius(1.0, 0.95, 0.0, 1.02);
  bool violated = false;
  try {
    y_ball_radius(1.0, 0.95, 0.95, 1.02);
  } catch (const ContractionViolated&) {
    violated = true;
  }
  // Ideal bound 1/a = 1 with a = 1; the 2% flow inflation and 5% delta haircut give 1.02 / 0.95.
  const bool ok = std::fabs(r - 1.074) <= 5e-4 && r >= 1.0 && r <= 1.02 / 0.95 + 1e-12 && violated;
  return {ok, "r_y=" + fmt("%.6f", r) + (violated ? ", gamma = delta/c rejected" : ", gamma = delta/c NOT rejected")};
}

Outcome certify_example() {
  const auto sc = build_scenario("paper_example");
  Timer timer;
  const auto rep = certify(sc.system, sc.domain, CertifyConfig{}, 7);
  const double secs = timer.seconds();
  const bool a3 = rep.a3.degree && rep.a3.degree->degree == 1;
  const bool ok = rep.a1.residual <= 1e-7 && rep.a1.verdict == Verdict::Pass && rep.a2.min_norm >= 3.0 &&
                  rep.a2.y_samples >= 64 && rep.a2.verdict == Verdict::Pass && a3 && secs <= 60.0;
  return {ok, "A1 residual " + fmt("%.3g", rep.a1.residual) + ", A2 min " + fmt("%.4f", rep.a2.min_norm) + " over " +
                  std::to_string(rep.a2.y_samples) + " y-samples, A3 degree " +
                  (rep.a3.degree ? std::to_string(rep.a3.degree->degree) : std::string("none")) + ", " +
                  fmt("%.1f", secs) + " s"};
}

Outcome solve_example() {
  const auto sc = build_scenario("paper_example");
  SolveConfig cfg;
  const auto ctx = prepare_solve(sc.system, sc.domain, cfg);
  const auto orbit = solve_orbit(sc.system, sc.domain, 0.01, ctx, cfg);
  bool inside = orbit.z_samples.size() == 256;
  for (const auto& z : orbit.z_samples) inside = inside && sc.domain.contains(z);

  const auto g0 = build_scenario("paper_example_g0");
  const auto ctx0 = prepare_solve(g0.system, g0.domain, cfg);
  const auto trivial = solve_orbit(g0.system, g0.domain, 0.01, ctx0, cfg);
  const bool trivial_ok = trivial.residual <= 1e-12 && trivial.u0.norm() <= 1e-10;

  const bool ok = orbit.residual <= 1e-8 && inside && orbit.y_sup <= 1.0 + 1e-6 && trivial_ok;
  return {ok, "residual " + fmt("%.3g", orbit.residual) + ", z inside disk " + (inside ? "yes" : "no") +
                  ", sup |y| " + fmt("%.6f", orbit.y_sup) + ", seed " + orbit.seed_source + "; g=0 orbit |u0| " +
                  fmt("%.3g", trivial.u0.norm()) + " residual " + fmt("%.3g", trivial.residual)};
}

Outcome sweep_example() {
  const auto sc = build_scenario("paper_example");
  const auto sweep = continue_in_eps(sc.system, sc.domain, {0.04, 0.02, 0.01, 0.005});
  std::string diam;
  for (const auto& e : sweep.entries) {
    diam += (diam.empty() ? "" : " ") + (e.orbit ? fmt("%.4g", e.orbit->z_diameter) : std::string("failed"));
  }
  const bool slope_ok = std::isfinite(sweep.slope) && std::fabs(sweep.slope - 1.0) <= 0.3;
  return {sweep.diameters_strictly_decreasing && slope_ok,
          "z-diameters [" + diam + "], strictly decreasing " + (sweep.diameters_strictly_decreasing ? "yes" : "no") +
              ", log-log slope " + fmt("%.3f", sweep.slope) + " (heuristic band 0.7..1.3)"};
}

Outcome hale() {
  const auto sc = build_scenario("hale");
  const auto y = PeriodicPath::zero(kTwoPi, 0);
  const Expr f = hale_forcing();
  const IntegratorConfig cfg{1e-12, 1e-14};
  double worst = 0.0;
  for (int ia = 0; ia < 5; ++ia) {
    const double a = 0.5 + 0.6 * ia;
    for (int it = 0; it < 8; ++it) {
      const double theta = kTwoPi * it / 8.0 + 0.1;
      const Eigen::Vector2d expected = oracle::rotation(theta) * hale_H(a, theta, f);
      for (int is = 0; is < 4; ++is) {
        const double s = kTwoPi * is / 4.0;
        const Eigen::VectorXd d = displacement(sc.system, y, s, hale_xi(a, theta), cfg);
        worst = std::max(worst, (d - expected).norm());
      }
    }
  }
  const Expr pure = parse("sin(t)", Signature{2, 0, {}});
  double worst_h = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double a = 0.3 + 0.4 * i, theta = 0.7 * i;
    const Eigen::Vector2d H = hale_H(a, theta, pure);
    worst_h = std::max(worst_h, (H - Eigen::Vector2d(std::numbers::pi * std::cos(theta),
                                                     std::numbers::pi * std::sin(theta)))
                                    .norm());
  }
  return {worst <= 1e-6 && worst_h <= 1e-8,
          "displacement vs Rot(theta) H " + fmt("%.3g", worst) + " on 5x8x4 grid, pure-sin H error " +
              fmt("%.3g", worst_h)};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome dsl() {
  // Forward-mode derivatives against central differences.
  oracle::ExpressionGenerator gen(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const Signature sig{2, 0, {}};
  double worst = 0.0;
  int evaluated = 0;
  for (int i = 0; i < 100; ++i) {
    const Expr e = parse(gen.make(4), sig);
    std::vector<double> env{u(gen.rng()), u(gen.rng()), u(gen.rng())};
    const int wrt[3] = {0, 1, 2};
    const auto J = jacobian(std::span<const Expr>(&e, 1), env, wrt);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6;
      auto a = env, b = env;
      a[static_cast<std::size_t>(j)] += h;
      b[static_cast<std::size_t>(j)] -= h;
      const double fd = (e.eval(a) - e.eval(b)) / (2.0 * h);
      const double ad = J.values(0, j);
      worst = std::max(worst, std::fabs(ad - fd) / std::max(1.0, std::fabs(ad)));
    }
    ++evaluated;
  }

  // Parser error offsets.
  struct Fixture {
    const char* source;
    std::size_t offset;
  };
  const Fixture fixtures[] = {{"x1 + * 2", 5}, {"1 +", 3},          {"sin(x1", 6},  {"2 $ 3", 2},
                              {"(x1 + x2", 8}, {"x1 x2", 3},        {"cos()", 4},   {"1.5e+", 3},
                              {"foo + 1", 0},  {"x1 + y1", 5},      {"sin(1, 2)", 0}, {"x1 ^ ^ 2", 5}};
  int offsets_ok = 0;
  std::string bad;
  for (const auto& fx : fixtures) {
    std::size_t got = static_cast<std::size_t>(-1);
    try {
      parse(fx.source, sig);
    } catch (const ParseError& e) {
      got = e.offset();
    } catch (const UnknownIdentifier& e) {
      got = e.offset();
    }
    if (got == fx.offset) {
      ++offsets_ok;
    } else {
      bad += std::string(" '") + fx.source + "'";
    }
  }
  const int n_fixtures = static_cast<int>(std::size(fixtures));

  // Byte-identical certify reports.
  const auto root = std::filesystem::temp_directory_path() / "perorbit_acceptance";
  std::filesystem::remove_all(root);
  const Json doc = Json::parse(R"({"schema": 1, "system": {"scenario": "paper_example"}, "seed": 7})");
  std::string reports[2];
  for (int i = 0; i < 2; ++i) {
    RunConfig cfg = parse_config(doc, "certify");
    cfg.config_text = doc.dump();
    cfg.out_dir = (root / ("run" + std::to_string(i))).string();
    std::ostringstream out, err;
    run(cfg, out, err);
    reports[i] = dump(strip_timings(Json::parse(read_file(std::filesystem::path(cfg.out_dir) / "report.json"))));
  }
  const bool identical = !reports[0].empty() && reports[0] == reports[1];
  std::filesystem::remove_all(root);

  const bool ok = evaluated == 100 && worst <= 1e-6 && offsets_ok == n_fixtures && identical;
  return {ok, "AD vs FD " + fmt("%.3g", worst) + " on 100 expressions, offsets " + std::to_string(offsets_ok) + "/" +
                  std::to_string(n_fixtures) + (bad.empty() ? "" : " (wrong:" + bad + ")") +
                  ", certify reports " + (identical ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"flow accuracy", flow_accuracy},
      {"variational matrix vs finite differences", variational_vs_fd},
      {"inverse variational identity", inverse_identity},
      {"closed-form variational matrix", closed_form_oracle},
      {"displacement quadrature form", lemma2},
      {"averaged map identity", remark1},
      {"degree suite", degree_suite},
      {"dichotomy", dichotomy},
      {"fast-variable radius", radius},
      {"certify planar example", certify_example},
      {"solve planar example", solve_example},
      {"epsilon sweep", sweep_example},
      {"harmonic oscillator reduction", hale},
      {"expression language and determinism", dsl},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %-4s %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
