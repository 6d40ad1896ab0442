#include "perorbit/checker.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "perorbit/averaging.hpp"
#include "perorbit/error.hpp"
#include "perorbit/flow.hpp"

namespace perorbit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<PeriodicPath> a2_paths(const SystemSpec& system, double radius, const A2Plan& plan,
                                   const SpectralSplit* split) {
  const int m = system.m();
  const double T = system.period();
  const Eigen::MatrixXd P = split ? split->P_plus : Eigen::MatrixXd();
  std::vector<PeriodicPath> paths;
  paths.push_back(PeriodicPath::zero(T, m, 0));
  if (m == 0 || radius <= 0.0) return paths;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(m, i);
    const PeriodicPath unit = PeriodicPath::constant(T, e, P);
    e *= radius / unit.grid_max();
    paths.push_back(PeriodicPath::constant(T, e, P));
    paths.push_back(PeriodicPath::constant(T, -e, P));
  }
  std::mt19937_64 rng(plan.seed);
  const int N = plan.harmonics;
  while (static_cast<int>(paths.size()) < plan.n_y + 1 + 2 * m) {
    Eigen::VectorXd mean(m);
    Eigen::MatrixXd a(m, N), b(m, N);
    for (int i = 0; i < m; ++i) mean(i) = 2.0 * uniform01(rng) - 1.0;
    for (int n = 0; n < N; ++n) {
      for (int i = 0; i < m; ++i) {
        a(i, n) = 2.0 * uniform01(rng) - 1.0;
        b(i, n) = 2.0 * uniform01(rng) - 1.0;
      }
    }
    const PeriodicPath raw(T, mean, a, b, P);
    if (!(raw.grid_max() > 0.0)) continue;
    paths.push_back(raw.scaled(radius / raw.grid_max()));
  }
  return paths;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

A1Result check_A1(const SystemSpec& system, const DomainSpec& domain, std::size_t n_samples, double tol,
                  const IntegratorConfig& config) {
  if (n_samples < 32) throw InvalidArgument("checker", "check_A1", "at least 32 boundary samples are required");
  if (domain.dimension() != system.k()) throw InvalidArgument("checker", "check_A1", "domain dimension must equal k");
  A1Result out;
  out.tol = tol;
  const auto boundary = sample_boundary(domain, n_samples).points;
  out.samples = boundary.size();
  out.worst_xi = boundary.front();
  for (const auto& xi : boundary) {
    const double r = (flow(system, system.period(), 0.0, xi, config) - xi).norm();
    if (r > out.residual) {
      out.residual = r;
      out.worst_xi = xi;
    }
  }
  out.verdict = out.residual <= tol ? Verdict::Pass : Verdict::Fail;
  return out;
}

A2Result check_A2(const SystemSpec& system, const DomainSpec& domain, double radius, const A2Plan& plan,
                  const SpectralSplit* split, double threshold_factor, const IntegratorConfig& config) {
  if (plan.n_s < 8 || plan.n_xi < 32 || plan.n_y < 64 || plan.harmonics < 3) {
    throw InvalidArgument("checker", "check_A2", "plan must be at least (n_s, n_xi, n_y, N) = (8, 32, 64, 3)");
  }
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw InvalidArgument("checker", "check_A2", "radius must be finite and >= 0");
  if (domain.dimension() != system.k()) throw InvalidArgument("checker", "check_A2", "domain dimension must equal k");
  A2Result out;
  out.radius = radius;
  out.threshold = threshold_factor * domain.diameter();
  const auto paths = a2_paths(system, radius, plan, split);
  out.y_samples = paths.size();
  std::vector<double> s_values(static_cast<std::size_t>(plan.n_s));
  for (int j = 0; j < plan.n_s; ++j) s_values[static_cast<std::size_t>(j)] = system.period() * j / (plan.n_s - 1);
  const auto boundary = sample_boundary(domain, static_cast<std::size_t>(plan.n_xi)).points;
  out.min_norm = std::numeric_limits<double>::infinity();
  for (std::size_t yi = 0; yi < paths.size(); ++yi) {
    for (const auto& xi : boundary) {
      const auto d = displacement_batch(system, paths[yi], s_values, xi, config);
      for (std::size_t j = 0; j < d.size(); ++j) {
        ++out.evaluations;
        const double n = d[j].norm();
        if (n < out.min_norm) {
          out.min_norm = n;
          out.worst_s = s_values[j];
          out.worst_xi = xi;
          out.worst_y = static_cast<int>(yi);
        }
      }
    }
  }
  out.verdict = out.min_norm > out.threshold ? Verdict::Pass : Verdict::Fail;
  return out;
}

A3Result check_A3(const SystemSpec& system, const DomainSpec& domain, std::size_t boundary_samples,
                  const IntegratorConfig& config) {
  A3Result out;
  const VectorMap F = [&](const Eigen::VectorXd& xi) { return averaged_map(system, xi, config); };
  try {
    if (domain.dimension() == 2) {
      out.degree = winding_number(F, domain, sample_boundary(domain, boundary_samples).points);
    } else {
      out.degree = brouwer_degree(F, domain);
    }
  } catch (const ZeroOnBoundary& e) {
    out.verdict = Verdict::Inconclusive;
    out.diagnostic = e.what();
    return out;
  }
  out.verdict = out.degree->degree != 0 ? Verdict::Pass : Verdict::Fail;
  return out;
}

FlowBound flow_bound(const SystemSpec& system, const DomainSpec& domain, int grid, double inflation,
                     const IntegratorConfig& config) {
  if (grid < 2) throw InvalidArgument("checker", "flow_bound", "grid must have at least 2 points per axis");
  std::vector<Eigen::VectorXd> starts;
  if (domain.is_ball() && domain.dimension() == 2) {
    starts.push_back(domain.center());
    for (int i = 1; i < grid; ++i) {
      const double r = domain.radius() * i / (grid - 1);
      for (int j = 0; j < grid; ++j) {
        const double a = 2.0 * std::numbers::pi * j / grid;
        Eigen::VectorXd p(2);
        p << domain.center()(0) + r * std::cos(a), domain.center()(1) + r * std::sin(a);
        starts.push_back(std::move(p));
      }
    }
  } else {
    starts = interior_grid(domain, domain.dimension() == 2 ? grid : std::max(2, grid / 4));
    const auto b = sample_boundary(domain, domain.dimension() == 2 ? static_cast<std::size_t>(4 * grid) : 128).points;
    starts.insert(starts.end(), b.begin(), b.end());
  }
  IntegratorConfig cfg = config;
  cfg.state_bound = 100.0 * (1.0 + domain.center().norm() + domain.diameter());
  FlowBound out;
  out.grid_points = starts.size();
  const int samples_per_period = 128;
  for (const auto& xi : starts) {
    Trajectory traj;
    try {
      traj = flow_trajectory(system, system.period(), 0.0, xi, cfg);
    } catch (const IntegrationError& e) {
      if (e.kind() != IntegrationError::Kind::OutOfBounds) throw;
      out.bounded = false;
      out.raw = out.M_flow = std::numeric_limits<double>::infinity();
      return out;
    }
    for (std::size_t i = 0; i < traj.size(); ++i) {
      out.raw = std::max(out.raw, Eigen::Map<const Eigen::VectorXd>(traj.state(i).data(), system.k()).norm());
    }
    std::vector<double> u(static_cast<std::size_t>(system.k()));
    for (int i = 0; i < samples_per_period; ++i) {
      traj.evaluate(system.period() * (i + 0.5) / samples_per_period, u);
      out.raw = std::max(out.raw, Eigen::Map<const Eigen::VectorXd>(u.data(), system.k()).norm());
    }
  }
  out.M_flow = out.raw * (1.0 + inflation);
  return out;
}

HypothesisReport certify(const SystemSpec& system, const DomainSpec& domain, const CertifyConfig& config,
                         std::uint64_t seed) {
  const auto start = Clock::now();
  HypothesisReport report;
  report.seed = seed;
  report.domain = domain.describe();
  if (domain.dimension() != system.k()) throw InvalidArgument("checker", "certify", "domain dimension must equal k");
  auto& K = report.constants;
  K.fast_variable = system.m() > 0;

  auto abandon = [&](const std::string& why) {
    report.diagnostics.push_back(why);
    report.a1.diagnostic = report.a2.diagnostic = report.a3.diagnostic = "not evaluated: " + why;
    report.overall = Verdict::Inconclusive;
    report.timings.total = seconds_since(start);
    return report;
  };

  std::optional<SpectralSplit> split;
  auto t0 = Clock::now();
  if (K.fast_variable) {
    try {
      split = spectral_split(system.A());
      const auto dc = dichotomy_constants(*split, system.A());
      K.c = dc.c;
      K.delta = dc.delta;
      K.spectral_margin = split->spectral_margin;
      K.sign_iterations = split->iterations;
    } catch (const Error& e) {
      return abandon(e.what());
    }
  }
  report.timings.constants = seconds_since(t0);

  t0 = Clock::now();
  try {
    K.flow = flow_bound(system, domain, config.flow_grid, config.flow_inflation, config.integrator);
  } catch (const Error& e) {
    return abandon(e.what());
  }
  report.timings.flow_bound = seconds_since(t0);

  bool contraction_violated = false;
  t0 = Clock::now();
  if (!K.flow.bounded) {
    report.diagnostics.push_back("checker/certify: flow leaves the bounding region; M_flow unbounded on grid");
  } else if (K.fast_variable) {
    try {
      GrowthOptions gopt;
      gopt.inflation = config.growth_inflation;
      double probe = config.growth_probe;
      for (int pass = 0; pass < 2; ++pass) {
        K.growth = growth_bounds(system, *split, domain, probe, config.growth_samples, gopt);
        K.r_y = y_ball_radius(K.c, K.delta, K.growth->gamma, K.flow.M_flow);
        if (*K.r_y <= probe) break;
        probe = 1.5 * *K.r_y;
      }
    } catch (const ContractionViolated& e) {
      K.r_y.reset();
      contraction_violated = true;
      report.diagnostics.push_back(e.what());
    } catch (const Error& e) {
      return abandon(e.what());
    }
  } else {
    K.r_y = 0.0;
  }
  report.timings.growth = seconds_since(t0);

  t0 = Clock::now();
  try {
    report.a1 = check_A1(system, domain, config.a1_samples, config.a1_tol, config.a1_integrator);
  } catch (const Error& e) {
    report.a1.verdict = Verdict::Inconclusive;
    report.a1.diagnostic = e.what();
  }
  report.timings.a1 = seconds_since(t0);

  t0 = Clock::now();
  if (!K.flow.bounded) {
    report.a2.verdict = Verdict::Fail;
    report.a2.diagnostic = "radius undefined: M_flow unbounded on grid";
  } else if (contraction_violated) {
    report.a2.verdict = Verdict::Fail;
    report.a2.diagnostic = "radius undefined: gamma >= delta / c";
  } else {
    try {
      A2Plan plan = config.a2;
      plan.seed = seed;
      report.a2 = check_A2(system, domain, *K.r_y, plan, split ? &*split : nullptr, config.a2_threshold_factor,
                           config.a2_integrator);
    } catch (const Error& e) {
      report.a2.verdict = Verdict::Inconclusive;
      report.a2.diagnostic = e.what();
    }
  }
  report.timings.a2 = seconds_since(t0);

  t0 = Clock::now();
  try {
    report.a3 = check_A3(system, domain, config.degree_samples, config.integrator);
  } catch (const Error& e) {
    report.a3.verdict = Verdict::Inconclusive;
    report.a3.diagnostic = e.what();
  }
  report.timings.a3 = seconds_since(t0);

  const Verdict all[] = {report.a1.verdict, report.a2.verdict, report.a3.verdict};
  report.overall = Verdict::Pass;
  for (Verdict v : all) {
    if (v == Verdict::Fail) report.overall = Verdict::Fail;
    else if (v == Verdict::Inconclusive && report.overall == Verdict::Pass) report.overall = Verdict::Inconclusive;
  }
  report.timings.total = seconds_since(start);
  return report;
}

}  // namespace perorbit
