#include "perorbit/orbit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

#include "perorbit/averaging.hpp"
#include "perorbit/checker.hpp"
#include "perorbit/degree.hpp"
#include "perorbit/error.hpp"
#include "perorbit/flow.hpp"
#include "perorbit/linalg.hpp"

namespace perorbit {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Weights of the exact kernel integral against a piecewise-linear forcing:
// int_0^dt exp(B (dt - s)) [g_a (1 - s/dt) + g_b s/dt] ds = W_a g_a + W_b g_b.
struct KernelWeights {
  Eigen::MatrixXd step;  // exp(B dt)
  Eigen::MatrixXd J0;    // int_0^dt exp(B u) du
  Eigen::MatrixXd K;     // int_0^dt exp(B (dt - u)) u du
};

KernelWeights kernel_weights(const Eigen::MatrixXd& B, double dt) {
  const auto m = B.rows();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(3 * m, 3 * m);
  big.block(0, 0, m, m) = B * dt;
  big.block(0, m, m, m) = Eigen::MatrixXd::Identity(m, m) * dt;
  big.block(m, 2 * m, m, m) = Eigen::MatrixXd::Identity(m, m) * dt;
  const Eigen::MatrixXd E = linalg::expm(big);
  return {E.block(0, 0, m, m), E.block(0, m, m, m), E.block(0, 2 * m, m, m)};
}

struct NewtonState {
  Eigen::VectorXd F;
  Eigen::MatrixXd M;
};

NewtonState period_map(const SystemSpec& system, double eps, const Eigen::VectorXd& u0, const IntegratorConfig& config) {
  const int n = system.k() + system.m();
  const auto nu = static_cast<std::size_t>(n);
  OdeProblem p;
  p.dimension = nu + nu * nu;
  p.rhs = [&system, eps, n, nu](double t, std::span<const double> u, std::span<double> du) {
    system.full_rhs(eps, t, u.first(nu), du.first(nu));
    std::array<double, 64> fixed;
    std::vector<double> heap;
    double* jac = fixed.data();
    if (nu * nu > fixed.size()) {
      heap.resize(nu * nu);
      jac = heap.data();
    }
    system.full_jacobian(eps, t, u.first(nu), {jac, nu * nu});
    Eigen::Map<const Eigen::MatrixXd> J(jac, n, n);
    Eigen::Map<const Eigen::MatrixXd> Y(u.data() + nu, n, n);
    Eigen::Map<Eigen::MatrixXd> dY(du.data() + nu, n, n);
    dY.noalias() = J * Y;
  };
  p.t_start = 0.0;
  p.t_end = system.period();
  p.initial_state.assign(u0.data(), u0.data() + n);
  p.initial_state.resize(p.dimension, 0.0);
  for (std::size_t i = 0; i < nu; ++i) p.initial_state[nu + i * (nu + 1)] = 1.0;
  const auto traj = integrate(p, config);
  const auto end = traj.final_state();
  NewtonState s;
  s.F = Eigen::Map<const Eigen::VectorXd>(end.data(), n) - u0;
  s.M = Eigen::Map<const Eigen::MatrixXd>(end.data() + nu, n, n);
  return s;
}

Trajectory full_trajectory(const SystemSpec& system, double eps, const Eigen::VectorXd& u0,
                           const IntegratorConfig& config) {
  OdeProblem p;
  p.dimension = static_cast<std::size_t>(u0.size());
  p.rhs = [&system, eps](double t, std::span<const double> u, std::span<double> du) { system.full_rhs(eps, t, u, du); };
  p.t_start = 0.0;
  p.t_end = system.period();
  p.initial_state.assign(u0.data(), u0.data() + u0.size());
  return integrate(p, config);
}

}  // namespace

namespace {

using Map = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Damped Newton with a central-difference Jacobian; nullopt (with a reason) on failure.
std::optional<Eigen::VectorXd> damped_newton(const Map& F, Eigen::VectorXd x, const AveragedZeroConfig& config,
                                             int max_steps, std::string& reason) {
  const auto k = x.size();
  Eigen::VectorXd Fx;
  try {
    Fx = F(x);
  } catch (const Error& e) {
    reason = e.what();
    return std::nullopt;
  }
  double r = Fx.norm();
  for (int step = 0; r > config.tol; ++step) {
    if (step >= max_steps) {
      reason = "Newton did not reach the tolerance in " + std::to_string(max_steps) + " steps (residual " +
               std::to_string(r) + ")";
      return std::nullopt;
    }
    Eigen::MatrixXd J(k, k);
    try {
      for (Eigen::Index j = 0; j < k; ++j) {
        const double h = config.fd_step * std::max(1.0, std::fabs(x(j)));
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        J.col(j) = (F(xp) - F(xm)) / (2.0 * h);
      }
    } catch (const Error& e) {
      reason = e.what();
      return std::nullopt;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible() || !(linalg::condition_number(J) < 1e14)) {
      reason = "singular averaged-map Jacobian (residual " + std::to_string(r) + ")";
      return std::nullopt;
    }
    const Eigen::VectorXd dx = -lu.solve(Fx);
    double lambda = 1.0;
    bool improved = false;
    for (int h = 0; h <= config.max_halvings; ++h, lambda *= 0.5) {
      const Eigen::VectorXd trial = x + lambda * dx;
      Eigen::VectorXd Ft;
      try {
        Ft = F(trial);
      } catch (const Error&) {
        continue;
      }
      if (Ft.norm() < r) {
        x = trial;
        Fx = Ft;
        r = Ft.norm();
        improved = true;
        break;
      }
    }
    if (!improved) {
      reason = "damped Newton stalled at residual " + std::to_string(r);
      return std::nullopt;
    }
  }
  return x;
}

// Cell [rho0, rho1] x [theta0, theta1] in star coordinates c + rho (b(theta) - c).
struct StarCell {
  double rho0, rho1, theta0, theta1;
};

// Bisects star cells of a planar domain, keeping one with nonzero winding
// number, and runs Newton from the centre once cells are small.
std::optional<Eigen::VectorXd> localize_by_winding(const Map& coarse, const Map& fine, const DomainSpec& domain,
                                                   const AveragedZeroConfig& config, std::string& reason) {
  const Eigen::VectorXd c = domain.center();
  const double scale = 0.5 * domain.diameter();
  const auto point = [&](double rho, double theta) {
    Eigen::VectorXd dir(2);
    dir << std::cos(theta), std::sin(theta);
    return Eigen::VectorXd(c + rho * (boundary_point_along(domain, dir) - c));
  };
  const auto winding = [&](const StarCell& q) {
    const PlaneCurve edge = [&](double s) {
      const double u = 4.0 * s;
      const int side = std::min(3, static_cast<int>(u));
      const double f = u - side;
      switch (side) {
        case 0: return point(q.rho0 + f * (q.rho1 - q.rho0), q.theta0);
        case 1: return point(q.rho1, q.theta0 + f * (q.theta1 - q.theta0));
        case 2: return point(q.rho1 - f * (q.rho1 - q.rho0), q.theta1);
        default: return point(q.rho0, q.theta1 - f * (q.theta1 - q.theta0));
      }
    };
    return winding_number(coarse, edge, 64).degree;
  };

  const double theta0 = 0.1;
  StarCell cell{0.0, 1.0, theta0, theta0 + 2.0 * std::numbers::pi};
  int w = 0;
  try {
    w = brouwer_degree(coarse, domain).degree;
  } catch (const Error& e) {
    reason = std::string("winding localization: ") + e.what();
    return std::nullopt;
  }
  if (w == 0) {
    reason = "averaged map has winding number 0 along the boundary";
    return std::nullopt;
  }
  // Full annuli first: their radial edges cancel, so only circles are traced.
  const auto circle = [&](double rho) {
    if (rho == 0.0) return 0;
    const PlaneCurve ring = [&](double s) { return point(rho, theta0 + 2.0 * std::numbers::pi * s); };
    return winding_number(coarse, ring, 64).degree;
  };
  int w_inner = 0, w_outer = w;
  while ((cell.rho1 - cell.rho0) > 1e-5) {
    bool done = false;
    for (double frac : {0.49, 0.43, 0.57}) {
      const double cut = cell.rho0 + frac * (cell.rho1 - cell.rho0);
      try {
        const int wc = circle(cut);
        if (wc != w_inner) {
          cell.rho1 = cut;
          w_outer = wc;
        } else {
          cell.rho0 = cut;
          w_inner = wc;
        }
        done = true;
        break;
      } catch (const ZeroOnBoundary&) {
        continue;
      } catch (const NonConvergent&) {
        continue;
      } catch (const Error& e) {
        reason = std::string("winding localization: ") + e.what();
        return std::nullopt;
      }
    }
    if (!done) {
      reason = "winding localization: the map vanishes on every trial circle";
      return std::nullopt;
    }
  }
  w = w_outer - w_inner;
  for (int level = 0; level < 80; ++level) {
    const double radial = (cell.rho1 - cell.rho0) * scale;
    const double angular = (cell.theta1 - cell.theta0) * cell.rho1 * scale;
    if (std::max(radial, angular) < 1e-3 * scale) {
      const Eigen::VectorXd mid = point(0.5 * (cell.rho0 + cell.rho1), 0.5 * (cell.theta0 + cell.theta1));
      std::string why;
      auto x = damped_newton(fine, mid, config, 8, why);
      if (x && domain.contains(*x) && domain.boundary_distance(*x) > 1e-6) return x;
      if (std::max(radial, angular) < 1e-12 * scale) {
        reason = "winding localization shrank the cell without Newton convergence: " + why;
        return std::nullopt;
      }
    }
    const bool split_rho = radial >= angular;
    bool done = false;
    for (double frac : {0.49, 0.43, 0.57}) {
      StarCell a = cell, b = cell;
      if (split_rho) {
        a.rho1 = b.rho0 = cell.rho0 + frac * (cell.rho1 - cell.rho0);
      } else {
        a.theta1 = b.theta0 = cell.theta0 + frac * (cell.theta1 - cell.theta0);
      }
      try {
        const int wa = winding(a);
        if (wa != 0) {
          cell = a;
          w = wa;
        } else {
          cell = b;
          w = w - wa;
        }
        done = true;
        break;
      } catch (const ZeroOnBoundary&) {
        continue;
      } catch (const NonConvergent&) {
        continue;
      } catch (const Error& e) {
        reason = std::string("winding localization: ") + e.what();
        return std::nullopt;
      }
    }
    if (!done) {
      reason = "winding localization: the map vanishes on every trial cut";
      return std::nullopt;
    }
  }
  reason = "winding localization did not converge";
  return std::nullopt;
}

}  // namespace

Eigen::VectorXd averaged_zero(const SystemSpec& system, const DomainSpec& domain, const AveragedZeroConfig& config) {
  if (domain.dimension() != system.k()) throw InvalidArgument("orbit_solver", "averaged_zero", "domain dimension must equal k");
  const auto grid = interior_grid(domain, config.grid_per_axis);
  if (grid.empty()) throw NoZeroFound("no interior grid points in the domain");
  const Map fine = [&](const Eigen::VectorXd& xi) { return averaged_map(system, xi, config.integrator); };
  const Map coarse = [&](const Eigen::VectorXd& xi) { return averaged_map(system, xi, config.scan_integrator); };

  Eigen::VectorXd x = grid.front();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : grid) {
    const double r = coarse(p).norm();
    if (r < best) {
      best = r;
      x = p;
    }
  }
  const auto inside = [&](const Eigen::VectorXd& p) { return domain.contains(p) && domain.boundary_distance(p) > 1e-6; };
  std::string reason;
  auto found = damped_newton(fine, x, config, config.max_newton_steps, reason);
  if (found && inside(*found)) return *found;
  if (found) reason = "zero of the averaged map lies on or outside the boundary";
  if (domain.dimension() == 2) {
    std::string why;
    found = localize_by_winding(coarse, fine, domain, config, why);
    if (found) return *found;
    reason += "; " + why;
  }
  throw NoZeroFound(reason);
}

Eigen::VectorXd FastPeriodicSolution::at(double t) const {
  const auto n = static_cast<Eigen::Index>(times.size());
  if (n == 0) return Eigen::VectorXd(0);
  double r = std::fmod(t, period);
  if (r < 0.0) r += period;
  const double pos = r / period * static_cast<double>(n);
  auto i = static_cast<Eigen::Index>(std::floor(pos));
  const double w = pos - static_cast<double>(i);
  i %= n;
  return (1.0 - w) * values.col(i) + w * values.col((i + 1) % n);
}

FastPeriodicSolution solve_fast_periodic(const SystemSpec& system, const SpectralSplit& split,
                                         const DichotomyConstants& constants, double gamma,
                                         const std::function<Eigen::VectorXd(double)>& x_path,
                                         const FastSolveOptions& options) {
  FastPeriodicSolution out;
  out.period = system.period();
  const int m = system.m();
  if (m == 0) return out;
  if (split.dimension() != m) throw InvalidArgument("orbit_solver", "solve_fast_periodic", "split does not match m");
  if (options.nodes < 8) throw InvalidArgument("orbit_solver", "solve_fast_periodic", "need at least 8 grid nodes");
  out.contraction_bound = constants.c * gamma / constants.delta;
  if (!(out.contraction_bound < 1.0)) {
    throw ContractionViolated("orbit_solver", "solve_fast_periodic", "c gamma / delta >= 1");
  }
  const int n = options.nodes;
  const double T = system.period();
  const double dt = T / n;
  const Eigen::MatrixXd& A = system.A();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);

  const auto plus = kernel_weights(-A * split.P_plus, dt);
  const Eigen::MatrixXd Wa_plus = (plus.J0 - plus.K / dt) * split.P_plus;
  const Eigen::MatrixXd Wb_plus = (plus.K / dt) * split.P_plus;
  const Eigen::MatrixXd close_plus = I - linalg::expm(-A * split.P_plus * T) * split.P_plus;
  const auto minus = kernel_weights(A * split.P_minus, dt);
  const Eigen::MatrixXd Wa_minus = (minus.K / dt) * split.P_minus;
  const Eigen::MatrixXd Wb_minus = (minus.J0 - minus.K / dt) * split.P_minus;
  const Eigen::MatrixXd close_minus = I - linalg::expm(A * split.P_minus * T) * split.P_minus;
  const auto lu_plus = close_plus.partialPivLu();
  const auto lu_minus = close_minus.partialPivLu();

  out.times.resize(static_cast<std::size_t>(n));
  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    const double t = i == n ? T : dt * i;
    if (i < n) out.times[static_cast<std::size_t>(i)] = t;
    xs[static_cast<std::size_t>(i)] = x_path(t);
    if (xs[static_cast<std::size_t>(i)].size() != system.k()) {
      throw InvalidArgument("orbit_solver", "solve_fast_periodic", "x_path must return k-vectors");
    }
  }

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd g(m, n + 1), next(m, n);
  std::vector<double> buf(static_cast<std::size_t>(m));
  const auto mu = static_cast<std::size_t>(m);
  auto G = [&]() {
    for (int i = 0; i <= n; ++i) {
      const auto& x = xs[static_cast<std::size_t>(i)];
      const Eigen::VectorXd yi = y.col(i % n);
      system.psi2(i == n ? T : dt * i, {x.data(), static_cast<std::size_t>(x.size())}, {yi.data(), mu}, buf);
      for (int r = 0; r < m; ++r) g(r, i) = buf[static_cast<std::size_t>(r)];
    }
    if (!g.allFinite()) {
      throw InvalidArgument("orbit_solver", "solve_fast_periodic", "psi2 is not finite on the quadrature grid");
    }
    // Forward recursion for the decaying part, backward for the growing part.
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) z = plus.step * z + Wa_plus * g.col(i) + Wb_plus * g.col(i + 1);
    z = lu_plus.solve(z);
    for (int i = 0; i < n; ++i) {
      next.col(i) = z;
      z = plus.step * z + Wa_plus * g.col(i) + Wb_plus * g.col(i + 1);
    }
    z.setZero();
    for (int i = n - 1; i >= 0; --i) z = minus.step * z - (Wa_minus * g.col(i) + Wb_minus * g.col(i + 1));
    z = lu_minus.solve(z);
    for (int i = n - 1; i >= 0; --i) {
      z = minus.step * z - (Wa_minus * g.col(i) + Wb_minus * g.col(i + 1));
      next.col(i) += z;
    }
  };

  for (int it = 1;; ++it) {
    if (it > options.max_iterations) {
      throw MaxIterations("orbit_solver", "solve_fast_periodic", "Picard iteration did not converge");
    }
    G();
    double diff = 0.0;
    for (int i = 0; i < n; ++i) diff = std::max(diff, dichotomy_norm(split, next.col(i) - y.col(i)));
    out.differences.push_back(diff);
    y = next;
    if (diff <= options.tol) {
      out.iterations = std::max(1, it - 1);
      break;
    }
  }
  out.values = y;
  return out;
}

void PeriodicOrbit::write_csv(std::ostream& os, int k, int m) const {
  os << "t";
  for (int i = 1; i <= k; ++i) os << ",x" << i;
  for (int i = 1; i <= m; ++i) os << ",y" << i;
  os << "\n";
  const int samples = 256;
  const double T = trajectory.t_end() - trajectory.t_start();
  std::vector<double> u(trajectory.dimension());
  for (int j = 0; j < samples; ++j) {
    const double t = trajectory.t_start() + T * j / samples;
    trajectory.evaluate(t, u);
    os << fmt17(t);
    for (double v : u) os << "," << fmt17(v);
    os << "\n";
  }
}

PeriodicOrbit shoot(const SystemSpec& system, double epsilon, const ShootGuess& guess, const ShootOptions& options) {
  const int k = system.k(), m = system.m(), n = k + m;
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("orbit_solver", "shoot", "epsilon must be >= 0");
  if (guess.xi.size() != k || guess.y0.size() != m) throw InvalidArgument("orbit_solver", "shoot", "guess dimensions");
  if (!guess.xi.allFinite() || !guess.y0.allFinite()) throw InvalidArgument("orbit_solver", "shoot", "guess must be finite");
  PeriodicOrbit orbit;
  orbit.epsilon = epsilon;
  orbit.r_y = options.r_y;
  Eigen::VectorXd u(n);
  u << guess.xi, guess.y0;

  IntegratorConfig cfg = options.integrator;
  if (!std::isfinite(cfg.state_bound)) cfg.state_bound = 1e8;
  NewtonState s = period_map(system, epsilon, u, cfg);
  double r = s.F.norm();
  int it = 0;
  while (r > options.tol) {
    if (it >= options.max_iterations) {
      throw MaxIterations("orbit_solver", "shoot",
                          "Newton did not converge in " + std::to_string(options.max_iterations) + " iterations (residual " +
                              std::to_string(r) + ")");
    }
    const Eigen::MatrixXd J = s.M - Eigen::MatrixXd::Identity(n, n);
    const double cond = linalg::condition_number(J);
    if (!(cond <= options.condition_limit)) {
      throw SingularMatrix("orbit_solver", "shoot", "period-map Jacobian is near singular (condition " + std::to_string(cond) + ")");
    }
    const Eigen::VectorXd du = -J.partialPivLu().solve(s.F);
    double lambda = 1.0;
    bool moved = false;
    for (int h = 0; h <= options.max_halvings; ++h, lambda *= 0.5) {
      const Eigen::VectorXd trial = u + lambda * du;
      try {
        NewtonState st = period_map(system, epsilon, trial, cfg);
        const double rt = st.F.norm();
        if (rt < r || h == options.max_halvings) {
          u = trial;
          s = std::move(st);
          r = rt;
          moved = true;
          break;
        }
      } catch (const IntegrationError&) {
      }
    }
    if (!moved) throw MaxIterations("orbit_solver", "shoot", "every damped Newton trial left the integrable region");
    ++it;
  }
  orbit.u0 = u;
  orbit.residual = r;
  orbit.iterations = it;
  orbit.trajectory = full_trajectory(system, epsilon, u, cfg);
  orbit.reverify_residual =
      (Eigen::Map<const Eigen::VectorXd>(orbit.trajectory.final_state().data(), n) - u).norm();

  Eigen::VectorXd box_lo, box_hi;
  if (options.domain) {
    const Eigen::VectorXd mid = 0.5 * (options.domain->box_lo() + options.domain->box_hi());
    const Eigen::VectorXd half = options.domain->box_hi() - mid;
    box_lo = mid - 2.0 * half;
    box_hi = mid + 2.0 * half;
  }
  orbit.in_domain = options.domain != nullptr;
  std::vector<double> state(static_cast<std::size_t>(n));
  const double T = system.period();
  for (int j = 0; j < options.z_samples; ++j) {
    const double t = T * j / options.z_samples;
    orbit.trajectory.evaluate(t, state);
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(state.data(), k);
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(state.data() + k, m);
    const Eigen::VectorXd z = j == 0 ? x : flow(system, 0.0, t, x, cfg);
    if (options.domain) {
      if (((z - box_lo).array() < 0.0).any() || ((box_hi - z).array() < 0.0).any()) {
        throw DivergedOutsideDomain("z sample at t=" + std::to_string(t) + " left twice the bounding box of U");
      }
      if (!options.domain->contains(z)) orbit.in_domain = false;
    }
    orbit.z_times.push_back(t);
    orbit.z_samples.push_back(z);
    if (m > 0) orbit.y_sup = std::max(orbit.y_sup, options.split ? dichotomy_norm(*options.split, yv) : yv.norm());
  }
  for (std::size_t a = 0; a < orbit.z_samples.size(); ++a) {
    for (std::size_t b = a + 1; b < orbit.z_samples.size(); ++b) {
      orbit.z_diameter = std::max(orbit.z_diameter, (orbit.z_samples[a] - orbit.z_samples[b]).norm());
    }
  }
  orbit.y_within_bound = std::isnan(orbit.r_y) || orbit.y_sup <= orbit.r_y * (1.0 + 1e-3);
  return orbit;
}

SolveContext prepare_solve(const SystemSpec& system, const DomainSpec& domain, const SolveConfig& config) {
  SolveContext ctx;
  ctx.xi_star = averaged_zero(system, domain, config.averaged);
  ctx.guess.xi = ctx.xi_star;
  ctx.guess.y0 = Eigen::VectorXd::Zero(system.m());
  if (system.m() == 0) {
    ctx.r_y = 0.0;
    return ctx;
  }
  ctx.split = spectral_split(system.A());
  ctx.constants = dichotomy_constants(*ctx.split, system.A());
  const auto fb = flow_bound(system, domain, config.flow_grid, config.flow_inflation);
  double probe = config.growth_probe;
  for (int pass = 0; pass < 2; ++pass) {
    ctx.gamma = growth_bounds(system, *ctx.split, domain, probe, config.growth_samples).gamma;
    ctx.r_y = fb.bounded ? y_ball_radius(ctx.constants.c, ctx.constants.delta, ctx.gamma, fb.M_flow)
                         : std::numeric_limits<double>::infinity();
    if (ctx.r_y <= probe) break;
    probe = 1.5 * ctx.r_y;
  }
  const auto base = flow_trajectory(system, system.period(), 0.0, ctx.xi_star, config.shoot.integrator);
  std::vector<double> buf(static_cast<std::size_t>(system.k()));
  const auto x_path = [&](double t) {
    base.evaluate(t, buf);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(buf.data(), system.k()));
  };
  const auto fast = solve_fast_periodic(system, *ctx.split, ctx.constants, ctx.gamma, x_path, config.fast);
  ctx.guess.y0 = fast.at(0.0);
  return ctx;
}

PeriodicOrbit solve_orbit(const SystemSpec& system, const DomainSpec& domain, double epsilon, const SolveContext& context,
                          const SolveConfig& config, const std::optional<ShootGuess>& warm_start) {
  ShootOptions opts = config.shoot;
  opts.domain = &domain;
  opts.split = context.split ? &*context.split : nullptr;
  opts.r_y = context.r_y;
  const ShootGuess& first = warm_start ? *warm_start : context.guess;
  std::string note;
  try {
    PeriodicOrbit orbit = shoot(system, epsilon, first, opts);
    orbit.seed_source = warm_start ? "warm_start" : "averaged_zero";
    return orbit;
  } catch (const Error& e) {
    if (config.fallback_grid < 2) throw;
    note = std::string(warm_start ? "warm start" : "averaged zero") + " seed failed: " + e.what();
  }

  // Fallback: interior grid points ranked by the period-map residual.
  const int k = system.k(), m = system.m();
  IntegratorConfig scan = config.averaged.scan_integrator;
  scan.state_bound = 1e8;
  std::vector<std::pair<double, Eigen::VectorXd>> ranked;
  for (const auto& xi : interior_grid(domain, config.fallback_grid)) {
    Eigen::VectorXd u(k + m);
    u << xi, first.y0;
    try {
      const auto traj = full_trajectory(system, epsilon, u, scan);
      const double r = (Eigen::Map<const Eigen::VectorXd>(traj.final_state().data(), k + m) - u).norm();
      if (std::isfinite(r)) ranked.emplace_back(r, u);
    } catch (const IntegrationError&) {
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t tries = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(config.fallback_tries));
  for (std::size_t i = 0; i < tries; ++i) {
    const Eigen::VectorXd& u = ranked[i].second;
    try {
      PeriodicOrbit orbit = shoot(system, epsilon, ShootGuess{u.head(k), u.tail(m)}, opts);
      orbit.seed_source = "residual_scan";
      orbit.seed_note = note;
      return orbit;
    } catch (const Error& e) {
      note += "; scan seed " + std::to_string(i) + ": " + e.what();
    }
  }
  throw MaxIterations("orbit_solver", "solve_orbit", note);
}

SweepResult continue_in_eps(const SystemSpec& system, const DomainSpec& domain, const std::vector<double>& eps_list,
                            const SolveConfig& config) {
  if (eps_list.empty()) throw InvalidArgument("orbit_solver", "continue_in_eps", "eps_list must be nonempty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0) || !std::isfinite(eps_list[i])) {
      throw InvalidArgument("orbit_solver", "continue_in_eps", "eps values must be positive");
    }
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
      throw InvalidArgument("orbit_solver", "continue_in_eps", "eps_list must be strictly decreasing");
    }
  }
  const SolveContext ctx = prepare_solve(system, domain, config);
  SweepResult out;
  std::optional<ShootGuess> warm;
  for (double eps : eps_list) {
    SweepEntry e;
    e.epsilon = eps;
    try {
      e.orbit = solve_orbit(system, domain, eps, ctx, config, warm);
      warm = ShootGuess{e.orbit->u0.head(system.k()), e.orbit->u0.tail(system.m())};
    } catch (const Error& err) {
      e.error = err.what();
    }
    out.entries.push_back(std::move(e));
  }
  std::vector<double> lx, ly;
  double prev = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  for (const auto& e : out.entries) {
    if (!e.orbit) {
      decreasing = false;
      continue;
    }
    if (!(e.orbit->z_diameter < prev)) decreasing = false;
    prev = e.orbit->z_diameter;
    if (e.orbit->z_diameter > 0.0) {
      lx.push_back(std::log(e.epsilon));
      ly.push_back(std::log(e.orbit->z_diameter));
    }
  }
  out.diameters_strictly_decreasing = decreasing && out.entries.size() >= 2;
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << "eps,residual,z_diameter,y_sup,iters\n";
  for (const auto& e : sweep.entries) {
    os << fmt17(e.epsilon);
    if (e.orbit) {
      os << "," << fmt17(e.orbit->residual) << "," << fmt17(e.orbit->z_diameter) << "," << fmt17(e.orbit->y_sup) << ","
         << e.orbit->iterations;
    } else {
      os << ",nan,nan,nan,-1";
    }
    os << "\n";
  }
}

}  // namespace perorbit
