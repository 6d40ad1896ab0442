#include "perorbit/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "perorbit/error.hpp"

namespace perorbit {

namespace {

// Dormand & Prince (1980); dense output coefficients from Hairer's DOPRI5.
constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;   // largest shrink is 1/5
constexpr double kFacMax = 10.0;  // largest growth
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kUround = 2.3e-16;

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void Trajectory::evaluate(double t, std::span<double> out) const {
  const std::size_t n = times_.size();
  if (n == 1) {
    std::copy_n(states_.begin(), dim_, out.begin());
    return;
  }
  const bool forward = times_.back() > times_.front();
  const double lo = forward ? times_.front() : times_.back();
  const double hi = forward ? times_.back() : times_.front();
  const double slack = 1e-12 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
  if (t < lo - slack || t > hi + slack) {
    throw InvalidArgument("flow_engine", "Trajectory::evaluate",
                          "time " + std::to_string(t) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  // Interval i covers [times_[i], times_[i+1]].
  std::size_t i;
  if (forward) {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    i = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  } else {
    auto it = std::upper_bound(times_.begin(), times_.end(), t, [](double a, double b) { return a > b; });
    i = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  }
  i = std::min(i, n - 2);
  const double theta = (t - times_[i]) / (times_[i + 1] - times_[i]);
  const double theta1 = 1.0 - theta;
  const double* y0 = states_.data() + i * dim_;
  const double* rc = dense_.data() + i * 4 * dim_;
  for (std::size_t j = 0; j < dim_; ++j) {
    out[j] = y0[j] + theta * (rc[j] + theta1 * (rc[dim_ + j] + theta * (rc[2 * dim_ + j] + theta1 * rc[3 * dim_ + j])));
  }
}

std::vector<double> Trajectory::at(double t) const {
  std::vector<double> out(dim_);
  evaluate(t, out);
  return out;
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "t";
  for (std::size_t j = 0; j < dim_; ++j) os << ",u" << (j + 1);
  os << "\n";
  char buf[40];
  for (std::size_t i = 0; i < times_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", times_[i]);
    os << buf;
    for (double v : state(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << "," << buf;
    }
    os << "\n";
  }
}

Trajectory integrate(const OdeProblem& problem, const IntegratorConfig& config) {
  const std::size_t n = problem.dimension;
  if (n == 0) throw InvalidArgument("flow_engine", "integrate", "dimension must be positive");
  if (problem.initial_state.size() != n) throw InvalidArgument("flow_engine", "integrate", "initial state has wrong size");
  if (!(config.rtol > 0.0) || !(config.atol > 0.0)) {
    throw InvalidArgument("flow_engine", "integrate", "tolerances must be positive");
  }
  if (config.max_steps == 0) throw InvalidArgument("flow_engine", "integrate", "max_steps must be positive");
  if (!std::isfinite(problem.t_start) || !std::isfinite(problem.t_end)) {
    throw InvalidArgument("flow_engine", "integrate", "time interval must be finite");
  }

  Trajectory traj;
  traj.dim_ = n;
  traj.times_.push_back(problem.t_start);
  traj.states_ = problem.initial_state;
  if (problem.t_end == problem.t_start) return traj;

  // Integrate in tau = dir * t with rhs dir * f(dir * tau, u).
  const double dir = problem.t_end > problem.t_start ? 1.0 : -1.0;
  const double tau_end = dir * problem.t_end;
  double tau = dir * problem.t_start;
  auto f = [&](double s, std::span<const double> u, std::vector<double>& du) {
    problem.rhs(dir * s, u, du);
    ++traj.evaluations_;
    if (dir < 0.0) {
      for (double& v : du) v = -v;
    }
    if (!all_finite(du)) {
      throw IntegrationError(IntegrationError::Kind::NonFiniteDerivative, dir * s, "non-finite derivative");
    }
  };

  const double span = tau_end - tau;
  const double hmax = config.max_step > 0.0 ? std::min(config.max_step, span) : span;

  std::vector<double> y = problem.initial_state, y1(n), ytmp(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  f(tau, y, k1);

  double h = config.initial_step;
  if (h <= 0.0) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = config.atol + config.rtol * std::fabs(y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * k1[i];
    f(tau + h, ytmp, k2);
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = config.atol + config.rtol * std::fabs(y[i]);
      der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::fabs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min({100.0 * h, h1, hmax});
  }
  h = std::min(h, hmax);

  double facold = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;
  while (tau < tau_end) {
    if (steps++ >= config.max_steps) {
      throw IntegrationError(IntegrationError::Kind::MaxStepsExceeded, dir * tau, "maximum number of steps exceeded");
    }
    if (0.1 * h <= kUround * std::max(1.0, std::fabs(tau))) {
      throw IntegrationError(IntegrationError::Kind::StepSizeUnderflow, dir * tau, "step size underflow");
    }
    bool last = false;
    if (tau + 1.01 * h >= tau_end) {
      h = tau_end - tau;
      last = true;
    }

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    f(tau + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(tau + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(tau + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(tau + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i) {
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    const double tau_new = last ? tau_end : tau + h;
    f(tau_new, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i) {
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    f(tau_new, y1, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = config.atol + config.rtol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      err += (e / sk) * (e / sk);
    }
    err = std::sqrt(err / static_cast<double>(n));

    const double fac11 = std::pow(err, kExpo);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
    double hnew = h / fac;

    if (err <= 1.0) {
      facold = std::max(err, 1e-4);
      ++traj.accepted_;
      for (double v : y1) {
        if (!(std::fabs(v) <= config.state_bound)) {
          throw IntegrationError(IntegrationError::Kind::OutOfBounds, dir * tau_new,
                                 "state left the bounding box |u| <= " + std::to_string(config.state_bound));
        }
      }
      const std::size_t base = traj.dense_.size();
      traj.dense_.resize(base + 4 * n);
      double* rc = traj.dense_.data() + base;
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        rc[i] = ydiff;
        rc[n + i] = bspl;
        rc[2 * n + i] = ydiff - h * k7[i] - bspl;
        rc[3 * n + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      tau = tau_new;
      y.swap(y1);
      k1.swap(k7);
      traj.times_.push_back(dir * tau);
      traj.states_.insert(traj.states_.end(), y.begin(), y.end());
      if (last) break;
      hnew = std::min(hnew, hmax);
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
    } else {
      hnew = h / std::min(1.0 / kFacMin, fac11 / kSafety);
      last_rejected = true;
      ++traj.rejected_;
    }
    h = hnew;
  }
  return traj;
}

}  // namespace perorbit
