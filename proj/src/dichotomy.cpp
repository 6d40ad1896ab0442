#include "perorbit/dichotomy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "perorbit/error.hpp"
#include "perorbit/linalg.hpp"

namespace perorbit {

namespace {

constexpr int kMaxSignIterations = 50;
constexpr int kGelfandSquarings = 50;
constexpr int kGridPoints = 256;

double radical_inverse(unsigned base, std::size_t index) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

constexpr std::array<unsigned, 16> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

// Decay rate of t -> |exp(t G) P| from |E^(2^j)|^(1/2^j), E = exp(h G) P.
double decay_rate(const Eigen::MatrixXd& G, const Eigen::MatrixXd& P, double h) {
  Eigen::MatrixXd B = linalg::expm(h * G) * P;
  double nb = linalg::norm_inf(B);
  if (nb == 0.0) return std::numeric_limits<double>::infinity();
  double log_scale = std::log(nb);
  B /= nb;
  double power = 1.0;
  for (int j = 0; j < kGelfandSquarings; ++j) {
    Eigen::MatrixXd B2 = B * B;
    const double n2 = linalg::norm_inf(B2);
    if (n2 == 0.0) return std::numeric_limits<double>::infinity();
    log_scale = 2.0 * log_scale + std::log(n2);
    power *= 2.0;
    B = B2 / n2;
  }
  return -log_scale / (power * h);
}

struct GrowthSample {
  double t;
  Eigen::VectorXd x;
  Eigen::VectorXd y_unit;  // dichotomy norm 1
  double radial;           // in (0, 1]
};

std::vector<GrowthSample> draw_samples(const SystemSpec& system, const SpectralSplit& split, const DomainSpec& region,
                                       std::size_t n, std::size_t start, const std::vector<Eigen::VectorXd>& boundary) {
  const int k = system.k(), m = system.m();
  std::vector<GrowthSample> out;
  out.reserve(n);
  const std::size_t n_boundary = boundary.empty() ? 0 : n / 5;
  std::size_t index = start;
  const auto& lo = region.box_lo();
  const auto& hi = region.box_hi();
  while (out.size() < n) {
    ++index;
    GrowthSample s;
    s.t = system.period() * radical_inverse(kPrimes[0], index);
    if (out.size() < n_boundary) {
      s.x = boundary[(index - start) % boundary.size()];
    } else {
      s.x.resize(k);
      for (int i = 0; i < k; ++i) s.x(i) = lo(i) + (hi(i) - lo(i)) * radical_inverse(kPrimes[1 + i], index);
      if (!region.contains(s.x)) continue;
    }
    s.y_unit.resize(m);
    for (int i = 0; i < m; ++i) s.y_unit(i) = 2.0 * radical_inverse(kPrimes[4 + i], index) - 1.0;
    const double dn = m > 0 ? dichotomy_norm(split, s.y_unit) : 0.0;
    if (m > 0 && dn < 1e-3) continue;
    if (m > 0) s.y_unit /= dn;
    const double u = radical_inverse(kPrimes[4 + m], index);
    s.radial = m > 0 ? std::pow(std::max(u, 1e-3), 1.0 / m) : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

struct RawBound {
  double M = 0.0;
  double gamma = 0.0;
};

struct Evaluated {
  double f0;  // |psi2(t, x, 0)|
  double fy;  // |psi2(t, x, y)|
  double ny;  // |y|
};

Evaluated evaluate(const SystemSpec& system, const SpectralSplit& split, const GrowthSample& s, double radius) {
  const int m = system.m();
  const auto mu = static_cast<std::size_t>(m);
  std::vector<double> zero(mu, 0.0), out(mu);
  Eigen::VectorXd y = s.y_unit * (radius * s.radial);
  system.psi2(s.t, {s.x.data(), static_cast<std::size_t>(s.x.size())}, zero, out);
  Evaluated e;
  e.f0 = dichotomy_norm(split, Eigen::Map<Eigen::VectorXd>(out.data(), m));
  system.psi2(s.t, {s.x.data(), static_cast<std::size_t>(s.x.size())}, {y.data(), mu}, out);
  e.fy = dichotomy_norm(split, Eigen::Map<Eigen::VectorXd>(out.data(), m));
  e.ny = radius * s.radial;
  return e;
}

RawBound fit(const std::vector<Evaluated>& values) {
  RawBound b;
  for (const auto& v : values) b.M = std::max(b.M, v.f0);
  for (const auto& v : values) {
    if (v.ny > 0.0) b.gamma = std::max(b.gamma, (v.fy - b.M) / v.ny);
  }
  return b;
}

std::vector<Evaluated> evaluate_all(const SystemSpec& system, const SpectralSplit& split,
                                    const std::vector<GrowthSample>& samples, double radius) {
  std::vector<Evaluated> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto e = evaluate(system, split, s, radius);
    if (!std::isfinite(e.f0) || !std::isfinite(e.fy)) {
      throw UnboundedGrowth("psi2 is not finite at a sampled point");
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace

SpectralSplit spectral_split(const Eigen::MatrixXd& A, double tol) {
  const auto m = A.rows();
  if (m < 1 || A.cols() != m) throw InvalidArgument("dichotomy", "spectral_split", "A must be square with m >= 1");
  if (!A.allFinite()) throw InvalidArgument("dichotomy", "spectral_split", "A has non-finite entries");
  if (!(tol > 0.0)) throw InvalidArgument("dichotomy", "spectral_split", "tol must be positive");
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);

  Eigen::MatrixXd S = A;
  int it = 0;
  double residual = linalg::norm_inf(S * S - I);
  double best = residual;
  int stalled = 0;
  while (residual > tol) {
    if (it >= kMaxSignIterations) {
      throw ImaginaryAxisEigenvalue("sign iteration did not converge in 50 steps (residual " +
                                    std::to_string(residual) + ")");
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
    if (!(lu.rcond() > 1e-14)) {
      throw ImaginaryAxisEigenvalue("numerically singular sign iterate; A has an eigenvalue on or near the imaginary axis");
    }
    double mu = 1.0;
    if (residual > 1e-2) mu = std::pow(std::fabs(lu.determinant()), -1.0 / static_cast<double>(m));
    if (!std::isfinite(mu) || mu <= 0.0) mu = 1.0;
    S = 0.5 * (mu * S + lu.inverse() / mu);
    ++it;
    residual = linalg::norm_inf(S * S - I);
    if (!std::isfinite(residual)) throw ImaginaryAxisEigenvalue("sign iteration produced non-finite values");
    if (residual < 0.5 * best) {
      best = residual;
      stalled = 0;
    } else if (++stalled >= 8) {
      throw ImaginaryAxisEigenvalue("sign iteration stalled above tolerance");
    }
  }

  SpectralSplit split;
  split.P_plus = 0.5 * (I + S);
  split.P_minus = 0.5 * (I - S);
  split.iterations = it;
  const double h = 1.0 / std::max(linalg::norm_inf(A), 1e-300);
  const double rate_plus = decay_rate(-A * split.P_plus, split.P_plus, h);
  const double rate_minus = decay_rate(A * split.P_minus, split.P_minus, h);
  split.spectral_margin = std::min(rate_plus, rate_minus);
  if (!(split.spectral_margin > 0.0) || !std::isfinite(split.spectral_margin)) {
    throw ImaginaryAxisEigenvalue("spectral margin is not positive");
  }
  return split;
}

DichotomyConstants dichotomy_constants(const SpectralSplit& split, const Eigen::MatrixXd& A, double horizon) {
  if (A.rows() != split.dimension() || A.cols() != split.dimension()) {
    throw InvalidArgument("dichotomy", "dichotomy_constants", "A does not match the split");
  }
  DichotomyConstants out;
  out.delta = 0.95 * split.spectral_margin;
  if (horizon == 0.0) horizon = 10.0 / out.delta;
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("dichotomy", "dichotomy_constants", "horizon must be positive");
  }
  const double dt = horizon / (kGridPoints - 1);
  const Eigen::MatrixXd step_plus = linalg::expm(-dt * A * split.P_plus);
  const Eigen::MatrixXd step_minus = linalg::expm(dt * A * split.P_minus);
  Eigen::MatrixXd cur_plus = split.P_plus, cur_minus = split.P_minus;
  double c = 1.0;
  for (int i = 0; i < kGridPoints; ++i) {
    const double w = std::exp(out.delta * dt * i);
    c = std::max({c, linalg::norm2(cur_plus) * w, linalg::norm2(cur_minus) * w});
    cur_plus = step_plus * cur_plus;
    cur_minus = step_minus * cur_minus;
  }
  out.c = c;
  return out;
}

double dichotomy_norm(const SpectralSplit& split, const Eigen::VectorXd& y) {
  return std::max((split.P_plus * y).norm(), (split.P_minus * y).norm());
}

GrowthBounds growth_bounds(const SystemSpec& system, const SpectralSplit& split, const DomainSpec& x_region,
                           double y_radius_probe, std::size_t samples, const GrowthOptions& options) {
  if (samples < 100) throw InvalidArgument("dichotomy", "growth_bounds", "at least 100 samples are required");
  if (x_region.dimension() != system.k()) {
    throw InvalidArgument("dichotomy", "growth_bounds", "region dimension does not match k");
  }
  if (!(y_radius_probe > 0.0)) throw InvalidArgument("dichotomy", "growth_bounds", "probe radius must be positive");
  GrowthBounds out;
  out.probe_radius = y_radius_probe;
  out.samples = samples;
  out.region = x_region.describe();
  if (system.m() == 0) return out;
  if (split.dimension() != system.m()) throw InvalidArgument("dichotomy", "growth_bounds", "split does not match m");

  const auto boundary = sample_boundary(x_region, x_region.dimension() == 2 ? 64 : 128).points;
  const auto base = draw_samples(system, split, x_region, samples, 0, boundary);

  int consecutive = 0;
  double previous = -1.0;
  for (int j = 0; j <= 4; ++j) {
    const double g = fit(evaluate_all(system, split, base, y_radius_probe * std::ldexp(1.0, j))).gamma;
    if (previous >= 0.0) {
      if (g > 2.0 * previous) {
        if (++consecutive >= 2) {
          throw UnboundedGrowth("growth coefficient more than doubles with the probe radius; no affine bound");
        }
      } else {
        consecutive = 0;
      }
    }
    previous = g;
  }

  auto values = evaluate_all(system, split, base, y_radius_probe);
  RawBound raw = fit(values);
  const double inflate = 1.0 + options.inflation;
  out.M = raw.M * inflate;
  out.gamma = raw.gamma * inflate;
  for (int round = 1; round <= options.max_validation_rounds; ++round) {
    const auto fresh =
        draw_samples(system, split, x_region, samples, samples * 7919 * static_cast<std::size_t>(round), boundary);
    const auto fresh_values = evaluate_all(system, split, fresh, y_radius_probe);
    std::size_t violations = 0;
    for (const auto& v : fresh_values) {
      if (v.f0 > out.M || v.fy > out.M + out.gamma * v.ny) ++violations;
    }
    out.validation_rounds = round;
    out.validation_violation_rate = static_cast<double>(violations) / static_cast<double>(fresh_values.size());
    if (violations == 0) break;
    values.insert(values.end(), fresh_values.begin(), fresh_values.end());
    raw = fit(values);
    out.M = raw.M * inflate;
    out.gamma = raw.gamma * inflate;
  }
  return out;
}

double y_ball_radius(double c, double delta, double gamma, double M) {
  if (!(c >= 1.0) || !(delta > 0.0) || !(gamma >= 0.0) || !(M >= 0.0)) {
    throw InvalidArgument("dichotomy", "y_ball_radius", "requires c >= 1, delta > 0, gamma >= 0, M >= 0");
  }
  if (gamma * c >= delta) {
    throw ContractionViolated("dichotomy", "y_ball_radius", "gamma >= delta / c: the fast equation is not a contraction");
  }
  return c * M / (delta - gamma * c);
}

}  // namespace perorbit
