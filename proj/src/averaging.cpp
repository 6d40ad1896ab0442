#include "perorbit/averaging.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "perorbit/error.hpp"

namespace perorbit {

namespace {

constexpr double kPhaseQuantum = 68719476736.0;  // 2^36
constexpr int kNormGrid = 512;

// Scratch storage for k x k Jacobians without heap traffic in the common case.
class JacobianBuffer {
 public:
  explicit JacobianBuffer(int k) : n_(static_cast<std::size_t>(k * k)) {
    if (n_ > fixed_.size()) heap_.resize(n_);
  }
  std::span<double> span() { return {n_ > fixed_.size() ? heap_.data() : fixed_.data(), n_}; }

 private:
  std::size_t n_;
  std::array<double, 64> fixed_{};
  std::vector<double> heap_;
};

void check_inputs(const SystemSpec& system, const PeriodicPath& y, const Eigen::VectorXd& xi, const char* op) {
  if (xi.size() != system.k()) throw InvalidArgument("averaging", op, "xi must have k entries");
  if (y.dimension() != system.m()) throw InvalidArgument("averaging", op, "y path dimension must equal m");
}

void check_time(const SystemSpec& system, double t, const char* op) {
  if (!(t >= 0.0 && t <= system.period())) throw InvalidArgument("averaging", op, "times must lie in [0, T]");
}

// phi(t, x, y(t)) into out.
void forcing(const SystemSpec& system, const PeriodicPath& y, double t, std::span<const double> x, std::span<double> out) {
  std::array<double, 16> ybuf{};
  std::vector<double> yheap;
  std::span<double> yv;
  const auto m = static_cast<std::size_t>(system.m());
  if (m <= ybuf.size()) {
    yv = {ybuf.data(), m};
  } else {
    yheap.resize(m);
    yv = yheap;
  }
  if (m > 0) y.evaluate(t, yv);
  system.phi(t, x, yv, out);
}

// (x, z) with z' = J z + phi.
RhsFunction forced_variational_rhs(const SystemSpec& system, const PeriodicPath& y) {
  return [&system, &y](double t, std::span<const double> u, std::span<double> du) {
    const int k = system.k();
    const auto ku = static_cast<std::size_t>(k);
    const auto x = u.first(ku);
    system.psi1(t, x, du.first(ku));
    JacobianBuffer jb(k);
    system.psi1_jacobian(t, x, jb.span());
    forcing(system, y, t, x, du.subspan(ku, ku));
    Eigen::Map<const Eigen::MatrixXd> J(jb.span().data(), k, k);
    Eigen::Map<const Eigen::VectorXd> z(u.data() + ku, k);
    Eigen::Map<Eigen::VectorXd> dz(du.data() + ku, k);
    dz.noalias() += J * z;
  };
}

// (x, X, z) with X' = J X and z' = J z + phi.
RhsFunction fundamental_rhs(const SystemSpec& system, const PeriodicPath& y) {
  return [&system, &y](double t, std::span<const double> u, std::span<double> du) {
    const int k = system.k();
    const auto ku = static_cast<std::size_t>(k);
    const auto x = u.first(ku);
    system.psi1(t, x, du.first(ku));
    JacobianBuffer jb(k);
    system.psi1_jacobian(t, x, jb.span());
    Eigen::Map<const Eigen::MatrixXd> J(jb.span().data(), k, k);
    Eigen::Map<const Eigen::MatrixXd> X(u.data() + ku, k, k);
    Eigen::Map<Eigen::MatrixXd> dX(du.data() + ku, k, k);
    dX.noalias() = J * X;
    const std::size_t zoff = ku + ku * ku;
    forcing(system, y, t, x, du.subspan(zoff, ku));
    Eigen::Map<const Eigen::VectorXd> z(u.data() + zoff, k);
    Eigen::Map<Eigen::VectorXd> dz(du.data() + zoff, k);
    dz.noalias() += J * z;
  };
}

// (x, W) with W' = -W J, optionally followed by zeta' = W phi(t, x, y(t)).
RhsFunction adjoint_rhs(const SystemSpec& system, const PeriodicPath& y, bool with_integral) {
  return [&system, &y, with_integral](double t, std::span<const double> u, std::span<double> du) {
    const int k = system.k();
    const auto ku = static_cast<std::size_t>(k);
    const auto x = u.first(ku);
    system.psi1(t, x, du.first(ku));
    JacobianBuffer jb(k);
    system.psi1_jacobian(t, x, jb.span());
    Eigen::Map<const Eigen::MatrixXd> J(jb.span().data(), k, k);
    Eigen::Map<const Eigen::MatrixXd> W(u.data() + ku, k, k);
    Eigen::Map<Eigen::MatrixXd> dW(du.data() + ku, k, k);
    dW.noalias() = -W * J;
    if (with_integral) {
      const std::size_t zoff = ku + ku * ku;
      std::array<double, 16> fbuf{};
      std::vector<double> fheap;
      double* f = fbuf.data();
      if (ku > fbuf.size()) {
        fheap.resize(ku);
        f = fheap.data();
      }
      forcing(system, y, t, x, {f, ku});
      Eigen::Map<Eigen::VectorXd> dz(du.data() + zoff, k);
      dz.noalias() = W * Eigen::Map<const Eigen::VectorXd>(f, k);
    }
  };
}

std::vector<double> identity_block(const Eigen::VectorXd& x, std::size_t extra) {
  const auto k = static_cast<std::size_t>(x.size());
  std::vector<double> u(k + k * k + extra, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    u[i] = x(static_cast<Eigen::Index>(i));
    u[k + i * (k + 1)] = 1.0;
  }
  return u;
}

Eigen::VectorXd base_state_at(const SystemSpec& system, double s, const Eigen::VectorXd& xi,
                              const IntegratorConfig& config) {
  if (s == 0.0) return xi;
  OdeProblem p;
  p.dimension = static_cast<std::size_t>(system.k());
  p.rhs = [&system](double t, std::span<const double> u, std::span<double> du) { system.psi1(t, u, du); };
  p.t_start = 0.0;
  p.t_end = s;
  p.initial_state.assign(xi.data(), xi.data() + xi.size());
  const auto traj = integrate(p, config);
  const auto end = traj.final_state();
  return Eigen::Map<const Eigen::VectorXd>(end.data(), system.k());
}

Eigen::VectorXd forced_from(const SystemSpec& system, const PeriodicPath& y, double s, double t,
                            const Eigen::VectorXd& xs, const IntegratorConfig& config) {
  const int k = system.k();
  if (t == s) return Eigen::VectorXd::Zero(k);
  OdeProblem p;
  p.dimension = static_cast<std::size_t>(2 * k);
  p.rhs = forced_variational_rhs(system, y);
  p.t_start = s;
  p.t_end = t;
  p.initial_state.assign(xs.data(), xs.data() + k);
  p.initial_state.resize(p.dimension, 0.0);
  const auto traj = integrate(p, config);
  return Eigen::Map<const Eigen::VectorXd>(traj.final_state().data() + k, k);
}

}  // namespace

PeriodicPath::PeriodicPath(double period, Eigen::VectorXd mean, Eigen::MatrixXd cos_coeffs, Eigen::MatrixXd sin_coeffs,
                           Eigen::MatrixXd norm_projector)
    : period_(period),
      mean_(std::move(mean)),
      cos_(std::move(cos_coeffs)),
      sin_(std::move(sin_coeffs)),
      projector_(std::move(norm_projector)) {
  if (!(period_ > 0.0) || !std::isfinite(period_)) throw InvalidArgument("averaging", "PeriodicPath", "period must be positive");
  const auto m = mean_.size();
  if (cos_.rows() != m || sin_.rows() != m || cos_.cols() != sin_.cols()) {
    throw InvalidArgument("averaging", "PeriodicPath", "coefficient shapes must be m x N");
  }
  if (projector_.size() > 0 && (projector_.rows() != m || projector_.cols() != m)) {
    throw InvalidArgument("averaging", "PeriodicPath", "norm projector must be m x m");
  }
  if (!mean_.allFinite() || !cos_.allFinite() || !sin_.allFinite()) {
    throw InvalidArgument("averaging", "PeriodicPath", "coefficients must be finite");
  }
  Eigen::VectorXd v(m);
  for (int i = 0; i < kNormGrid; ++i) {
    evaluate(period_ * i / kNormGrid, {v.data(), static_cast<std::size_t>(m)});
    grid_max_ = std::max(grid_max_, norm(v));
  }
}

PeriodicPath PeriodicPath::zero(double period, int m, int harmonics) {
  return {period, Eigen::VectorXd::Zero(m), Eigen::MatrixXd::Zero(m, harmonics), Eigen::MatrixXd::Zero(m, harmonics)};
}

PeriodicPath PeriodicPath::constant(double period, const Eigen::VectorXd& value, Eigen::MatrixXd norm_projector) {
  const auto m = value.size();
  return {period, value, Eigen::MatrixXd::Zero(m, 0), Eigen::MatrixXd::Zero(m, 0), std::move(norm_projector)};
}

void PeriodicPath::evaluate(double t, std::span<double> out) const {
  double r = std::fmod(t, period_);
  if (r < 0.0) r += period_;
  double q = std::nearbyint(r / period_ * kPhaseQuantum);
  if (q >= kPhaseQuantum) q = 0.0;
  const double theta = 2.0 * std::numbers::pi * (q / kPhaseQuantum);
  const auto m = mean_.size();
  for (Eigen::Index i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = mean_(i);
  for (Eigen::Index n = 0; n < cos_.cols(); ++n) {
    const double a = static_cast<double>(n + 1) * theta;
    const double c = std::cos(a), s = std::sin(a);
    for (Eigen::Index i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] += c * cos_(i, n) + s * sin_(i, n);
  }
}

Eigen::VectorXd PeriodicPath::operator()(double t) const {
  Eigen::VectorXd v(mean_.size());
  evaluate(t, {v.data(), static_cast<std::size_t>(v.size())});
  return v;
}

double PeriodicPath::norm(const Eigen::VectorXd& y) const {
  if (projector_.size() == 0) return y.norm();
  const Eigen::VectorXd p = projector_ * y;
  return std::max(p.norm(), (y - p).norm());
}

PeriodicPath PeriodicPath::scaled(double factor) const {
  return {period_, factor * mean_, factor * cos_, factor * sin_, projector_};
}

Eigen::VectorXd eta(const SystemSpec& system, const PeriodicPath& y, double t, double s, const Eigen::VectorXd& xi,
                    const IntegratorConfig& config) {
  check_inputs(system, y, xi, "eta");
  check_time(system, t, "eta");
  check_time(system, s, "eta");
  if (t == s) return Eigen::VectorXd::Zero(system.k());
  return forced_from(system, y, s, t, base_state_at(system, s, xi, config), config);
}

Eigen::VectorXd displacement(const SystemSpec& system, const PeriodicPath& y, double s, const Eigen::VectorXd& xi,
                             const IntegratorConfig& config) {
  check_inputs(system, y, xi, "displacement");
  check_time(system, s, "displacement");
  const Eigen::VectorXd xs = base_state_at(system, s, xi, config);
  return forced_from(system, y, s, system.period(), xs, config) - forced_from(system, y, s, 0.0, xs, config);
}

std::vector<Eigen::VectorXd> displacement_batch(const SystemSpec& system, const PeriodicPath& y,
                                                std::span<const double> s_values, const Eigen::VectorXd& xi,
                                                const IntegratorConfig& config) {
  check_inputs(system, y, xi, "displacement_batch");
  for (double s : s_values) check_time(system, s, "displacement_batch");
  const int k = system.k();
  const auto ku = static_cast<std::size_t>(k);
  OdeProblem p;
  p.dimension = ku + ku * ku + ku;
  p.rhs = fundamental_rhs(system, y);
  p.t_start = 0.0;
  p.t_end = system.period();
  p.initial_state = identity_block(xi, ku);
  const auto traj = integrate(p, config);

  const auto end = traj.final_state();
  const Eigen::MatrixXd XT = Eigen::Map<const Eigen::MatrixXd>(end.data() + ku, k, k);
  const Eigen::VectorXd zT = Eigen::Map<const Eigen::VectorXd>(end.data() + ku + ku * ku, k);
  const Eigen::MatrixXd XT_minus_I = XT - Eigen::MatrixXd::Identity(k, k);
  std::vector<Eigen::VectorXd> out;
  out.reserve(s_values.size());
  std::vector<double> u(p.dimension);
  for (double s : s_values) {
    traj.evaluate(s, u);
    const Eigen::Map<const Eigen::MatrixXd> Xs(u.data() + ku, k, k);
    const Eigen::Map<const Eigen::VectorXd> zs(u.data() + ku + ku * ku, k);
    out.push_back(zT - XT_minus_I * Xs.partialPivLu().solve(zs));
  }
  return out;
}

Eigen::VectorXd displacement_via_lemma2(const SystemSpec& system, const PeriodicPath& y, double s,
                                        const Eigen::VectorXd& xi, const IntegratorConfig& config) {
  check_inputs(system, y, xi, "displacement_via_lemma2");
  check_time(system, s, "displacement_via_lemma2");
  const int k = system.k();
  const auto ku = static_cast<std::size_t>(k);
  const double T = system.period();
  OdeProblem p;
  p.dimension = ku + ku * ku;
  p.rhs = adjoint_rhs(system, y, false);
  p.t_start = 0.0;
  p.t_end = T;
  p.initial_state = identity_block(xi, 0);
  const auto traj = integrate(p, config);
  const Eigen::MatrixXd XT =
      Eigen::Map<const Eigen::MatrixXd>(traj.final_state().data() + ku, k, k).partialPivLu().inverse();

  std::vector<double> u(p.dimension), f(ku);
  // X^-1(tau) f(tau) on [s - T, s] through the periodic extension.
  auto integrand = [&](double tau) -> Eigen::VectorXd {
    const bool shifted = tau < 0.0;
    const double r = shifted ? tau + T : tau;
    traj.evaluate(r, u);
    forcing(system, y, r, {u.data(), ku}, f);
    Eigen::VectorXd v =
        Eigen::Map<const Eigen::MatrixXd>(u.data() + ku, k, k) * Eigen::Map<const Eigen::VectorXd>(f.data(), k);
    return shifted ? Eigen::VectorXd(XT * v) : v;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < k; ++i) {
    auto component = [&](double tau) { return integrand(tau)(i); };
    if (s > 0.0) out(i) += GK::integrate(component, 0.0, s, 15, 1e-12);
    if (s < T) out(i) += GK::integrate(component, s - T, 0.0, 15, 1e-12);
  }
  return out;
}

Eigen::VectorXd averaged_map(const SystemSpec& system, const Eigen::VectorXd& xi, const IntegratorConfig& config) {
  if (xi.size() != system.k()) throw InvalidArgument("averaging", "averaged_map", "xi must have k entries");
  const int k = system.k();
  const auto ku = static_cast<std::size_t>(k);
  const PeriodicPath y0 = PeriodicPath::zero(system.period(), system.m(), 0);
  OdeProblem p;
  p.dimension = ku + ku * ku + ku;
  p.rhs = adjoint_rhs(system, y0, true);
  p.t_start = 0.0;
  p.t_end = system.period();
  p.initial_state = identity_block(xi, ku);
  const auto traj = integrate(p, config);
  return Eigen::Map<const Eigen::VectorXd>(traj.final_state().data() + ku + ku * ku, k);
}

}  // namespace perorbit
