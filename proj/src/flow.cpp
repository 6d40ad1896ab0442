#include "perorbit/flow.hpp"

#include <array>

#include "perorbit/error.hpp"

namespace perorbit {

namespace {

void check_xi(const SystemSpec& system, const Eigen::VectorXd& xi, const char* op) {
  if (xi.size() != system.k()) {
    throw InvalidArgument("flow_engine", op, "initial state must have k = " + std::to_string(system.k()) + " entries");
  }
}

}  // namespace

Trajectory flow_trajectory(const SystemSpec& system, double t, double t0, const Eigen::VectorXd& xi,
                           const IntegratorConfig& config) {
  check_xi(system, xi, "flow");
  OdeProblem p;
  p.dimension = static_cast<std::size_t>(system.k());
  p.rhs = [&system](double s, std::span<const double> u, std::span<double> du) { system.psi1(s, u, du); };
  p.t_start = t0;
  p.t_end = t;
  p.initial_state.assign(xi.data(), xi.data() + xi.size());
  return integrate(p, config);
}

Eigen::VectorXd flow(const SystemSpec& system, double t, double t0, const Eigen::VectorXd& xi,
                     const IntegratorConfig& config) {
  const auto traj = flow_trajectory(system, t, t0, xi, config);
  const auto end = traj.final_state();
  return Eigen::Map<const Eigen::VectorXd>(end.data(), static_cast<Eigen::Index>(end.size()));
}

Trajectory variational_trajectory(const SystemSpec& system, double t, double t0, const Eigen::VectorXd& xi,
                                  const IntegratorConfig& config) {
  check_xi(system, xi, "flow_with_variation");
  const int k = system.k();
  const auto ku = static_cast<std::size_t>(k);
  OdeProblem p;
  p.dimension = ku + ku * ku;
  p.rhs = [&system, k, ku](double s, std::span<const double> u, std::span<double> du) {
    const auto x = u.first(ku);
    system.psi1(s, x, du.first(ku));
    std::array<double, 64> jbuf;
    std::vector<double> jheap;
    double* jac = jbuf.data();
    if (ku * ku > jbuf.size()) {
      jheap.resize(ku * ku);
      jac = jheap.data();
    }
    system.psi1_jacobian(s, x, {jac, ku * ku});
    Eigen::Map<const Eigen::MatrixXd> J(jac, k, k);
    Eigen::Map<const Eigen::MatrixXd> Y(u.data() + ku, k, k);
    Eigen::Map<Eigen::MatrixXd> dY(du.data() + ku, k, k);
    dY.noalias() = J * Y;
  };
  p.t_start = t0;
  p.t_end = t;
  p.initial_state.assign(xi.data(), xi.data() + xi.size());
  p.initial_state.resize(p.dimension, 0.0);
  for (int i = 0; i < k; ++i) p.initial_state[ku + static_cast<std::size_t>(i) * (ku + 1)] = 1.0;
  return integrate(p, config);
}

FlowVariation unpack_variation(std::span<const double> augmented, int k) {
  FlowVariation out;
  out.state = Eigen::Map<const Eigen::VectorXd>(augmented.data(), k);
  out.variation = Eigen::Map<const Eigen::MatrixXd>(augmented.data() + k, k, k);
  return out;
}

FlowVariation flow_with_variation(const SystemSpec& system, double t, double t0, const Eigen::VectorXd& xi,
                                  const IntegratorConfig& config) {
  const auto traj = variational_trajectory(system, t, t0, xi, config);
  return unpack_variation(traj.final_state(), system.k());
}

}  // namespace perorbit
