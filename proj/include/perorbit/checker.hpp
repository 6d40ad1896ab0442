#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perorbit/degree.hpp"
#include "perorbit/dichotomy.hpp"
#include "perorbit/domain.hpp"
#include "perorbit/ode.hpp"
#include "perorbit/system.hpp"

namespace perorbit {

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict v);

struct A1Result {
  Verdict verdict = Verdict::Inconclusive;
  double residual = 0.0;
  Eigen::VectorXd worst_xi;
  std::size_t samples = 0;
  double tol = 0.0;
  std::string diagnostic;
};

struct A2Plan {
  int n_s = 8;
  int n_xi = 32;
  int n_y = 64;
  int harmonics = 3;
  std::uint64_t seed = 0;
};

struct A2Result {
  Verdict verdict = Verdict::Inconclusive;
  double min_norm = 0.0;
  double threshold = 0.0;
  double radius = 0.0;
  double worst_s = 0.0;
  Eigen::VectorXd worst_xi;
  int worst_y = -1;
  std::size_t y_samples = 0;
  std::size_t evaluations = 0;
  std::string diagnostic;
};

struct A3Result {
  Verdict verdict = Verdict::Inconclusive;
  std::optional<DegreeResult> degree;
  std::string diagnostic;
};

struct FlowBound {
  double M_flow = 0.0;  // inflated
  double raw = 0.0;
  bool bounded = true;
  std::size_t grid_points = 0;
};

struct ConstantsBlock {
  bool fast_variable = false;
  double c = 1.0;
  double delta = 0.0;
  double spectral_margin = 0.0;
  int sign_iterations = 0;
  std::optional<GrowthBounds> growth;
  FlowBound flow;
  std::optional<double> r_y;
};

struct Timings {
  double constants = 0.0;
  double flow_bound = 0.0;
  double growth = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double total = 0.0;
};

struct HypothesisReport {
  Verdict overall = Verdict::Inconclusive;
  A1Result a1;
  A2Result a2;
  A3Result a3;
  ConstantsBlock constants;
  bool sampled_evidence_only = true;
  std::uint64_t seed = 0;
  std::string domain;
  std::vector<std::string> diagnostics;
  Timings timings;
};

struct CertifyConfig {
  std::size_t a1_samples = 64;
  double a1_tol = 1e-7;
  A2Plan a2;
  double a2_threshold_factor = 1e-4;
  int flow_grid = 33;
  double flow_inflation = 0.02;
  std::size_t growth_samples = 1000;
  double growth_inflation = 0.05;
  double growth_probe = 1.0;
  std::size_t degree_samples = 64;
  IntegratorConfig integrator;
  /// Boundary flows of A1 are often unstable transversally; they get a tighter tolerance.
  IntegratorConfig a1_integrator{1e-13, 1e-15};
  IntegratorConfig a2_integrator{1e-9, 1e-11};
};

A1Result check_A1(const SystemSpec& system, const DomainSpec& domain, std::size_t n_samples, double tol,
                  const IntegratorConfig& config = {});

/// Minimum displacement norm over s in a uniform grid on [0, T], xi on the
/// boundary and y in {0, ±radius constants, scaled random Fourier paths}.
/// `split` supplies the dichotomy norm (nullptr: Euclidean).
A2Result check_A2(const SystemSpec& system, const DomainSpec& domain, double radius, const A2Plan& plan,
                  const SpectralSplit* split = nullptr, double threshold_factor = 1e-4,
                  const IntegratorConfig& config = {1e-9, 1e-11});

A3Result check_A3(const SystemSpec& system, const DomainSpec& domain, std::size_t boundary_samples = 64,
                  const IntegratorConfig& config = {});

/// sup |Omega(t, 0, xi)| over t in [0, T] and a grid over the closed domain
/// (33 x 33 polar grid for planar balls), inflated by `inflation`.
FlowBound flow_bound(const SystemSpec& system, const DomainSpec& domain, int grid, double inflation,
                     const IntegratorConfig& config = {});

HypothesisReport certify(const SystemSpec& system, const DomainSpec& domain, const CertifyConfig& config,
                         std::uint64_t seed);

}  // namespace perorbit
