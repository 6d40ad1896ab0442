#include "perorbit/system.hpp"

#include <array>
#include <cmath>

#include "perorbit/error.hpp"

namespace perorbit {

namespace {

constexpr int kPeriodicityGrid = 64;
constexpr double kPeriodicityTol = 1e-9;

// Small on-stack environment [t, x, y].
class Env {
 public:
  Env(int k, int m) : size_(static_cast<std::size_t>(1 + k + m)) {
    if (size_ > buf_.size()) heap_.resize(size_);
  }
  double* data() { return heap_.empty() ? buf_.data() : heap_.data(); }
  std::span<const double> view() { return {data(), size_}; }

 private:
  std::size_t size_;
  std::array<double, 24> buf_{};
  std::vector<double> heap_;
};

void fill_env(double* env, double t, std::span<const double> x, std::span<const double> y) {
  env[0] = t;
  for (std::size_t i = 0; i < x.size(); ++i) env[1 + i] = x[i];
  for (std::size_t i = 0; i < y.size(); ++i) env[1 + x.size() + i] = y[i];
}

}  // namespace

SystemSpec SystemSpec::build(const SystemDefinition& def) {
  if (def.k < 1) throw InvalidArgument("sysdsl", "SystemSpec", "k must be a positive integer");
  if (def.m < 0) throw InvalidArgument("sysdsl", "SystemSpec", "m must be non-negative");
  Signature sig{def.k, def.m, {}};
  std::vector<double> values;
  for (const auto& [name, value] : def.parameters) {
    if (name == "t" || name == "pi" || Signature{def.k, def.m, {}}.slot_of(name)) {
      throw InvalidArgument("sysdsl", "SystemSpec", "parameter name '" + name + "' shadows a built-in name");
    }
    sig.parameters.push_back(name);
    values.push_back(value);
  }
  auto parse_all = [&](const std::vector<std::string>& src, std::size_t expected, const char* what) {
    if (src.size() != expected) {
      throw InvalidArgument("sysdsl", "SystemSpec", std::string(what) + " needs " + std::to_string(expected) +
                                                         " components, got " + std::to_string(src.size()));
    }
    std::vector<Expr> out;
    for (const auto& s : src) out.push_back(parse(s, sig).bind_parameters(values));
    return out;
  };
  auto phi = parse_all(def.phi, static_cast<std::size_t>(def.k), "phi");
  auto psi1 = parse_all(def.psi1, static_cast<std::size_t>(def.k), "psi1");
  auto psi2 = parse_all(def.psi2, static_cast<std::size_t>(def.m), "psi2");
  Eigen::MatrixXd A = def.A;
  if (def.m == 0 && A.size() == 0) A.resize(0, 0);
  return SystemSpec(def.k, def.m, def.period, std::move(phi), std::move(psi1), std::move(psi2), std::move(A),
                    def.parameters);
}

SystemSpec::SystemSpec(int k, int m, double period, std::vector<Expr> phi, std::vector<Expr> psi1,
                       std::vector<Expr> psi2, Eigen::MatrixXd A,
                       std::vector<std::pair<std::string, double>> parameters)
    : k_(k),
      m_(m),
      period_(period),
      phi_(std::move(phi)),
      psi1_(std::move(psi1)),
      psi2_(std::move(psi2)),
      A_(std::move(A)),
      parameters_(std::move(parameters)) {
  validate();
}

void SystemSpec::validate() {
  auto bad = [](const std::string& msg) { throw InvalidArgument("sysdsl", "SystemSpec", msg); };
  if (k_ < 1) bad("k must be a positive integer");
  if (m_ < 0) bad("m must be non-negative");
  if (!(period_ > 0.0) || !std::isfinite(period_)) bad("period T must be a positive finite number");
  if (A_.rows() != m_ || A_.cols() != m_) bad("A must be square of size m");
  if (!A_.allFinite()) bad("A has non-finite entries");
  if (static_cast<int>(phi_.size()) != k_ || static_cast<int>(psi1_.size()) != k_ ||
      static_cast<int>(psi2_.size()) != m_) {
    bad("expression counts do not match (k, m)");
  }
  auto check_sig = [&](const std::vector<Expr>& v, const char* what, bool allow_y) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& s = v[i].signature();
      if (s.k != k_ || s.m != m_ || !s.parameters.empty()) {
        bad(std::string(what) + std::to_string(i + 1) + " has a signature that does not match (k, m)");
      }
      if (!allow_y) {
        for (int j = 0; j < m_; ++j) {
          if (v[i].depends_on(s.y_slot(j))) bad(std::string(what) + std::to_string(i + 1) + " must not depend on y");
        }
      }
    }
  };
  check_sig(phi_, "phi", true);
  check_sig(psi1_, "psi1", false);
  check_sig(psi2_, "psi2", true);
  for (std::size_t i = 0; i < psi1_.size(); ++i) {
    if (psi1_[i].has_nonsmooth_nodes()) {
      warnings_.push_back("psi1" + std::to_string(i + 1) +
                          " contains abs/norm/sqrt; continuous differentiability in x is not verified");
    }
  }

  // Sampled T-periodicity at a few fixed states.
  const std::size_t n = static_cast<std::size_t>(1 + k_ + m_);
  const std::array<double, 4> scales{0.0, 0.5, -0.8, 1.3};
  std::vector<double> env0(n), env1(n);
  auto check_periodic = [&](const std::vector<Expr>& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t s = 0; s < scales.size(); ++s) {
        for (std::size_t j = 1; j < n; ++j) env0[j] = scales[s] * (j % 2 ? 1.0 : -0.7) + 0.1 * static_cast<double>(s * j % 3);
        env1 = env0;
        for (int g = 0; g < kPeriodicityGrid; ++g) {
          env0[0] = period_ * g / kPeriodicityGrid;
          env1[0] = env0[0] + period_;
          double f0, f1;
          try {
            f0 = v[i].eval(env0);
            f1 = v[i].eval(env1);
          } catch (const DomainError&) {
            continue;
          }
          if (std::fabs(f1 - f0) > kPeriodicityTol * (1.0 + std::fabs(f0))) {
            bad(std::string(what) + std::to_string(i + 1) + " is not T-periodic in t (|f(t+T)-f(t)| = " +
                std::to_string(std::fabs(f1 - f0)) + " at t = " + std::to_string(env0[0]) + ")");
          }
        }
      }
    }
  };
  check_periodic(phi_, "phi");
  check_periodic(psi1_, "psi1");
  check_periodic(psi2_, "psi2");
}

void SystemSpec::psi1(double t, std::span<const double> x, std::span<double> out) const {
  Env env(k_, m_);
  fill_env(env.data(), t, x, {});
  for (int i = 0; i < m_; ++i) env.data()[1 + k_ + i] = 0.0;
  for (int i = 0; i < k_; ++i) out[static_cast<std::size_t>(i)] = psi1_[static_cast<std::size_t>(i)].eval(env.view());
}

bool SystemSpec::psi1_jacobian(double t, std::span<const double> x, std::span<double> out) const {
  Env env(k_, m_);
  fill_env(env.data(), t, x, {});
  for (int i = 0; i < m_; ++i) env.data()[1 + k_ + i] = 0.0;
  bool nonsmooth = false;
  for (int j = 0; j < k_; ++j) {
    for (int i = 0; i < k_; ++i) {
      out[static_cast<std::size_t>(i + j * k_)] =
          psi1_[static_cast<std::size_t>(i)].eval_dual(env.view(), 1 + j, nonsmooth).d;
    }
  }
  return nonsmooth;
}

void SystemSpec::phi(double t, std::span<const double> x, std::span<const double> y, std::span<double> out) const {
  Env env(k_, m_);
  fill_env(env.data(), t, x, y);
  for (int i = 0; i < k_; ++i) out[static_cast<std::size_t>(i)] = phi_[static_cast<std::size_t>(i)].eval(env.view());
}

void SystemSpec::psi2(double t, std::span<const double> x, std::span<const double> y, std::span<double> out) const {
  Env env(k_, m_);
  fill_env(env.data(), t, x, y);
  for (int i = 0; i < m_; ++i) out[static_cast<std::size_t>(i)] = psi2_[static_cast<std::size_t>(i)].eval(env.view());
}

void SystemSpec::full_rhs(double eps, double t, std::span<const double> u, std::span<double> out) const {
  Env env(k_, m_);
  fill_env(env.data(), t, u.first(static_cast<std::size_t>(k_)), u.subspan(static_cast<std::size_t>(k_)));
  for (int i = 0; i < k_; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    out[ui] = eps * phi_[ui].eval(env.view()) + psi1_[ui].eval(env.view());
  }
  for (int i = 0; i < m_; ++i) {
    double v = psi2_[static_cast<std::size_t>(i)].eval(env.view());
    for (int j = 0; j < m_; ++j) v -= A_(i, j) * u[static_cast<std::size_t>(k_ + j)];
    out[static_cast<std::size_t>(k_ + i)] = v;
  }
}

void SystemSpec::full_jacobian(double eps, double t, std::span<const double> u, std::span<double> out) const {
  const int n = k_ + m_;
  Env env(k_, m_);
  fill_env(env.data(), t, u.first(static_cast<std::size_t>(k_)), u.subspan(static_cast<std::size_t>(k_)));
  bool nonsmooth = false;
  for (int j = 0; j < n; ++j) {
    const int slot = 1 + j;
    for (int i = 0; i < k_; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      double d = eps * phi_[ui].eval_dual(env.view(), slot, nonsmooth).d;
      if (j < k_) d += psi1_[ui].eval_dual(env.view(), slot, nonsmooth).d;
      out[static_cast<std::size_t>(i + j * n)] = d;
    }
    for (int i = 0; i < m_; ++i) {
      double d = psi2_[static_cast<std::size_t>(i)].eval_dual(env.view(), slot, nonsmooth).d;
      if (j >= k_) d -= A_(i, j - k_);
      out[static_cast<std::size_t>(k_ + i + j * n)] = d;
    }
  }
}

SystemSpec SystemSpec::with_phi(std::vector<Expr> phi) const {
  return SystemSpec(k_, m_, period_, std::move(phi), psi1_, psi2_, A_, parameters_);
}

}  // namespace perorbit
