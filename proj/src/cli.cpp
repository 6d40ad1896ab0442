#include "perorbit/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "perorbit/averaging.hpp"
#include "perorbit/degree.hpp"
#include "perorbit/error.hpp"
#include "perorbit/scenarios.hpp"

namespace perorbit {

namespace {

const std::vector<std::string> kCommands{"certify", "solve", "sweep", "degree", "scenario-list", "parse-check"};

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw InvalidArgument("cli", "config", "field '" + field + "' " + what);
}

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) config_error(path.empty() ? it.key() : path + "." + it.key(), "is not recognized");
  }
}

const Json& object_at(const Json& obj, const char* key, const std::string& path) {
  const Json& v = obj.at(key);
  if (!v.is_object()) config_error(path, "must be an object");
  return v;
}

double number_at(const Json& v, const std::string& path) {
  if (!v.is_number()) config_error(path, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) config_error(path, "must be finite");
  return d;
}

double positive_at(const Json& v, const std::string& path) {
  const double d = number_at(v, path);
  if (!(d > 0.0)) config_error(path, "must be positive");
  return d;
}

int count_at(const Json& v, const std::string& path, int minimum) {
  if (!v.is_number_integer()) config_error(path, "must be an integer");
  const auto i = v.get<long long>();
  if (i < minimum || i > 1000000) config_error(path, "must be an integer >= " + std::to_string(minimum));
  return static_cast<int>(i);
}

std::string string_at(const Json& v, const std::string& path) {
  if (!v.is_string()) config_error(path, "must be a string");
  return v.get<std::string>();
}

Eigen::VectorXd vector_at(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) config_error(path, "must be a nonempty array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = number_at(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

std::vector<std::string> strings_at(const Json& v, const std::string& path) {
  if (!v.is_array()) config_error(path, "must be an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(string_at(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

SystemDefinition inline_system(const Json& s) {
  check_keys(s, "system.inline", {"k", "m", "period", "phi", "psi1", "psi2", "A", "parameters"});
  SystemDefinition def;
  for (const char* key : {"k", "period", "phi", "psi1"}) {
    if (!s.contains(key)) config_error(std::string("system.inline.") + key, "is required");
  }
  def.k = count_at(s["k"], "system.inline.k", 1);
  def.m = s.contains("m") ? count_at(s["m"], "system.inline.m", 0) : 0;
  def.period = positive_at(s["period"], "system.inline.period");
  def.phi = strings_at(s["phi"], "system.inline.phi");
  def.psi1 = strings_at(s["psi1"], "system.inline.psi1");
  if (s.contains("psi2")) def.psi2 = strings_at(s["psi2"], "system.inline.psi2");
  def.A = Eigen::MatrixXd::Zero(def.m, def.m);
  if (s.contains("A")) {
    const Json& A = s["A"];
    if (!A.is_array() || static_cast<int>(A.size()) != def.m) config_error("system.inline.A", "must be an m x m array");
    for (int i = 0; i < def.m; ++i) {
      const auto row = vector_at(A[static_cast<std::size_t>(i)], "system.inline.A[" + std::to_string(i) + "]");
      if (row.size() != def.m) config_error("system.inline.A", "must be an m x m array");
      def.A.row(i) = row.transpose();
    }
  } else if (def.m > 0) {
    config_error("system.inline.A", "is required when m > 0");
  }
  if (s.contains("parameters")) {
    const Json& p = s["parameters"];
    if (!p.is_object()) config_error("system.inline.parameters", "must be an object");
    for (auto it = p.begin(); it != p.end(); ++it) {
      def.parameters.emplace_back(it.key(), number_at(it.value(), "system.inline.parameters." + it.key()));
    }
  }
  return def;
}

DomainConfig domain_config(const Json& d) {
  if (d.size() != 1) config_error("domain", "must contain exactly one of 'ball' or 'level_set'");
  DomainConfig out;
  if (d.contains("ball")) {
    const Json& b = object_at(d, "ball", "domain.ball");
    check_keys(b, "domain.ball", {"center", "radius"});
    if (!b.contains("center") || !b.contains("radius")) config_error("domain.ball", "needs 'center' and 'radius'");
    out.kind = "ball";
    out.center = vector_at(b["center"], "domain.ball.center");
    out.radius = positive_at(b["radius"], "domain.ball.radius");
  } else if (d.contains("level_set")) {
    const Json& l = object_at(d, "level_set", "domain.level_set");
    check_keys(l, "domain.level_set", {"h", "box_lo", "box_hi"});
    if (!l.contains("h") || !l.contains("box_lo") || !l.contains("box_hi")) {
      config_error("domain.level_set", "needs 'h', 'box_lo' and 'box_hi'");
    }
    out.kind = "level_set";
    out.h = string_at(l["h"], "domain.level_set.h");
    out.box_lo = vector_at(l["box_lo"], "domain.level_set.box_lo");
    out.box_hi = vector_at(l["box_hi"], "domain.level_set.box_hi");
  } else {
    config_error("domain", "must contain exactly one of 'ball' or 'level_set'");
  }
  return out;
}

DomainSpec make_domain(const DomainConfig& d) {
  if (d.kind == "ball") return DomainSpec::ball(d.center, d.radius);
  const int k = static_cast<int>(d.box_lo.size());
  return DomainSpec::level_set(parse(d.h, Signature{k, 0, {}}), d.box_lo, d.box_hi);
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cli", "run", "cannot write " + path.string());
  f << content;
}

struct Problem {
  SystemSpec system;
  DomainSpec domain;
  std::string label;
};

Problem load_problem(const RunConfig& cfg) {
  if (cfg.scenario) {
    Scenario s = build_scenario(*cfg.scenario, cfg.scenario_params);
    DomainSpec domain = cfg.domain ? make_domain(*cfg.domain) : s.domain;
    return {std::move(s.system), std::move(domain), *cfg.scenario};
  }
  if (!cfg.inline_system) throw InvalidArgument("cli", "config", "field 'system' is required for this command");
  if (!cfg.domain) throw InvalidArgument("cli", "config", "field 'domain' is required for inline systems");
  return {SystemSpec::build(*cfg.inline_system), make_domain(*cfg.domain), "inline"};
}

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return kExitOk;
    case Verdict::Fail:
      return kExitFail;
    case Verdict::Inconclusive:
      return kExitInconclusive;
  }
  return kExitInconclusive;
}

Json manifest(const RunConfig& cfg) {
  Json m;
  m["tool"] = "perorbit";
  m["version"] = kToolVersion;
  m["command"] = cfg.command;
  m["config_sha256"] = sha256_hex(cfg.config_text);
  m["seed"] = cfg.seed;
  return m;
}

int cmd_certify(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& out) {
  const Problem p = load_problem(cfg);
  const auto report = certify(p.system, p.domain, cfg.certify, cfg.seed);
  write_file(dir / "report.json", dump(to_json(report)));
  out << "certify " << p.label << ": overall=" << to_string(report.overall) << " A1=" << to_string(report.a1.verdict)
      << " A2=" << to_string(report.a2.verdict) << " A3=" << to_string(report.a3.verdict) << "\n";
  for (const auto& d : report.diagnostics) out << "  " << d << "\n";
  return verdict_exit(report.overall);
}

Json context_json(const SolveContext& ctx) {
  Json j;
  Json xi = Json::array();
  for (Eigen::Index i = 0; i < ctx.xi_star.size(); ++i) xi.push_back(ctx.xi_star(i));
  j["xi_star"] = xi;
  j["c"] = ctx.constants.c;
  j["delta"] = ctx.split ? Json(ctx.constants.delta) : Json(nullptr);
  j["gamma"] = ctx.gamma;
  j["r_y"] = std::isfinite(ctx.r_y) ? Json(ctx.r_y) : Json(nullptr);
  return j;
}

int cmd_solve(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& out) {
  if (!cfg.epsilon) throw InvalidArgument("cli", "config", "field 'epsilon' is required for solve");
  const Problem p = load_problem(cfg);
  const auto ctx = prepare_solve(p.system, p.domain, cfg.solve);
  const auto orbit = solve_orbit(p.system, p.domain, *cfg.epsilon, ctx, cfg.solve);
  std::ostringstream csv;
  orbit.write_csv(csv, p.system.k(), p.system.m());
  write_file(dir / "orbit.csv", csv.str());
  Json j;
  j["schema"] = 1;
  j["command"] = "solve";
  j["system"] = p.label;
  j["context"] = context_json(ctx);
  j["orbit"] = to_json(orbit);
  write_file(dir / "report.json", dump(j));
  const bool ok = orbit.in_domain && orbit.y_within_bound;
  out << "solve " << p.label << ": eps=" << orbit.epsilon << " residual=" << orbit.residual
      << " z_diameter=" << orbit.z_diameter << " in_domain=" << (orbit.in_domain ? "true" : "false")
      << " y_sup=" << orbit.y_sup << "\n";
  return ok ? kExitOk : kExitFail;
}

int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& out) {
  if (cfg.eps_list.empty()) throw InvalidArgument("cli", "config", "field 'eps_list' is required for sweep");
  const Problem p = load_problem(cfg);
  const auto sweep = continue_in_eps(p.system, p.domain, cfg.eps_list, cfg.solve);
  std::ostringstream csv;
  write_sweep_csv(csv, sweep);
  write_file(dir / "sweep.csv", csv.str());
  for (std::size_t i = 0; i < sweep.entries.size(); ++i) {
    if (!sweep.entries[i].orbit) continue;
    std::ostringstream o;
    sweep.entries[i].orbit->write_csv(o, p.system.k(), p.system.m());
    write_file(dir / ("orbit_" + std::to_string(i) + ".csv"), o.str());
  }
  Json j;
  j["schema"] = 1;
  j["command"] = "sweep";
  j["system"] = p.label;
  j["sweep"] = to_json(sweep);
  write_file(dir / "report.json", dump(j));
  bool all = true;
  for (const auto& e : sweep.entries) {
    all = all && e.orbit.has_value();
    out << "eps=" << e.epsilon;
    if (e.orbit) out << " z_diameter=" << e.orbit->z_diameter << " residual=" << e.orbit->residual << "\n";
    else out << " error: " << e.error << "\n";
  }
  out << "log-log slope (heuristic): " << sweep.slope << "\n";
  return all ? kExitOk : kExitInconclusive;
}

int cmd_degree(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& out) {
  VectorMap F;
  DomainSpec domain = DomainSpec::ball(Eigen::Vector2d::Zero(), 1.0);
  std::optional<Problem> problem;
  std::vector<Expr> exprs;
  std::string label;
  if (cfg.degree_fixture) {
    label = *cfg.degree_fixture;
    if (label == "z2") {
      F = [](const Eigen::VectorXd& x) { return Eigen::Vector2d(x(0) * x(0) - x(1) * x(1), 2.0 * x(0) * x(1)).eval(); };
    } else if (label == "identity") {
      F = [](const Eigen::VectorXd& x) { return x; };
    } else {
      F = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Unit(x.size(), 0).eval(); };
    }
    if (cfg.domain) domain = make_domain(*cfg.domain);
  } else if (!cfg.degree_map.empty()) {
    const int k = static_cast<int>(cfg.degree_map.size());
    for (const auto& s : cfg.degree_map) exprs.push_back(parse(s, Signature{k, 0, {}}));
    label = "expressions";
    F = [&exprs, k](const Eigen::VectorXd& x) {
      std::vector<double> env(static_cast<std::size_t>(k + 1), 0.0);
      for (int i = 0; i < k; ++i) env[static_cast<std::size_t>(i + 1)] = x(i);
      Eigen::VectorXd v(k);
      for (int i = 0; i < k; ++i) v(i) = exprs[static_cast<std::size_t>(i)].eval(env);
      return v;
    };
    if (cfg.domain) domain = make_domain(*cfg.domain);
    else if (k == 3) domain = DomainSpec::ball(Eigen::Vector3d::Zero(), 1.0);
  } else {
    problem = load_problem(cfg);
    domain = problem->domain;
    label = "averaged map of " + problem->label;
    const SystemSpec* sys = &problem->system;
    const IntegratorConfig ic = cfg.certify.integrator;
    F = [sys, ic](const Eigen::VectorXd& xi) { return averaged_map(*sys, xi, ic); };
  }
  const auto result = brouwer_degree(F, domain);
  Json j;
  j["schema"] = 1;
  j["command"] = "degree";
  j["map"] = label;
  j["domain"] = domain.describe();
  j["result"] = to_json(result);
  write_file(dir / "report.json", dump(j));
  out << result.degree << "\n";
  return kExitOk;
}

int cmd_parse_check(const RunConfig& cfg, std::ostream& out) {
  const Problem p = load_problem(cfg);
  const auto& s = p.system;
  out << "ok: k=" << s.k() << " m=" << s.m() << " T=" << std::setprecision(17) << s.period() << "\n";
  for (std::size_t i = 0; i < s.phi().size(); ++i) out << "phi" << i + 1 << " = " << print(s.phi()[i]) << "\n";
  for (std::size_t i = 0; i < s.psi1().size(); ++i) out << "psi1_" << i + 1 << " = " << print(s.psi1()[i]) << "\n";
  for (std::size_t i = 0; i < s.psi2().size(); ++i) out << "psi2_" << i + 1 << " = " << print(s.psi2()[i]) << "\n";
  out << "domain: " << p.domain.describe() << "\n";
  for (const auto& w : s.warnings()) out << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_scenario_list(std::ostream& out) {
  for (const auto& s : scenario_catalog()) {
    out << s.name << ": " << s.description;
    const char* sep = " [";
    for (const auto& [k, v] : s.default_parameters) {
      out << sep << k << "=" << v;
      sep = ", ";
    }
    out << (s.default_parameters.empty() ? "" : "]") << "\n";
  }
  return kExitOk;
}

}  // namespace

RunConfig parse_config(const Json& doc, const std::string& command) {
  RunConfig cfg;
  cfg.command = command;
  if (!doc.is_object()) throw InvalidArgument("cli", "config", "config must be a JSON object");
  check_keys(doc, "", {"schema", "system", "domain", "tolerances", "samples", "epsilon", "eps_list", "seed", "degree"});
  if (!doc.contains("schema") || !doc["schema"].is_number_integer() || doc["schema"].get<int>() != 1) {
    config_error("schema", "must be 1");
  }
  if (doc.contains("system")) {
    const Json& s = object_at(doc, "system", "system");
    check_keys(s, "system", {"scenario", "params", "inline"});
    if (s.contains("scenario") == s.contains("inline")) {
      config_error("system", "must contain exactly one of 'scenario' or 'inline'");
    }
    if (s.contains("scenario")) {
      cfg.scenario = string_at(s["scenario"], "system.scenario");
      if (s.contains("params")) {
        const Json& p = object_at(s, "params", "system.params");
        for (auto it = p.begin(); it != p.end(); ++it) {
          cfg.scenario_params[it.key()] = number_at(it.value(), "system.params." + it.key());
        }
      }
    } else {
      if (s.contains("params")) config_error("system.params", "is only valid with 'scenario'");
      cfg.inline_system = inline_system(object_at(s, "inline", "system.inline"));
    }
  }
  if (doc.contains("domain")) cfg.domain = domain_config(object_at(doc, "domain", "domain"));
  if (doc.contains("tolerances")) {
    const Json& t = object_at(doc, "tolerances", "tolerances");
    check_keys(t, "tolerances", {"rtol", "atol", "a1_tol", "newton_tol", "picard_tol", "averaged_tol"});
    if (t.contains("rtol")) cfg.certify.integrator.rtol = positive_at(t["rtol"], "tolerances.rtol");
    if (t.contains("atol")) cfg.certify.integrator.atol = positive_at(t["atol"], "tolerances.atol");
    if (t.contains("a1_tol")) cfg.certify.a1_tol = positive_at(t["a1_tol"], "tolerances.a1_tol");
    if (t.contains("newton_tol")) cfg.solve.shoot.tol = positive_at(t["newton_tol"], "tolerances.newton_tol");
    if (t.contains("picard_tol")) cfg.solve.fast.tol = positive_at(t["picard_tol"], "tolerances.picard_tol");
    if (t.contains("averaged_tol")) cfg.solve.averaged.tol = positive_at(t["averaged_tol"], "tolerances.averaged_tol");
  }
  if (doc.contains("samples")) {
    const Json& s = object_at(doc, "samples", "samples");
    check_keys(s, "samples", {"a1", "a2", "growth", "flow_grid", "degree"});
    if (s.contains("a1")) cfg.certify.a1_samples = static_cast<std::size_t>(count_at(s["a1"], "samples.a1", 32));
    if (s.contains("a2")) {
      const Json& a = object_at(s, "a2", "samples.a2");
      check_keys(a, "samples.a2", {"n_s", "n_xi", "n_y", "harmonics"});
      if (a.contains("n_s")) cfg.certify.a2.n_s = count_at(a["n_s"], "samples.a2.n_s", 8);
      if (a.contains("n_xi")) cfg.certify.a2.n_xi = count_at(a["n_xi"], "samples.a2.n_xi", 32);
      if (a.contains("n_y")) cfg.certify.a2.n_y = count_at(a["n_y"], "samples.a2.n_y", 64);
      if (a.contains("harmonics")) cfg.certify.a2.harmonics = count_at(a["harmonics"], "samples.a2.harmonics", 3);
    }
    if (s.contains("growth")) {
      cfg.certify.growth_samples = static_cast<std::size_t>(count_at(s["growth"], "samples.growth", 100));
      cfg.solve.growth_samples = cfg.certify.growth_samples;
    }
    if (s.contains("flow_grid")) {
      cfg.certify.flow_grid = count_at(s["flow_grid"], "samples.flow_grid", 2);
      cfg.solve.flow_grid = cfg.certify.flow_grid;
    }
    if (s.contains("degree")) cfg.certify.degree_samples = static_cast<std::size_t>(count_at(s["degree"], "samples.degree", 16));
  }
  if (doc.contains("epsilon")) cfg.epsilon = positive_at(doc["epsilon"], "epsilon");
  if (doc.contains("eps_list")) {
    const Eigen::VectorXd e = vector_at(doc["eps_list"], "eps_list");
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      if (!(e(i) > 0.0)) config_error("eps_list[" + std::to_string(i) + "]", "must be positive");
      if (i > 0 && !(e(i) < e(i - 1))) config_error("eps_list", "must be strictly decreasing");
      cfg.eps_list.push_back(e(i));
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) config_error("seed", "must be a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("degree")) {
    const Json& d = object_at(doc, "degree", "degree");
    check_keys(d, "degree", {"map"});
    if (!d.contains("map")) config_error("degree.map", "is required");
    if (d["map"].is_string()) {
      const auto name = d["map"].get<std::string>();
      if (name != "z2" && name != "identity" && name != "constant") {
        config_error("degree.map", "must be one of z2, identity, constant or an array of expressions");
      }
      cfg.degree_fixture = name;
    } else {
      cfg.degree_map = strings_at(d["map"], "degree.map");
      if (cfg.degree_map.size() != 2 && cfg.degree_map.size() != 3) config_error("degree.map", "must have 2 or 3 components");
    }
  }
  const bool needs_system = command == "certify" || command == "solve" || command == "sweep" || command == "parse-check" ||
                            (command == "degree" && !cfg.degree_fixture && cfg.degree_map.empty());
  if (needs_system && !cfg.scenario && !cfg.inline_system) config_error("system", "is required for " + command);
  if (command == "solve" && !cfg.epsilon) config_error("epsilon", "is required for solve");
  if (command == "sweep" && cfg.eps_list.empty()) config_error("eps_list", "is required for sweep");
  return cfg;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.command == "scenario-list") return cmd_scenario_list(out);
    if (config.command == "parse-check") return cmd_parse_check(config, out);
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "manifest.json", dump(manifest(config)));
    if (config.command == "certify") return cmd_certify(config, dir, out);
    if (config.command == "solve") return cmd_solve(config, dir, out);
    if (config.command == "sweep") return cmd_sweep(config, dir, out);
    if (config.command == "degree") return cmd_degree(config, dir, out);
    err << "cli/run: unknown command '" << config.command << "'\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownIdentifier& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInconclusive;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "cli/run: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Periodic orbits of singularly perturbed periodic systems"};
  std::string command, config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "certify | solve | sweep | degree | scenario-list | parse-check")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("--config", config_path, "JSON run configuration (schema 1)");
  app.add_option("--seed", seed, "seed overriding the config value");
  app.add_option("--out", out_dir, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "cli/parse: " << e.what() << "\n";
    return kExitUsage;
  }
  if (command == "scenario-list" && config_path.empty()) {
    RunConfig cfg;
    cfg.command = command;
    return run(cfg, out, err);
  }
  if (config_path.empty()) {
    err << "cli/parse: --config is required for " << command << "\n";
    return kExitUsage;
  }
  std::ifstream f(config_path, std::ios::binary);
  if (!f) {
    err << "cli/config: cannot read " << config_path << "\n";
    return kExitUsage;
  }
  std::stringstream buf;
  buf << f.rdbuf();
  RunConfig cfg;
  try {
    const Json doc = Json::parse(buf.str());
    cfg = parse_config(doc, command);
  } catch (const Json::parse_error& e) {
    err << "cli/config: invalid JSON: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
  cfg.config_text = buf.str();
  if (seed) cfg.seed = *seed;
  cfg.out_dir = out_dir;
  return run(cfg, out, err);
}

}  // namespace perorbit
