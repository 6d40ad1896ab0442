#include "perorbit/report.hpp"

#include <cmath>

namespace perorbit {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Json text_or_null(const std::string& s) { return s.empty() ? Json(nullptr) : Json(s); }

}  // namespace

Json to_json(const DegreeResult& r) {
  Json j;
  j["degree"] = r.degree;
  j["raw"] = number(r.raw);
  j["min_boundary_magnitude"] = number(r.min_boundary_magnitude);
  j["refinement_levels"] = r.refinement_levels;
  j["evaluations"] = r.evaluations;
  return j;
}

Json to_json(const HypothesisReport& r) {
  Json j;
  j["schema"] = 1;
  j["overall"] = to_string(r.overall);
  j["sampled_evidence_only"] = r.sampled_evidence_only;
  j["seed"] = r.seed;
  j["domain"] = r.domain;

  const auto& K = r.constants;
  Json c;
  c["fast_variable"] = K.fast_variable;
  c["c"] = number(K.c);
  c["delta"] = K.fast_variable ? number(K.delta) : Json(nullptr);
  c["spectral_margin"] = K.fast_variable ? number(K.spectral_margin) : Json(nullptr);
  c["sign_iterations"] = K.sign_iterations;
  c["gamma"] = K.growth ? number(K.growth->gamma) : Json(nullptr);
  c["M_growth"] = K.growth ? number(K.growth->M) : Json(nullptr);
  c["growth_probe_radius"] = K.growth ? number(K.growth->probe_radius) : Json(nullptr);
  c["growth_samples"] = K.growth ? Json(K.growth->samples) : Json(nullptr);
  c["growth_validation_violation_rate"] = K.growth ? number(K.growth->validation_violation_rate) : Json(nullptr);
  c["M_flow"] = number(K.flow.M_flow);
  c["M_flow_bounded"] = K.flow.bounded;
  c["M_flow_grid_points"] = K.flow.grid_points;
  c["r_y"] = K.r_y ? number(*K.r_y) : Json(nullptr);
  j["constants"] = c;

  Json a1;
  a1["verdict"] = to_string(r.a1.verdict);
  a1["residual"] = number(r.a1.residual);
  a1["tol"] = number(r.a1.tol);
  a1["worst_xi"] = vec(r.a1.worst_xi);
  a1["samples"] = r.a1.samples;
  a1["diagnostic"] = text_or_null(r.a1.diagnostic);
  j["A1"] = a1;

  Json a2;
  a2["verdict"] = to_string(r.a2.verdict);
  a2["min_displacement"] = number(r.a2.min_norm);
  a2["threshold"] = number(r.a2.threshold);
  a2["radius"] = number(r.a2.radius);
  a2["worst_s"] = number(r.a2.worst_s);
  a2["worst_xi"] = vec(r.a2.worst_xi);
  a2["worst_y_sample"] = r.a2.worst_y;
  a2["y_samples"] = r.a2.y_samples;
  a2["evaluations"] = r.a2.evaluations;
  a2["diagnostic"] = text_or_null(r.a2.diagnostic);
  j["A2"] = a2;

  Json a3;
  a3["verdict"] = to_string(r.a3.verdict);
  a3["degree"] = r.a3.degree ? to_json(*r.a3.degree) : Json(nullptr);
  a3["diagnostic"] = text_or_null(r.a3.diagnostic);
  j["A3"] = a3;

  j["diagnostics"] = r.diagnostics;

  Json t;
  t["constants_s"] = r.timings.constants;
  t["flow_bound_s"] = r.timings.flow_bound;
  t["growth_s"] = r.timings.growth;
  t["A1_s"] = r.timings.a1;
  t["A2_s"] = r.timings.a2;
  t["A3_s"] = r.timings.a3;
  t["total_s"] = r.timings.total;
  j["timings"] = t;
  return j;
}

Json to_json(const PeriodicOrbit& o) {
  Json j;
  j["epsilon"] = number(o.epsilon);
  j["u0"] = vec(o.u0);
  j["residual"] = number(o.residual);
  j["reverify_residual"] = number(o.reverify_residual);
  j["newton_iterations"] = o.iterations;
  j["seed"] = o.seed_source;
  j["seed_note"] = text_or_null(o.seed_note);
  j["z_samples"] = o.z_samples.size();
  j["z_diameter"] = number(o.z_diameter);
  j["in_domain"] = o.in_domain;
  j["y_sup"] = number(o.y_sup);
  j["r_y"] = number(o.r_y);
  j["y_within_bound"] = o.y_within_bound;
  return j;
}

Json to_json(const SweepResult& s) {
  Json j;
  Json entries = Json::array();
  for (const auto& e : s.entries) {
    Json x;
    x["epsilon"] = number(e.epsilon);
    x["orbit"] = e.orbit ? to_json(*e.orbit) : Json(nullptr);
    x["error"] = text_or_null(e.error);
    entries.push_back(x);
  }
  j["entries"] = entries;
  j["z_diameters_strictly_decreasing"] = s.diameters_strictly_decreasing;
  j["loglog_slope"] = number(s.slope);
  j["slope_band"] = Json::array({0.7, 1.3});
  j["slope_is_heuristic"] = s.slope_is_heuristic;
  return j;
}

Json strip_timings(const Json& doc) {
  if (doc.is_object()) {
    Json out = Json::object();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (it.key() == "timings") continue;
      out[it.key()] = strip_timings(it.value());
    }
    return out;
  }
  if (doc.is_array()) {
    Json out = Json::array();
    for (const auto& v : doc) out.push_back(strip_timings(v));
    return out;
  }
  return doc;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace perorbit
