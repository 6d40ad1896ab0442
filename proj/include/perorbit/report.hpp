#pragma once

#include <string>

#include <json.hpp>

#include "perorbit/checker.hpp"
#include "perorbit/degree.hpp"
#include "perorbit/orbit.hpp"

namespace perorbit {

using Json = nlohmann::ordered_json;

/// Fixed key order; wall-clock data lives only under "timings".
Json to_json(const HypothesisReport& report);
Json to_json(const DegreeResult& result);
Json to_json(const PeriodicOrbit& orbit);
Json to_json(const SweepResult& sweep);

/// Copy of `doc` with every "timings" member removed (recursively).
Json strip_timings(const Json& doc);

/// Two-space indented dump terminated by a newline.
std::string dump(const Json& doc);

}  // namespace perorbit
