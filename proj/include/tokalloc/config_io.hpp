#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tokalloc/ao_solver.hpp"
#include "tokalloc/perf_model.hpp"
#include "tokalloc/system_model.hpp"

namespace tokalloc {

struct Problem {
  SystemConfig cfg;
  std::vector<DeviceState> devices;
};

/// System keys (all optional, defaults from default_config()):
///   b_max_hz, p_max_w | p_max_dbm, n0_w_per_hz | n0_dbm_per_hz, lambda,
///   bits_per_token, b_text_hz, p_text_w | p_text_dbm, tolerance, max_ao_iters.
/// Unknown keys are rejected. Throws ConfigError naming the field.
SystemConfig parse_system(const nlohmann::json& j, const std::string& where = "");

/// Device keys: modality ("visual" | "audio", fills the perf model and
/// max_tokens), distance_km | channel_gain, fading, max_tokens, alpha, beta,
/// gamma, b_max_hz, p_max_w | p_max_dbm. Caps default to the system budgets.
DeviceState parse_device(const nlohmann::json& j, int id, const SystemConfig& cfg,
                         const std::string& where);

/// A system object with a "devices" array.
Problem parse_problem(const nlohmann::json& j);

/// Reads and parses a JSON file; a missing or malformed file is a
/// ConfigError on the path.
nlohmann::json read_json_file(const std::string& path);

nlohmann::json to_json(const Allocation& a);
nlohmann::json to_json(const CostBreakdown& c);
nlohmann::json to_json(const PerfModel& m);
nlohmann::json to_json(const FitResult& f);

/// {method, allocation, cost[, converged, rounds, start]}.
nlohmann::json solution_json(const std::string& method, const Allocation& a,
                             const CostBreakdown& c, const AOTrace* trace = nullptr);

}  // namespace tokalloc
