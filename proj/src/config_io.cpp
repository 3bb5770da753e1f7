#include "tokalloc/config_io.hpp"

#include <fstream>
#include <optional>
#include <set>

#include "tokalloc/errors.hpp"

namespace tokalloc {

using nlohmann::json;

namespace {

std::string qualify(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double number(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(qualify(where, key), qualify(where, key) + " must be a number");
  return v.get<double>();
}

std::optional<double> optional_number(const json& j, const std::string& key,
                                      const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return number(j, key, where);
}

// Exactly one of <base>_w / <base>_dbm (or neither).
std::optional<double> power_field(const json& j, const std::string& w_key,
                                  const std::string& dbm_key, const std::string& where) {
  const bool has_w = j.contains(w_key);
  const bool has_dbm = j.contains(dbm_key);
  if (has_w && has_dbm)
    throw ConfigError(qualify(where, w_key), "give exactly one of " + qualify(where, w_key) +
                                                 " and " + qualify(where, dbm_key));
  if (has_w) return number(j, w_key, where);
  if (has_dbm) return dbm_to_watt(number(j, dbm_key, where));
  return std::nullopt;
}

void check(bool ok, const std::string& field, const std::string& constraint) {
  if (!ok) throw ConfigError(field, field + " must satisfy " + constraint);
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw ConfigError(qualify(where, key), "unknown field " + qualify(where, key));
}

const std::set<std::string> kSystemKeys = {
    "b_max_hz",   "p_max_w",     "p_max_dbm",      "n0_w_per_hz", "n0_dbm_per_hz",
    "lambda",     "bits_per_token", "b_text_hz",   "p_text_w",    "p_text_dbm",
    "tolerance",  "max_ao_iters"};

const std::set<std::string> kDeviceKeys = {"modality", "distance_km", "channel_gain", "fading",
                                           "max_tokens", "alpha", "beta", "gamma",
                                           "b_max_hz", "p_max_w", "p_max_dbm"};

}  // namespace

SystemConfig parse_system(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "expected a JSON object");
  SystemConfig cfg = default_config();
  if (auto v = optional_number(j, "b_max_hz", where)) cfg.total_bandwidth = *v;
  if (auto v = power_field(j, "p_max_w", "p_max_dbm", where)) cfg.total_power = *v;
  if (auto v = power_field(j, "n0_w_per_hz", "n0_dbm_per_hz", where)) cfg.noise_psd = *v;
  if (auto v = optional_number(j, "lambda", where)) cfg.lambda_weight = *v;
  if (auto v = optional_number(j, "bits_per_token", where)) cfg.bits_per_token = *v;
  if (auto v = optional_number(j, "b_text_hz", where)) cfg.text_bandwidth = *v;
  if (auto v = power_field(j, "p_text_w", "p_text_dbm", where)) cfg.text_power = *v;
  if (auto v = optional_number(j, "tolerance", where)) cfg.tolerance = *v;
  if (j.contains("max_ao_iters")) {
    const auto& v = j.at("max_ao_iters");
    if (!v.is_number_integer())
      throw ConfigError(qualify(where, "max_ao_iters"), qualify(where, "max_ao_iters") + " must be an integer");
    cfg.max_ao_iters = v.get<int>();
  }

  check(cfg.total_bandwidth > 0.0, qualify(where, "b_max_hz"), "> 0");
  check(cfg.total_power > 0.0, qualify(where, "p_max"), "> 0");
  check(cfg.noise_psd > 0.0, qualify(where, "n0"), "> 0");
  check(cfg.lambda_weight >= 0.0 && cfg.lambda_weight <= 1.0, qualify(where, "lambda"), "0 <= lambda <= 1");
  check(cfg.bits_per_token > 0.0, qualify(where, "bits_per_token"), "> 0");
  check(cfg.text_bandwidth >= 0.0, qualify(where, "b_text_hz"), ">= 0");
  check(cfg.text_power >= 0.0, qualify(where, "p_text"), ">= 0");
  check(cfg.tolerance > 0.0, qualify(where, "tolerance"), "> 0");
  check(cfg.max_ao_iters >= 1, qualify(where, "max_ao_iters"), ">= 1");
  return cfg;
}

DeviceState parse_device(const json& j, int id, const SystemConfig& cfg, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected a JSON object");
  reject_unknown(j, kDeviceKeys, where);
  DeviceState d;
  d.id = id;
  d.max_bandwidth = cfg.total_bandwidth;
  d.max_power = cfg.total_power;

  if (j.contains("modality")) {
    const auto& m = j.at("modality");
    const std::string name = m.is_string() ? m.get<std::string>() : "";
    if (name == "visual") {
      d.perf = kVisualPreset;
      d.max_tokens = 128;
    } else if (name == "audio") {
      d.perf = kAudioPreset;
      d.max_tokens = 64;
    } else {
      throw ConfigError(qualify(where, "modality"), qualify(where, "modality") + " must be \"visual\" or \"audio\"");
    }
  }

  const bool has_d = j.contains("distance_km");
  const bool has_g = j.contains("channel_gain");
  if (has_d == has_g)
    throw ConfigError(qualify(where, "distance_km"),
                      "give exactly one of " + qualify(where, "distance_km") + " and " + qualify(where, "channel_gain"));
  const auto fading = optional_number(j, "fading", where);
  if (fading) check(*fading > 0.0, qualify(where, "fading"), "> 0");
  if (has_d) {
    d.distance = number(j, "distance_km", where);
    check(d.distance > 0.0, qualify(where, "distance_km"), "> 0");
    d.channel_gain = channel_gain(d.distance, fading);
  } else {
    d.channel_gain = number(j, "channel_gain", where) * fading.value_or(1.0);
    check(d.channel_gain > 0.0, qualify(where, "channel_gain"), "> 0");
  }

  if (auto v = optional_number(j, "max_tokens", where)) d.max_tokens = *v;
  if (auto v = optional_number(j, "alpha", where)) d.perf.alpha = *v;
  if (auto v = optional_number(j, "beta", where)) d.perf.beta = *v;
  if (auto v = optional_number(j, "gamma", where)) d.perf.gamma = *v;
  if (auto v = optional_number(j, "b_max_hz", where)) d.max_bandwidth = *v;
  if (auto v = power_field(j, "p_max_w", "p_max_dbm", where)) d.max_power = *v;

  check(d.max_tokens > 0.0, qualify(where, "max_tokens"), "> 0");
  check(d.perf.alpha >= 0.0, qualify(where, "alpha"), ">= 0");
  check(d.perf.beta >= 0.0, qualify(where, "beta"), ">= 0");
  check(d.perf.gamma >= 0.0, qualify(where, "gamma"), ">= 0");
  check(d.max_bandwidth > 0.0, qualify(where, "b_max_hz"), "> 0");
  check(d.max_power > 0.0, qualify(where, "p_max"), "> 0");
  return d;
}

Problem parse_problem(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  auto known = kSystemKeys;
  known.insert("devices");
  reject_unknown(j, known, "");
  Problem p;
  p.cfg = parse_system(j);
  if (!j.contains("devices") || !j.at("devices").is_array() || j.at("devices").empty())
    throw ConfigError("devices", "devices must be a non-empty array");
  int id = 1;
  for (const auto& dj : j.at("devices")) {
    p.devices.push_back(parse_device(dj, id, p.cfg, "devices[" + std::to_string(id - 1) + "]"));
    ++id;
  }
  return p;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, "malformed JSON in " + path + ": " + e.what());
  }
}

json to_json(const Allocation& a) {
  return json{{"bandwidth_hz", a.bandwidth},
              {"power_w", a.power},
              {"tokens", a.tokens},
              {"aux_latency_s", a.aux_latency}};
}

json to_json(const CostBreakdown& c) {
  return json{{"total", c.total},
              {"latency_term", c.latency_term},
              {"perf_term", c.perf_term},
              {"per_device_latency_s", c.per_device_latency}};
}

json to_json(const PerfModel& m) {
  return json{{"alpha", m.alpha}, {"beta", m.beta}, {"gamma", m.gamma}};
}

json to_json(const FitResult& f) {
  return json{{"alpha", f.model.alpha},
              {"beta", f.model.beta},
              {"gamma", f.model.gamma},
              {"degenerate", f.degenerate},
              {"sse", f.sse}};
}

json solution_json(const std::string& method, const Allocation& a, const CostBreakdown& c,
                   const AOTrace* trace) {
  json out{{"method", method}, {"allocation", to_json(a)}, {"cost", to_json(c)}};
  if (trace) {
    out["converged"] = trace->converged;
    out["rounds"] = trace->rounds;
    out["start"] = trace->start;
  }
  return out;
}

}  // namespace tokalloc
