#include "tokalloc/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "tokalloc/ao_solver.hpp"
#include "tokalloc/config_io.hpp"
#include "tokalloc/errors.hpp"

namespace tokalloc {

using nlohmann::json;

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::bandwidth: return "bandwidth";
    case SweepParameter::power: return "power";
    case SweepParameter::lambda: return "lambda";
  }
  return "?";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::pbwf: return "pbwf";
    case Method::era: return "era";
    case Method::oracle: return "oracle";
  }
  return "?";
}

std::vector<DevicePreset> default_presets() {
  return {DevicePreset{kVisualPreset, 128.0, {}, {}}, DevicePreset{kAudioPreset, 64.0, {}, {}}};
}

void Scenario::validate() const {
  auto fail = [](const std::string& field, const std::string& c) {
    throw ConfigError(field, field + " must satisfy " + c);
  };
  if (num_devices < 1) fail("num_devices", ">= 1");
  if (!(distance_min > 0.0) || !(distance_max >= distance_min))
    fail("distance_range", "0 < low <= high");
  if (device_presets.empty()) fail("device_presets", "non-empty");
  if (trials < 1) fail("trials", ">= 1");
  if (methods.empty()) fail("methods", "non-empty");
  if (sweep_values.empty()) fail("sweep.values", "non-empty");
  for (double v : sweep_values) {
    if (!std::isfinite(v)) fail("sweep.values", "finite");
    if (sweep_parameter == SweepParameter::bandwidth && !(v > 0.0)) fail("sweep.values", "> 0 Hz");
    if (sweep_parameter == SweepParameter::lambda && !(v >= 0.0 && v <= 1.0))
      fail("sweep.values", "0 <= lambda <= 1");
  }
  for (const auto& p : device_presets) {
    if (!(p.max_tokens > 0.0)) fail("device_presets.max_tokens", "> 0");
    if (p.perf.alpha < 0.0 || p.perf.beta < 0.0 || p.perf.gamma < 0.0)
      fail("device_presets", "alpha, beta, gamma >= 0");
  }
}

namespace {

const std::set<std::string> kScenarioKeys = {"num_devices", "distance_range", "seed",
                                             "device_presets", "sweep", "trials", "methods",
                                             "system", "fading", "oracle_grid", "threads"};

template <class T>
T integer(const json& j, const std::string& key, T min_value) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min_value))
    throw ConfigError(key, key + " must be an integer >= " + std::to_string(min_value));
  return static_cast<T>(v.get<long long>());
}

}  // namespace

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "scenario must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kScenarioKeys.contains(key)) throw ConfigError(key, "unknown field " + key);

  Scenario sc;
  if (j.contains("system")) sc.base = parse_system(j.at("system"), "system");
  if (j.contains("num_devices")) sc.num_devices = integer<std::size_t>(j, "num_devices", 1);
  if (j.contains("seed")) sc.seed = integer<std::uint64_t>(j, "seed", 0);
  if (j.contains("trials")) sc.trials = integer<std::size_t>(j, "trials", 1);
  if (j.contains("threads")) sc.threads = integer<unsigned>(j, "threads", 0);
  if (j.contains("oracle_grid")) {
    const int n = integer<int>(j, "oracle_grid", 8);
    sc.oracle_grid = {n, n};
  }
  if (j.contains("fading")) {
    if (!j.at("fading").is_boolean()) throw ConfigError("fading", "fading must be a boolean");
    sc.fading = j.at("fading").get<bool>();
  }
  if (j.contains("distance_range")) {
    const auto& r = j.at("distance_range");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
      throw ConfigError("distance_range", "distance_range must be [low_km, high_km]");
    sc.distance_min = r[0].get<double>();
    sc.distance_max = r[1].get<double>();
  }
  if (j.contains("device_presets")) {
    const auto& arr = j.at("device_presets");
    if (!arr.is_array()) throw ConfigError("device_presets", "device_presets must be an array");
    sc.device_presets.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "device_presets[" + std::to_string(i) + "]";
      // Reuse the device parser with a placeholder gain for field checking.
      json dj = arr[i];
      if (!dj.is_object()) throw ConfigError(where, where + " must be an object");
      dj["channel_gain"] = 1.0;
      const auto d = parse_device(dj, static_cast<int>(i + 1), sc.base, where);
      DevicePreset p{d.perf, d.max_tokens, {}, {}};
      if (arr[i].contains("b_max_hz")) p.max_bandwidth = d.max_bandwidth;
      if (arr[i].contains("p_max_w") || arr[i].contains("p_max_dbm")) p.max_power = d.max_power;
      sc.device_presets.push_back(p);
    }
  }
  if (!j.contains("sweep")) throw ConfigError("sweep", "sweep is required");
  const auto& sw = j.at("sweep");
  if (!sw.is_object() || !sw.contains("parameter") || !sw.contains("values") ||
      !sw.at("values").is_array())
    throw ConfigError("sweep", "sweep must be {\"parameter\": ..., \"values\": [...]}");
  const std::string param = sw.at("parameter").is_string() ? sw.at("parameter").get<std::string>() : "";
  if (param == "bandwidth")
    sc.sweep_parameter = SweepParameter::bandwidth;
  else if (param == "power")
    sc.sweep_parameter = SweepParameter::power;
  else if (param == "lambda")
    sc.sweep_parameter = SweepParameter::lambda;
  else
    throw ConfigError("sweep.parameter", "sweep.parameter must be bandwidth, power or lambda");
  for (const auto& v : sw.at("values")) {
    if (!v.is_number()) throw ConfigError("sweep.values", "sweep.values must be numbers");
    sc.sweep_values.push_back(v.get<double>());
  }
  if (j.contains("methods")) {
    sc.methods.clear();
    for (const auto& m : j.at("methods")) {
      const std::string name = m.is_string() ? m.get<std::string>() : "";
      if (name == "proposed") sc.methods.push_back(Method::proposed);
      else if (name == "pbwf") sc.methods.push_back(Method::pbwf);
      else if (name == "era") sc.methods.push_back(Method::era);
      else if (name == "oracle") sc.methods.push_back(Method::oracle);
      else throw ConfigError("methods", "unknown method \"" + name + "\"");
    }
  }
  sc.validate();
  return sc;
}

Instance sample_instance(const Scenario& sc, std::size_t trial, std::optional<double> sweep_value) {
  Instance inst;
  inst.cfg = sc.base;
  if (sweep_value) {
    switch (sc.sweep_parameter) {
      case SweepParameter::bandwidth: inst.cfg.total_bandwidth = *sweep_value; break;
      case SweepParameter::power: inst.cfg.total_power = dbm_to_watt(*sweep_value); break;
      case SweepParameter::lambda: inst.cfg.lambda_weight = *sweep_value; break;
    }
  }

  std::seed_seq seq{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> dist(sc.distance_min, sc.distance_max);
  std::exponential_distribution<double> fade(1.0);

  for (std::size_t m = 0; m < sc.num_devices; ++m) {
    const auto& preset = sc.device_presets[m % sc.device_presets.size()];
    DeviceState d;
    d.id = static_cast<int>(m + 1);
    d.distance = sc.distance_max > sc.distance_min ? dist(rng) : sc.distance_min;
    std::optional<double> fading;
    if (sc.fading) fading = std::max(fade(rng), 1e-12);
    d.channel_gain = channel_gain(d.distance, fading);
    d.max_tokens = preset.max_tokens;
    d.perf = preset.perf;
    d.max_bandwidth = preset.max_bandwidth.value_or(inst.cfg.total_bandwidth);
    d.max_power = preset.max_power.value_or(inst.cfg.total_power);
    inst.devices.push_back(d);
  }
  return inst;
}

namespace {

SweepRecord make_record(double value, std::size_t trial, Method method, Allocation a,
                        const Instance& inst) {
  const auto cost = total_cost(a, inst.devices, inst.cfg);
  SweepRecord r;
  r.sweep_value = value;
  r.trial = trial;
  r.method = method;
  r.total_cost = cost.total;
  r.latency_term = cost.latency_term;
  r.perf_term = cost.perf_term;
  r.allocation = std::move(a);
  return r;
}

std::vector<SweepRecord> run_point(const Scenario& sc, double value, std::size_t trial) {
  const auto inst = sample_instance(sc, trial, value);
  std::vector<SweepRecord> out;
  std::optional<Allocation> proposed;
  for (Method m : sc.methods) {
    Allocation a;
    switch (m) {
      case Method::proposed:
        if (!proposed) proposed = solve_multistart(inst.devices, inst.cfg).final;
        a = *proposed;
        break;
      case Method::era: a = era_allocation(inst.devices, inst.cfg); break;
      case Method::pbwf: a = pbwf_allocation(inst.devices, inst.cfg); break;
      case Method::oracle: a = oracle_solve(inst.devices, inst.cfg, sc.oracle_grid); break;
    }
    out.push_back(make_record(value, trial, m, std::move(a), inst));
  }
  return out;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const Scenario& sc) {
  sc.validate();
  const bool wants_oracle =
      std::find(sc.methods.begin(), sc.methods.end(), Method::oracle) != sc.methods.end();
  if (wants_oracle && sc.num_devices > kOracleMaxDevices)
    throw OracleSizeError("sweep: oracle supports at most " + std::to_string(kOracleMaxDevices) +
                              " devices, scenario has " + std::to_string(sc.num_devices),
                          oracle_grid_size(sc.num_devices, sc.oracle_grid));

  const std::size_t tasks = sc.sweep_values.size() * sc.trials;
  std::vector<std::vector<SweepRecord>> results(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      try {
        results[t] = run_point(sc, sc.sweep_values[t / sc.trials], t % sc.trials);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  unsigned n_threads = sc.threads ? sc.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, tasks));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  std::vector<SweepRecord> records;
  records.reserve(tasks * sc.methods.size());
  for (auto& r : results)
    for (auto& rec : r) records.push_back(std::move(rec));
  return records;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

}  // namespace

std::string sweep_csv(const Scenario& sc, const std::vector<SweepRecord>& records) {
  const std::size_t k = sc.num_devices;
  std::string out = "sweep_param,sweep_value,trial,method,total_cost,latency_term,perf_term,T";
  for (const char* prefix : {"B_", "p_", "s_"})
    for (std::size_t m = 1; m <= k; ++m) out += "," + std::string(prefix) + std::to_string(m);
  out += '\n';
  const std::string param = to_string(sc.sweep_parameter);
  for (const auto& r : records) {
    out += param;
    out += ',';
    append_number(out, r.sweep_value);
    out += ',' + std::to_string(r.trial) + ',' + to_string(r.method);
    for (double v : {r.total_cost, r.latency_term, r.perf_term, r.allocation.aux_latency}) {
      out += ',';
      append_number(out, v);
    }
    for (const auto* vec : {&r.allocation.bandwidth, &r.allocation.power, &r.allocation.tokens})
      for (double v : *vec) {
        out += ',';
        append_number(out, v);
      }
    out += '\n';
  }
  return out;
}

json sweep_summary(const Scenario& sc, const std::vector<SweepRecord>& records) {
  struct Acc {
    std::vector<double> total, latency, perf;
  };
  // Keyed by sweep value index then method position.
  std::map<std::pair<std::size_t, std::size_t>, Acc> acc;
  for (const auto& r : records) {
    const auto vi = static_cast<std::size_t>(
        std::find(sc.sweep_values.begin(), sc.sweep_values.end(), r.sweep_value) -
        sc.sweep_values.begin());
    const auto mi = static_cast<std::size_t>(
        std::find(sc.methods.begin(), sc.methods.end(), r.method) - sc.methods.begin());
    auto& a = acc[{vi, mi}];
    a.total.push_back(r.total_cost);
    a.latency.push_back(r.latency_term);
    a.perf.push_back(r.perf_term);
  }
  auto stats = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    return json{{"mean", mean}, {"std", sd}};
  };
  json points = json::array();
  for (std::size_t vi = 0; vi < sc.sweep_values.size(); ++vi) {
    json methods = json::object();
    for (std::size_t mi = 0; mi < sc.methods.size(); ++mi) {
      auto it = acc.find({vi, mi});
      if (it == acc.end()) continue;
      methods[to_string(sc.methods[mi])] = json{{"total_cost", stats(it->second.total)},
                                               {"latency_term", stats(it->second.latency)},
                                               {"perf_term", stats(it->second.perf)},
                                               {"count", it->second.total.size()}};
    }
    points.push_back(json{{"sweep_value", sc.sweep_values[vi]}, {"methods", methods}});
  }
  return json{{"sweep_param", to_string(sc.sweep_parameter)},
              {"trials", sc.trials},
              {"points", points}};
}

}  // namespace tokalloc
