#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tokalloc/baselines.hpp"
#include "tokalloc/system_model.hpp"

namespace tokalloc {

enum class SweepParameter { bandwidth, power, lambda };
enum class Method { proposed, pbwf, era, oracle };

std::string to_string(SweepParameter p);
std::string to_string(Method m);

struct DevicePreset {
  PerfModel perf;
  double max_tokens = 0.0;
  std::optional<double> max_bandwidth;  // Hz, defaults to the bandwidth budget
  std::optional<double> max_power;      // W, defaults to the power budget
};

/// Visual (S^max 128) then audio (S^max 64).
std::vector<DevicePreset> default_presets();

struct Scenario {
  std::size_t num_devices = 2;
  double distance_min = 0.3;  // km
  double distance_max = 0.5;  // km
  std::uint64_t seed = 1;
  /// Device m uses preset m modulo the list length.
  std::vector<DevicePreset> device_presets = default_presets();
  SweepParameter sweep_parameter = SweepParameter::bandwidth;
  /// Hz for bandwidth, dBm for power, plain weight for lambda.
  std::vector<double> sweep_values;
  std::size_t trials = 100;
  std::vector<Method> methods = {Method::proposed, Method::pbwf, Method::era};
  SystemConfig base = default_config();
  bool fading = false;  // unit-mean exponential power fading
  OracleGrid oracle_grid;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// Keys: num_devices, distance_range [lo, hi], seed, device_presets,
/// sweep {parameter, values}, trials, methods, system, fading, oracle_grid,
/// threads. Throws ConfigError.
Scenario parse_scenario(const nlohmann::json& j);

struct Instance {
  SystemConfig cfg;
  std::vector<DeviceState> devices;
};

/// Draws the device distances (and fading) for `trial` from the scenario
/// seed; the draw does not depend on the sweep value, so every sweep point
/// sees the same channels for a given trial.
Instance sample_instance(const Scenario& sc, std::size_t trial,
                         std::optional<double> sweep_value = std::nullopt);

struct SweepRecord {
  double sweep_value = 0.0;
  std::size_t trial = 0;
  Method method = Method::proposed;
  double total_cost = 0.0;
  double latency_term = 0.0;
  double perf_term = 0.0;
  Allocation allocation;
};

/// Every sweep value x trial x method, in that nesting order. Trials run on
/// a thread pool; the output order does not depend on scheduling.
/// Throws OracleSizeError when the oracle is requested for too many devices.
std::vector<SweepRecord> run_sweep(const Scenario& sc);

/// sweep_param,sweep_value,trial,method,total_cost,latency_term,perf_term,T,
/// B_1..B_K,p_1..p_K,s_1..s_K with 9 significant digits.
std::string sweep_csv(const Scenario& sc, const std::vector<SweepRecord>& records);

/// Per sweep point and method: mean and sample std of the three cost terms.
nlohmann::json sweep_summary(const Scenario& sc, const std::vector<SweepRecord>& records);

}  // namespace tokalloc
