#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "tokalloc/perf_model.hpp"

namespace tokalloc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Budgets, weights and physical constants. All fields in SI units.
struct SystemConfig {
  double total_bandwidth = 3e6;        // Hz
  double total_power = 0.0;            // W
  double noise_psd = 0.0;              // W/Hz
  double lambda_weight = 0.6;          // weight of the loss term
  double bits_per_token = 24576.0;     // bits per token vector (1536 x 16)
  double text_bandwidth = 0.5e6;       // Hz, dedicated text channel
  double text_power = 0.0;             // W, dedicated text channel
  double tolerance = 1e-6;
  int max_ao_iters = 50;

  /// Throws std::invalid_argument naming the violated field.
  void validate() const;
};

/// Defaults of the reference setup: 3 MHz, 23 dBm, -174 dBm/Hz, lambda 0.6,
/// text channel 0.5 MHz / 15 dBm.
SystemConfig default_config();

struct DeviceState {
  int id = 0;
  double distance = 0.0;        // km
  double channel_gain = 0.0;    // linear power gain
  double max_bandwidth = 0.0;   // Hz
  double max_power = 0.0;       // W
  double max_tokens = 0.0;
  PerfModel perf;

  void validate() const;
};

struct Allocation {
  std::vector<double> bandwidth;  // Hz
  std::vector<double> power;      // W
  std::vector<double> tokens;
  double aux_latency = 0.0;       // s

  std::size_t size() const noexcept { return tokens.size(); }
};

struct CostBreakdown {
  double latency_term = 0.0;
  double perf_term = 0.0;
  double total = 0.0;
  std::vector<double> per_device_latency;
};

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

/// 128.1 + 37.6 log10(d), d in km. Throws std::domain_error for d <= 0.
double path_loss_db(double distance_km);

/// Linear power gain 10^(-PL/10) times an optional positive fading factor.
double channel_gain(double distance_km, std::optional<double> fading = std::nullopt);

/// Shannon rate B log2(1 + g p / (N0 B)); 0 when B or p is 0.
double rate(double bandwidth, double power, double gain, double noise_psd);

/// s q / R; 0 for s = 0, kInfinity for R = 0 and s > 0.
double latency(double tokens, double bits_per_token, double rate_bps);

std::vector<double> device_rates(const Allocation& alloc,
                                 std::span<const DeviceState> devices,
                                 const SystemConfig& cfg);

/// Weighted cost (1 - lambda) max_m T_m + lambda sum_m phi_m(s_m).
/// Devices with max_tokens == 0 do not contribute to the loss term. A zero
/// weight drops its term entirely so an infinite term cannot leak a NaN.
CostBreakdown total_cost(const Allocation& alloc, std::span<const DeviceState> devices,
                         const SystemConfig& cfg);

/// True when the allocation satisfies every budget, cap and sign
/// constraint, with `rel_slack` relative slack on the budgets and caps.
bool satisfies_constraints(const Allocation& alloc, std::span<const DeviceState> devices,
                           const SystemConfig& cfg, double rel_slack = 1e-9);

}  // namespace tokalloc
