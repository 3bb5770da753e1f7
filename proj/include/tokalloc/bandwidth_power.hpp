#pragma once

#include <span>
#include <vector>

#include "tokalloc/system_model.hpp"

namespace tokalloc {

struct FeasibilityResult {
  bool feasible = false;
  std::vector<double> bandwidth;
  std::vector<double> power;
  double total_power = 0.0;  // kInfinity when a device cannot meet the target at all
  double multiplier = 0.0;  // dual price of the bandwidth budget
};

struct LatencySearchResult {
  double min_latency = 0.0;
  FeasibilityResult allocation;
  int iterations = 0;
};

/// Minimum power that lets `tokens` cross a link of bandwidth B within
/// `latency_target`: (N0 B / g) (2^(s q / (B T')) - 1). Zero for s = 0,
/// kInfinity for B = 0 with s > 0.
double min_power_for_bandwidth(double bandwidth, double tokens, double latency_target,
                               const DeviceState& device, const SystemConfig& cfg);

/// d/dB of min_power_for_bandwidth, c [2^(a/B) (1 - a ln2 / B) - 1] with
/// c = N0 / g and a = s q / T'. Always <= 0.
double power_curve_derivative(double bandwidth, double tokens, double latency_target,
                              const DeviceState& device, const SystemConfig& cfg);

/// Minimum total power for latency target T' at fixed token lengths.
///
/// Each device's power is pinned to its minimum for the bandwidth it gets,
/// which leaves a separable convex problem in B. The lower bandwidth bound
/// of each device comes from its power cap; the bandwidth budget is priced
/// by a multiplier found by bisection. Infeasibility is reported through
/// `feasible`, never thrown.
FeasibilityResult solve_min_total_power(std::span<const double> tokens, double latency_target,
                                        std::span<const DeviceState> devices,
                                        const SystemConfig& cfg);

/// Smallest feasible max-latency for fixed tokens, by bisection on T' in
/// (0, latency_upper]. Stops when the bracket's relative width is at most
/// cfg.tolerance and returns the feasible end. Throws std::logic_error if
/// latency_upper itself is infeasible.
LatencySearchResult min_latency_search(std::span<const double> tokens,
                                       std::span<const DeviceState> devices,
                                       const SystemConfig& cfg, double latency_upper);

}  // namespace tokalloc
