#pragma once

#include <span>
#include <vector>

#include "tokalloc/system_model.hpp"

namespace tokalloc {

struct TokenSolveResult {
  std::vector<double> tokens;
  double aux_latency = 0.0;
  /// Indices of devices whose token length is below its cap (s = T R / q).
  std::vector<std::size_t> active_set;
  /// Distance of 0 from the subdifferential of the reduced cost in T.
  double stationarity_residual = 0.0;
};

/// g(T) = sum_{m in active} lambda beta_m alpha_m^beta_m q^beta_m
///        / (T^(beta_m + 1) R_m^beta_m) - (1 - lambda).
/// Continuous and strictly decreasing in T > 0. Throws std::domain_error
/// for T <= 0.
double stationarity_g(double T, std::span<const std::size_t> active,
                      std::span<const double> rates, std::span<const DeviceState> devices,
                      const SystemConfig& cfg);

/// Optimal continuous token lengths and auxiliary latency for fixed rates.
///
/// Every device starts active. While the root T of g over the active set
/// exceeds the smallest cap latency S_m q / R_m among active devices, that
/// device is pinned to its cap and leaves the set. The final T is the larger
/// of the root and the largest pinned cap latency.
///
/// lambda = 1 pins every device to its cap; lambda = 0 returns s = 0, T = 0.
/// Devices with max_tokens == 0 get s = 0 and are ignored. Throws
/// InfeasibleError if a device with positive cap has zero rate.
TokenSolveResult solve_token_lengths_for_rates(std::span<const double> rates,
                                               std::span<const DeviceState> devices,
                                               const SystemConfig& cfg);

TokenSolveResult solve_token_lengths(std::span<const double> bandwidth,
                                     std::span<const double> power,
                                     std::span<const DeviceState> devices,
                                     const SystemConfig& cfg);

/// (B, p) plus the token step's (s, T).
Allocation with_optimal_tokens(std::vector<double> bandwidth, std::vector<double> power,
                               std::span<const DeviceState> devices, const SystemConfig& cfg);

struct IntegerTokens {
  Allocation allocation;
  CostBreakdown continuous_cost;
  CostBreakdown integer_cost;
};

/// Floors each s_m (never below 1 token for a device with positive cap) and
/// recomputes T as the max latency; reports both costs.
IntegerTokens floor_tokens(const Allocation& alloc, std::span<const DeviceState> devices,
                           const SystemConfig& cfg);

}  // namespace tokalloc
