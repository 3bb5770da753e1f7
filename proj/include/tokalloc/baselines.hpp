#pragma once

#include <span>
#include <vector>

#include "tokalloc/system_model.hpp"

namespace tokalloc {

/// Equal split of both budgets (clamped to per-device caps), tokens from the
/// token-length step.
Allocation era_allocation(std::span<const DeviceState> devices, const SystemConfig& cfg);

/// Bandwidth proportional to each device's maximum payload S_m^max q, clamped
/// to caps with the excess redistributed; power by water-filling
/// p_m = max(0, mu - N0 B_m / g_m) with sum p_m = P^max. Tokens from the
/// token-length step.
Allocation pbwf_allocation(std::span<const DeviceState> devices, const SystemConfig& cfg);

/// Splits `budget` proportionally to `weights` subject to `caps`.
std::vector<double> proportional_split(std::span<const double> weights,
                                       std::span<const double> caps, double budget);

struct WaterFilling {
  std::vector<double> power;
  double water_level = 0.0;
};

/// p_m = clamp(mu - floor_m, 0, cap_m) with sum p_m = budget (or all caps if
/// they fit within the budget).
WaterFilling water_fill(std::span<const double> noise_floor, std::span<const double> caps,
                        double budget);

struct OracleGrid {
  int bandwidth_points = 64;
  int power_points = 64;
};

inline constexpr std::size_t kOracleMaxDevices = 3;
inline constexpr double kOracleMaxPoints = 5e7;

/// Number of (bandwidth split, power split) pairs the oracle would evaluate.
double oracle_grid_size(std::size_t num_devices, const OracleGrid& grid);

/// Exhaustive search over full-budget splits on a uniform simplex grid
/// (budget fractions i / points, every device strictly positive, clamped to
/// caps), with exact token lengths at each point. Throws OracleSizeError
/// for more than kOracleMaxDevices devices or an oversized grid, and
/// std::invalid_argument for fewer than 8 points per axis.
Allocation oracle_solve(std::span<const DeviceState> devices, const SystemConfig& cfg,
                        const OracleGrid& grid = {});

}  // namespace tokalloc
