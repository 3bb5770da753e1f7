#pragma once

#include <span>
#include <string>
#include <vector>

#include "tokalloc/system_model.hpp"

namespace tokalloc {

struct AOIterate {
  Allocation allocation;
  CostBreakdown cost;
};

struct AOTrace {
  /// The initial allocation followed by one entry per half-step
  /// (token step, then bandwidth/power step).
  std::vector<AOIterate> iterations;
  bool converged = false;
  int rounds = 0;
  Allocation final;
  CostBreakdown final_cost;
  std::string start;  // "era", "pbwf" or "custom"
};

/// Alternating optimization from `init`. Each round runs the token step at
/// fixed (B, p), then the minimum-latency bandwidth/power step at fixed s
/// bounded above by the current T. Stops once a round's relative cost
/// decrease is below cfg.tolerance or after cfg.max_ao_iters rounds.
/// `final` is the cheapest recorded iterate. Throws InfeasibleError when
/// `init` violates the budgets or caps.
AOTrace solve(std::span<const DeviceState> devices, const SystemConfig& cfg,
              const Allocation& init);

/// Runs solve() from the ERA and the PB-WF allocations and keeps the cheaper
/// trace (ERA on ties).
AOTrace solve_multistart(std::span<const DeviceState> devices, const SystemConfig& cfg);

}  // namespace tokalloc
