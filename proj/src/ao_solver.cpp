#include "tokalloc/ao_solver.hpp"

#include <cmath>
#include <optional>

#include "tokalloc/bandwidth_power.hpp"
#include "tokalloc/baselines.hpp"
#include "tokalloc/errors.hpp"
#include "tokalloc/token_length.hpp"

namespace tokalloc {

AOTrace solve(std::span<const DeviceState> devices, const SystemConfig& cfg,
              const Allocation& init) {
  if (!satisfies_constraints(init, devices, cfg))
    throw InfeasibleError("ao_solver: initial allocation violates the budget constraints");

  AOTrace trace;
  trace.start = "custom";
  Allocation cur = init;
  auto record = [&](const Allocation& a) {
    trace.iterations.push_back({a, total_cost(a, devices, cfg)});
    return trace.iterations.back().cost.total;
  };
  double cost = record(cur);

  for (int round = 0; round < cfg.max_ao_iters; ++round) {
    const double round_start = cost;
    ++trace.rounds;

    auto sol = solve_token_lengths(cur.bandwidth, cur.power, devices, cfg);
    cur.tokens = std::move(sol.tokens);
    cur.aux_latency = sol.aux_latency;
    cost = record(cur);

    bool stalled = cur.aux_latency <= 0.0;
    if (!stalled) {
      // The current (B, p) meets T by construction; a rounding-level miss
      // at the bound means no latency reduction is available.
      if (solve_min_total_power(cur.tokens, cur.aux_latency, devices, cfg).feasible) {
        auto search = min_latency_search(cur.tokens, devices, cfg, cur.aux_latency);
        cur.bandwidth = std::move(search.allocation.bandwidth);
        cur.power = std::move(search.allocation.power);
        cur.aux_latency = search.min_latency;
        cost = record(cur);
      } else {
        stalled = true;
      }
    }

    const double decrease = round_start - cost;
    if (stalled ||
        (std::isfinite(round_start) && decrease <= cfg.tolerance * std::abs(round_start))) {
      trace.converged = true;
      break;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.iterations.size(); ++i)
    if (trace.iterations[i].cost.total <= trace.iterations[best].cost.total) best = i;
  trace.final = trace.iterations[best].allocation;
  trace.final_cost = trace.iterations[best].cost;
  return trace;
}

AOTrace solve_multistart(std::span<const DeviceState> devices, const SystemConfig& cfg) {
  std::optional<AOTrace> era, pbwf;
  std::optional<InfeasibleError> failure;
  try {
    era = solve(devices, cfg, era_allocation(devices, cfg));
    era->start = "era";
  } catch (const InfeasibleError& e) {
    failure = e;
  }
  try {
    pbwf = solve(devices, cfg, pbwf_allocation(devices, cfg));
    pbwf->start = "pbwf";
  } catch (const InfeasibleError& e) {
    failure = e;
  }
  if (era && pbwf) return pbwf->final_cost.total < era->final_cost.total ? *pbwf : *era;
  if (era) return *era;
  if (pbwf) return *pbwf;
  throw *failure;
}

}  // namespace tokalloc
