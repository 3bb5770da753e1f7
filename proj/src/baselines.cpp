#include "tokalloc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "detail/roots.hpp"
#include "tokalloc/errors.hpp"
#include "tokalloc/token_length.hpp"

namespace tokalloc {

namespace {

std::vector<double> caps_of(std::span<const DeviceState> devices, double DeviceState::*field) {
  std::vector<double> caps;
  caps.reserve(devices.size());
  for (const auto& d : devices) caps.push_back(d.*field);
  return caps;
}

// All compositions of `total` into `parts` positive integers, in
// lexicographic order.
template <class Visit>
void for_each_composition(int total, std::size_t parts, Visit&& visit) {
  std::vector<int> c(parts, 1);
  if (parts == 1) {
    c[0] = total;
    visit(c);
    return;
  }
  auto rec = [&](auto&& self, std::size_t idx, int remaining) -> void {
    if (idx + 1 == parts) {
      c[idx] = remaining;
      visit(c);
      return;
    }
    const int slots_after = static_cast<int>(parts - idx - 1);
    for (int v = 1; v <= remaining - slots_after; ++v) {
      c[idx] = v;
      self(self, idx + 1, remaining - v);
    }
  };
  rec(rec, 0, total);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::vector<double> proportional_split(std::span<const double> weights,
                                       std::span<const double> caps, double budget) {
  const std::size_t n = weights.size();
  std::vector<double> out(n, 0.0);
  if (std::accumulate(caps.begin(), caps.end(), 0.0) <= budget) {
    std::copy(caps.begin(), caps.end(), out.begin());
    return out;
  }
  std::vector<double> w(weights.begin(), weights.end());
  if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) std::fill(w.begin(), w.end(), 1.0);

  std::vector<bool> fixed(n, false);
  double remaining = budget;
  for (std::size_t round = 0; round <= n; ++round) {
    double w_free = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      if (!fixed[m]) w_free += w[m];
    if (w_free <= 0.0) break;
    const double scale = remaining / w_free;
    bool clamped = false;
    for (std::size_t m = 0; m < n; ++m) {
      if (fixed[m] || scale * w[m] <= caps[m]) continue;
      fixed[m] = true;
      out[m] = caps[m];
      remaining -= caps[m];
      clamped = true;
    }
    if (!clamped) {
      for (std::size_t m = 0; m < n; ++m)
        if (!fixed[m]) out[m] = scale * w[m];
      break;
    }
  }
  return out;
}

WaterFilling water_fill(std::span<const double> noise_floor, std::span<const double> caps,
                        double budget) {
  const std::size_t n = noise_floor.size();
  WaterFilling out;
  out.power.assign(n, 0.0);
  auto fill = [&](double mu) {
    double sum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      out.power[m] = std::clamp(mu - noise_floor[m], 0.0, caps[m]);
      sum += out.power[m];
    }
    return sum;
  };
  if (std::accumulate(caps.begin(), caps.end(), 0.0) <= budget) {
    std::copy(caps.begin(), caps.end(), out.power.begin());
    out.water_level = kInfinity;
    return out;
  }
  const double hi = budget + *std::max_element(noise_floor.begin(), noise_floor.end());
  const auto br = detail::bisect_threshold([&](double mu) { return fill(mu) >= budget; }, 0.0,
                                           hi, 1e-16, 400);
  out.water_level = br.lo;
  fill(br.lo);
  return out;
}

Allocation era_allocation(std::span<const DeviceState> devices, const SystemConfig& cfg) {
  if (devices.empty()) throw std::invalid_argument("era_allocation: no devices");
  const double k = static_cast<double>(devices.size());
  std::vector<double> b(devices.size()), p(devices.size());
  for (std::size_t m = 0; m < devices.size(); ++m) {
    b[m] = std::min(cfg.total_bandwidth / k, devices[m].max_bandwidth);
    p[m] = std::min(cfg.total_power / k, devices[m].max_power);
  }
  return with_optimal_tokens(std::move(b), std::move(p), devices, cfg);
}

Allocation pbwf_allocation(std::span<const DeviceState> devices, const SystemConfig& cfg) {
  if (devices.empty()) throw std::invalid_argument("pbwf_allocation: no devices");
  std::vector<double> payload;
  for (const auto& d : devices) payload.push_back(d.max_tokens * cfg.bits_per_token);
  auto b = proportional_split(payload, caps_of(devices, &DeviceState::max_bandwidth),
                              cfg.total_bandwidth);
  std::vector<double> floor(devices.size());
  for (std::size_t m = 0; m < devices.size(); ++m)
    floor[m] = cfg.noise_psd * b[m] / devices[m].channel_gain;
  auto wf = water_fill(floor, caps_of(devices, &DeviceState::max_power), cfg.total_power);
  return with_optimal_tokens(std::move(b), std::move(wf.power), devices, cfg);
}

double oracle_grid_size(std::size_t num_devices, const OracleGrid& grid) {
  const int k = static_cast<int>(num_devices);
  return binomial(grid.bandwidth_points - 1, k - 1) * binomial(grid.power_points - 1, k - 1);
}

Allocation oracle_solve(std::span<const DeviceState> devices, const SystemConfig& cfg,
                        const OracleGrid& grid) {
  if (devices.empty()) throw std::invalid_argument("oracle_solve: no devices");
  if (grid.bandwidth_points < 8 || grid.power_points < 8)
    throw std::invalid_argument("oracle_solve: need at least 8 grid points per axis");
  const double size = oracle_grid_size(devices.size(), grid);
  if (devices.size() > kOracleMaxDevices || size > kOracleMaxPoints)
    throw OracleSizeError("oracle_solve: refusing " + std::to_string(devices.size()) +
                              " devices with an estimated " + std::to_string(size) +
                              " grid points",
                          size);

  const std::size_t n = devices.size();
  std::vector<std::vector<double>> b_splits, p_splits;
  for_each_composition(grid.bandwidth_points, n, [&](const std::vector<int>& c) {
    std::vector<double> b(n);
    for (std::size_t m = 0; m < n; ++m)
      b[m] = std::min(cfg.total_bandwidth * c[m] / grid.bandwidth_points,
                      devices[m].max_bandwidth);
    b_splits.push_back(std::move(b));
  });
  for_each_composition(grid.power_points, n, [&](const std::vector<int>& c) {
    std::vector<double> p(n);
    for (std::size_t m = 0; m < n; ++m)
      p[m] = std::min(cfg.total_power * c[m] / grid.power_points, devices[m].max_power);
    p_splits.push_back(std::move(p));
  });

  Allocation best;
  double best_cost = kInfinity;
  Allocation trial;
  trial.bandwidth.resize(n);
  trial.power.resize(n);
  std::vector<double> rates(n);
  for (const auto& b : b_splits) {
    for (const auto& p : p_splits) {
      for (std::size_t m = 0; m < n; ++m)
        rates[m] = rate(b[m], p[m], devices[m].channel_gain, cfg.noise_psd);
      auto sol = solve_token_lengths_for_rates(rates, devices, cfg);
      trial.bandwidth = b;
      trial.power = p;
      trial.tokens = std::move(sol.tokens);
      trial.aux_latency = sol.aux_latency;
      const double cost = total_cost(trial, devices, cfg).total;
      if (cost < best_cost) {
        best_cost = cost;
        best = trial;
      }
    }
  }
  return best;
}

}  // namespace tokalloc
