#include "tokalloc/token_length.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "detail/roots.hpp"
#include "tokalloc/errors.hpp"

namespace tokalloc {

namespace {

// log of the T-independent factor of one device's term in g:
// lambda beta alpha^beta q^beta / R^beta.
double log_coefficient(const DeviceState& d, double rate_bps, const SystemConfig& cfg) {
  const double beta = d.perf.beta;
  return std::log(cfg.lambda_weight * beta) +
         beta * std::log(d.perf.alpha * cfg.bits_per_token / rate_bps);
}

bool contributes(const DeviceState& d) {
  return d.perf.alpha > 0.0 && d.perf.beta > 0.0;
}

struct GTerms {
  std::vector<double> log_coef;
  std::vector<double> exponent;  // beta + 1

  double operator()(double T) const {
    const double log_t = std::log(T);
    double sum = 0.0;
    for (std::size_t i = 0; i < log_coef.size(); ++i)
      sum += std::exp(log_coef[i] - exponent[i] * log_t);
    return sum;
  }
};

GTerms make_terms(std::span<const std::size_t> active, std::span<const double> rates,
                  std::span<const DeviceState> devices, const SystemConfig& cfg) {
  GTerms terms;
  for (auto m : active) {
    if (!contributes(devices[m])) continue;
    terms.log_coef.push_back(log_coefficient(devices[m], rates[m], cfg));
    terms.exponent.push_back(devices[m].perf.beta + 1.0);
  }
  return terms;
}

// Root of sum(T) = 1 - lambda; the sum is strictly decreasing in T.
double stationarity_root(const GTerms& terms, double rhs) {
  if (terms.log_coef.empty()) return 0.0;
  double lo = 0.0;
  double hi = 1e-9;
  int grow = 0;
  while (terms(hi) > rhs && grow++ < 2000) {
    lo = hi;
    hi *= 2.0;
  }
  const auto br = detail::bisect_threshold([&](double T) { return terms(T) <= rhs; }, lo, hi,
                                           1e-10, 200);
  return 0.5 * (br.lo + br.hi);
}

}  // namespace

double stationarity_g(double T, std::span<const std::size_t> active,
                      std::span<const double> rates, std::span<const DeviceState> devices,
                      const SystemConfig& cfg) {
  if (!(T > 0.0)) throw std::domain_error("stationarity_g: T must be > 0");
  return make_terms(active, rates, devices, cfg)(T) - (1.0 - cfg.lambda_weight);
}

TokenSolveResult solve_token_lengths_for_rates(std::span<const double> rates,
                                               std::span<const DeviceState> devices,
                                               const SystemConfig& cfg) {
  const std::size_t n = devices.size();
  if (rates.size() != n)
    throw std::invalid_argument("solve_token_lengths: rate vector size mismatch");
  const double lambda = cfg.lambda_weight;
  const double q = cfg.bits_per_token;

  TokenSolveResult out;
  out.tokens.assign(n, 0.0);

  if (lambda <= 0.0) return out;

  std::vector<std::size_t> included;
  for (std::size_t m = 0; m < n; ++m) {
    if (devices[m].max_tokens <= 0.0) continue;
    if (!(rates[m] > 0.0))
      throw InfeasibleError("device " + std::to_string(devices[m].id) +
                            " has zero rate but must transmit tokens");
    included.push_back(m);
  }

  auto cap_latency = [&](std::size_t m) { return devices[m].max_tokens * q / rates[m]; };

  if (lambda >= 1.0) {
    for (auto m : included) {
      out.tokens[m] = devices[m].max_tokens;
      out.aux_latency = std::max(out.aux_latency, cap_latency(m));
    }
    return out;
  }

  // Active devices sorted by cap latency so the smallest cap leaves first.
  std::vector<std::size_t> active = included;
  std::sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
    return cap_latency(a) < cap_latency(b);
  });
  std::vector<std::size_t> pinned;
  double pinned_latency = 0.0;
  double root = 0.0;
  while (true) {
    root = stationarity_root(make_terms(active, rates, devices, cfg), 1.0 - lambda);
    if (active.empty() || cap_latency(active.front()) >= root) break;
    pinned.push_back(active.front());
    pinned_latency = std::max(pinned_latency, cap_latency(active.front()));
    active.erase(active.begin());
  }

  const double T = std::max(root, pinned_latency);
  out.aux_latency = T;
  for (auto m : pinned) out.tokens[m] = devices[m].max_tokens;
  for (auto m : active) out.tokens[m] = std::min(T * rates[m] / q, devices[m].max_tokens);
  out.active_set = active;
  std::sort(out.active_set.begin(), out.active_set.end());

  if (!active.empty() && T > 0.0) {
    const double g_right = stationarity_g(T, active, rates, devices, cfg);
    if (root >= pinned_latency) {
      out.stationarity_residual = std::abs(g_right);
    } else {
      // Kink at the last pinned cap: 0 must lie in [-g_left, -g_right].
      std::vector<std::size_t> with_kink = active;
      with_kink.push_back(pinned.back());
      const double g_left = stationarity_g(T, with_kink, rates, devices, cfg);
      out.stationarity_residual = std::max(0.0, -g_left) + std::max(0.0, g_right);
    }
  }
  return out;
}

TokenSolveResult solve_token_lengths(std::span<const double> bandwidth,
                                     std::span<const double> power,
                                     std::span<const DeviceState> devices,
                                     const SystemConfig& cfg) {
  if (bandwidth.size() != devices.size() || power.size() != devices.size())
    throw std::invalid_argument("solve_token_lengths: allocation size mismatch");
  std::vector<double> rates(devices.size());
  for (std::size_t m = 0; m < devices.size(); ++m)
    rates[m] = rate(bandwidth[m], power[m], devices[m].channel_gain, cfg.noise_psd);
  return solve_token_lengths_for_rates(rates, devices, cfg);
}

Allocation with_optimal_tokens(std::vector<double> bandwidth, std::vector<double> power,
                               std::span<const DeviceState> devices, const SystemConfig& cfg) {
  auto sol = solve_token_lengths(bandwidth, power, devices, cfg);
  Allocation a;
  a.bandwidth = std::move(bandwidth);
  a.power = std::move(power);
  a.tokens = std::move(sol.tokens);
  a.aux_latency = sol.aux_latency;
  return a;
}

IntegerTokens floor_tokens(const Allocation& alloc, std::span<const DeviceState> devices,
                           const SystemConfig& cfg) {
  IntegerTokens out;
  out.allocation = alloc;
  out.continuous_cost = total_cost(alloc, devices, cfg);
  for (std::size_t m = 0; m < devices.size(); ++m) {
    double s = std::floor(alloc.tokens[m]);
    if (devices[m].max_tokens >= 1.0) s = std::max(s, 1.0);
    out.allocation.tokens[m] = s;
  }
  out.integer_cost = total_cost(out.allocation, devices, cfg);
  out.allocation.aux_latency = out.integer_cost.latency_term;
  return out;
}

}  // namespace tokalloc
