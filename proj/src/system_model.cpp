#include "tokalloc/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tokalloc {

namespace {

void require(bool ok, const char* field, const char* constraint) {
  if (!ok) throw std::invalid_argument(std::string(field) + " must satisfy " + constraint);
}

// phi extended to s = 0 by its limit.
double phi_or_limit(const PerfModel& perf, double tokens) {
  if (tokens > 0.0) return phi(perf, tokens);
  if (perf.beta == 0.0) return 1.0 + perf.gamma;
  if (perf.alpha == 0.0) return perf.gamma;
  return kInfinity;
}

}  // namespace

void SystemConfig::validate() const {
  require(total_bandwidth > 0.0, "total_bandwidth", "> 0");
  require(total_power > 0.0, "total_power", "> 0");
  require(noise_psd > 0.0, "noise_psd", "> 0");
  require(lambda_weight >= 0.0 && lambda_weight <= 1.0, "lambda_weight", "0 <= lambda <= 1");
  require(bits_per_token > 0.0, "bits_per_token", "> 0");
  require(tolerance > 0.0, "tolerance", "> 0");
  require(max_ao_iters >= 1, "max_ao_iters", ">= 1");
}

SystemConfig default_config() {
  SystemConfig cfg;
  cfg.total_power = dbm_to_watt(23.0);
  cfg.noise_psd = dbm_to_watt(-174.0);
  cfg.text_power = dbm_to_watt(15.0);
  return cfg;
}

void DeviceState::validate() const {
  require(channel_gain > 0.0, "channel_gain", "> 0");
  require(max_bandwidth > 0.0, "max_bandwidth", "> 0");
  require(max_power > 0.0, "max_power", "> 0");
  require(max_tokens >= 0.0, "max_tokens", ">= 0");
  require(perf.alpha >= 0.0 && perf.beta >= 0.0 && perf.gamma >= 0.0, "perf",
          "alpha, beta, gamma >= 0");
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

double path_loss_db(double distance_km) {
  if (!(distance_km > 0.0)) throw std::domain_error("path_loss_db: distance must be > 0");
  return 128.1 + 37.6 * std::log10(distance_km);
}

double channel_gain(double distance_km, std::optional<double> fading) {
  const double pl = path_loss_db(distance_km);
  const double f = fading.value_or(1.0);
  if (!(f > 0.0)) throw std::domain_error("channel_gain: fading must be > 0");
  return std::pow(10.0, -pl / 10.0) * f;
}

double rate(double bandwidth, double power, double gain, double noise_psd) {
  if (bandwidth <= 0.0 || power <= 0.0 || gain <= 0.0) return 0.0;
  const double snr = gain * power / (noise_psd * bandwidth);
  return bandwidth * std::log1p(snr) / std::numbers::ln2;
}

double latency(double tokens, double bits_per_token, double rate_bps) {
  if (tokens <= 0.0) return 0.0;
  if (rate_bps <= 0.0) return kInfinity;
  return tokens * bits_per_token / rate_bps;
}

std::vector<double> device_rates(const Allocation& alloc,
                                 std::span<const DeviceState> devices,
                                 const SystemConfig& cfg) {
  std::vector<double> rates(devices.size());
  for (std::size_t m = 0; m < devices.size(); ++m)
    rates[m] = rate(alloc.bandwidth[m], alloc.power[m], devices[m].channel_gain, cfg.noise_psd);
  return rates;
}

CostBreakdown total_cost(const Allocation& alloc, std::span<const DeviceState> devices,
                         const SystemConfig& cfg) {
  if (alloc.bandwidth.size() != devices.size() || alloc.power.size() != devices.size() ||
      alloc.tokens.size() != devices.size())
    throw std::invalid_argument("total_cost: allocation size does not match device count");

  CostBreakdown out;
  out.per_device_latency.resize(devices.size());
  const auto rates = device_rates(alloc, devices, cfg);
  for (std::size_t m = 0; m < devices.size(); ++m) {
    out.per_device_latency[m] = latency(alloc.tokens[m], cfg.bits_per_token, rates[m]);
    out.latency_term = std::max(out.latency_term, out.per_device_latency[m]);
    if (devices[m].max_tokens <= 0.0) continue;
    out.perf_term += phi_or_limit(devices[m].perf, alloc.tokens[m]);
  }
  const double lambda = cfg.lambda_weight;
  out.total = 0.0;
  if (lambda < 1.0) out.total += (1.0 - lambda) * out.latency_term;
  if (lambda > 0.0) out.total += lambda * out.perf_term;
  return out;
}

bool satisfies_constraints(const Allocation& alloc, std::span<const DeviceState> devices,
                           const SystemConfig& cfg, double rel_slack) {
  const std::size_t n = devices.size();
  if (alloc.bandwidth.size() != n || alloc.power.size() != n || alloc.tokens.size() != n)
    return false;
  const double up = 1.0 + rel_slack;
  double sum_b = 0.0;
  double sum_p = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double b = alloc.bandwidth[m];
    const double p = alloc.power[m];
    const double s = alloc.tokens[m];
    if (!(b >= 0.0) || !(p >= 0.0) || !(s >= 0.0)) return false;
    if (b > devices[m].max_bandwidth * up || p > devices[m].max_power * up) return false;
    if (s > devices[m].max_tokens * up) return false;
    sum_b += b;
    sum_p += p;
  }
  return sum_b <= cfg.total_bandwidth * up && sum_p <= cfg.total_power * up;
}

}  // namespace tokalloc
