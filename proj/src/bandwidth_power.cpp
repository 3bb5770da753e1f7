#include "tokalloc/bandwidth_power.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "detail/roots.hpp"

namespace tokalloc {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Power curve f(B) = c B (e^(k/B) - 1) with c = N0/g and k = a ln2. In terms
// of x = k / B: f = c k expm1(x) / x and f'(B) = -c h(x), where
// h(x) = 1 - e^x (1 - x) is increasing from h(0) = 0.
struct PowerCurve {
  double c = 0.0;
  double k = 0.0;

  double value(double b) const {
    if (k == 0.0) return 0.0;
    if (b <= 0.0) return kInfinity;
    return c * b * std::expm1(k / b);
  }

  double slope(double b) const {
    if (k == 0.0) return 0.0;
    if (b <= 0.0) return -kInfinity;
    return -c * h(k / b);
  }

  static double h(double x) {
    if (x < 1e-3) {
      const double x2 = x * x;
      return x2 * (0.5 + x * (1.0 / 3.0 + x * (0.125 + x / 30.0)));
    }
    if (x > 700.0) return kInfinity;
    return 1.0 - std::exp(x) * (1.0 - x);
  }

  static double dh(double x) { return x * std::exp(x); }

  // Shape of f in x: expm1(x) / x, increasing from 1.
  static double shape(double x) { return x < 1e-8 ? 1.0 + 0.5 * x : std::expm1(x) / x; }
};

PowerCurve make_curve(double tokens, double latency_target, const DeviceState& d,
                      const SystemConfig& cfg) {
  PowerCurve pc;
  pc.c = cfg.noise_psd / d.channel_gain;
  pc.k = tokens > 0.0 ? tokens * cfg.bits_per_token / latency_target * kLn2 : 0.0;
  return pc;
}

// Smallest bandwidth at which the curve fits under `power_cap`, or a negative
// value when no bandwidth does.
double min_bandwidth_for_power(const PowerCurve& pc, double power_cap) {
  const double ratio = power_cap / (pc.c * pc.k);
  if (!(ratio > 1.0)) return -1.0;
  double hi = 1.0;
  while (PowerCurve::shape(hi) < ratio && hi < 1e6) hi *= 2.0;
  // Largest x with shape(x) <= ratio; the larger bandwidth side is feasible.
  const auto br = detail::bisect_threshold(
      [&](double x) { return PowerCurve::shape(x) > ratio; }, 0.0, hi, 1e-15, 200);
  double x = br.lo;
  if (x <= 0.0) return kInfinity;
  double b = pc.k / x;
  // Guard against the rounding in b = k / x.
  for (int i = 0; i < 64 && pc.value(b) > power_cap; ++i) b = std::nextafter(b, kInfinity);
  return b;
}

// argmin_B f(B) + mu B over [b_lo, b_hi].
double bandwidth_at_price(const PowerCurve& pc, double mu, double b_lo, double b_hi) {
  if (pc.slope(b_lo) >= -mu) return b_lo;
  if (pc.slope(b_hi) <= -mu) return b_hi;
  // Solve h(x) = mu / c over x in [k / b_hi, k / b_lo].
  const double target = mu / pc.c;
  const double x_lo = pc.k / b_hi;
  const double x_hi = pc.k / b_lo;
  const double x0 = std::sqrt(2.0 * target);  // small-x inverse of h
  const double x = detail::newton_increasing(PowerCurve::h, PowerCurve::dh, target, x_lo, x_hi, x0);
  return std::clamp(pc.k / x, b_lo, b_hi);
}

}  // namespace

double min_power_for_bandwidth(double bandwidth, double tokens, double latency_target,
                               const DeviceState& device, const SystemConfig& cfg) {
  if (tokens <= 0.0) return 0.0;
  if (!(latency_target > 0.0))
    throw std::domain_error("min_power_for_bandwidth: latency target must be > 0");
  return make_curve(tokens, latency_target, device, cfg).value(bandwidth);
}

double power_curve_derivative(double bandwidth, double tokens, double latency_target,
                              const DeviceState& device, const SystemConfig& cfg) {
  if (tokens <= 0.0) return 0.0;
  if (!(latency_target > 0.0))
    throw std::domain_error("power_curve_derivative: latency target must be > 0");
  return make_curve(tokens, latency_target, device, cfg).slope(bandwidth);
}

FeasibilityResult solve_min_total_power(std::span<const double> tokens, double latency_target,
                                        std::span<const DeviceState> devices,
                                        const SystemConfig& cfg) {
  const std::size_t n = devices.size();
  if (tokens.size() != n) throw std::invalid_argument("solve_min_total_power: size mismatch");
  if (!(latency_target > 0.0))
    throw std::domain_error("solve_min_total_power: latency target must be > 0");

  FeasibilityResult out;
  out.bandwidth.assign(n, 0.0);
  out.power.assign(n, 0.0);
  out.total_power = kInfinity;

  std::vector<std::size_t> users;
  std::vector<PowerCurve> curve(n);
  std::vector<double> b_min(n, 0.0), b_max(n, 0.0);
  double sum_min = 0.0, sum_max = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (tokens[m] <= 0.0) continue;
    users.push_back(m);
    curve[m] = make_curve(tokens[m], latency_target, devices[m], cfg);
    b_max[m] = std::min(devices[m].max_bandwidth, cfg.total_bandwidth);
    const double p_cap = std::min(devices[m].max_power, cfg.total_power);
    b_min[m] = min_bandwidth_for_power(curve[m], p_cap);
    if (b_min[m] < 0.0 || b_min[m] > b_max[m]) return out;
    sum_min += b_min[m];
    sum_max += b_max[m];
  }
  if (users.empty()) {
    out.feasible = true;
    out.total_power = 0.0;
    return out;
  }
  if (sum_min > cfg.total_bandwidth) return out;

  auto assign = [&](double mu) {
    double sum = 0.0;
    for (auto m : users) {
      out.bandwidth[m] = bandwidth_at_price(curve[m], mu, b_min[m], b_max[m]);
      sum += out.bandwidth[m];
    }
    return sum;
  };

  if (sum_max <= cfg.total_bandwidth) {
    for (auto m : users) out.bandwidth[m] = b_max[m];
    out.multiplier = 0.0;
  } else {
    double mu_hi = 0.0;
    for (auto m : users) mu_hi = std::max(mu_hi, -curve[m].slope(b_min[m]));
    const auto br = detail::bisect_threshold(
        [&](double mu) { return assign(mu) <= cfg.total_bandwidth; }, 0.0, mu_hi, 1e-10, 200);
    out.multiplier = br.hi;
    assign(br.hi);
  }

  out.total_power = 0.0;
  for (auto m : users) {
    out.power[m] = curve[m].value(out.bandwidth[m]);
    out.total_power += out.power[m];
  }
  out.feasible = out.total_power <= cfg.total_power;
  return out;
}

LatencySearchResult min_latency_search(std::span<const double> tokens,
                                       std::span<const DeviceState> devices,
                                       const SystemConfig& cfg, double latency_upper) {
  LatencySearchResult out;
  const bool any = std::any_of(tokens.begin(), tokens.end(), [](double s) { return s > 0.0; });
  if (!any) {
    out.allocation.feasible = true;
    out.allocation.bandwidth.assign(devices.size(), 0.0);
    out.allocation.power.assign(devices.size(), 0.0);
    return out;
  }
  if (!(latency_upper > 0.0) || !std::isfinite(latency_upper))
    throw std::logic_error("min_latency_search: upper latency bound must be finite and > 0");

  auto hi_alloc = solve_min_total_power(tokens, latency_upper, devices, cfg);
  ++out.iterations;
  if (!hi_alloc.feasible)
    throw std::logic_error("min_latency_search: upper latency bound is infeasible");
  double hi = latency_upper;
  double lo = latency_upper * 1e-6;
  for (int expand = 0; expand < 60; ++expand) {
    auto probe = solve_min_total_power(tokens, lo, devices, cfg);
    ++out.iterations;
    if (!probe.feasible) break;
    hi = lo;
    hi_alloc = std::move(probe);
    lo *= 1e-6;
  }

  const auto br = detail::bisect_threshold(
      [&](double t) {
        auto probe = solve_min_total_power(tokens, t, devices, cfg);
        ++out.iterations;
        const bool ok = probe.feasible;
        if (ok) hi_alloc = std::move(probe);
        return ok;
      },
      lo, hi, cfg.tolerance, 1000);
  out.min_latency = br.hi;
  out.allocation = std::move(hi_alloc);
  return out;
}

}  // namespace tokalloc
