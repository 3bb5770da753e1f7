#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "tokalloc/bandwidth_power.hpp"

using namespace tokalloc;

namespace {

DeviceState dev(double gain) {
  DeviceState d;
  d.channel_gain = gain;
  d.max_bandwidth = 3e6;
  d.max_power = dbm_to_watt(23.0);
  d.max_tokens = 128;
  d.perf = kVisualPreset;
  return d;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("min_power_for_bandwidth example") {
  auto cfg = default_config();
  cfg.noise_psd = 3.9811e-21;
  cfg.bits_per_token = 1000;
  const auto d = dev(1e-11);
  // s q / T' = 2e6 on B = 1e6: two bits per Hz.
  const double p = min_power_for_bandwidth(1e6, 2, 1e-3, d, cfg);
  CHECK(p == doctest::Approx(1.19433e-3).epsilon(1e-5));
  CHECK(min_power_for_bandwidth(1e6, 0, 1e-3, d, cfg) == 0);
  CHECK(std::isinf(min_power_for_bandwidth(0, 10, 1e-3, d, cfg)));
}

TEST_CASE("power curve derivative") {
  auto cfg = default_config();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> lb(4.5, 6.5), ls(0, 2.3), lt(-2.5, 0), lg(-13, -10);
  for (int i = 0; i < 300; ++i) {
    const auto d = dev(std::pow(10.0, lg(rng)));
    const double B = std::pow(10.0, lb(rng)), s = std::pow(10.0, ls(rng)), T = std::pow(10.0, lt(rng));
    const double f = min_power_for_bandwidth(B, s, T, d, cfg);
    if (!std::isfinite(f) || f > 1e6) continue;
    const double h = 1e-5 * B;
    const double fd = (min_power_for_bandwidth(B + h, s, T, d, cfg) -
                       min_power_for_bandwidth(B - h, s, T, d, cfg)) / (2 * h);
    const double df = power_curve_derivative(B, s, T, d, cfg);
    CHECK(df <= 0);
    CHECK(std::abs(fd - df) <= 1e-6 * std::abs(df));
    // Convexity: second difference is nonnegative.
    const double h2 = 0.01 * B;
    CHECK(min_power_for_bandwidth(B + h2, s, T, d, cfg) + min_power_for_bandwidth(B - h2, s, T, d, cfg) -
              2 * f >= -1e-12 * f);
  }
}

TEST_CASE("single device uses its full bandwidth") {
  auto cfg = default_config();
  auto d = dev(1e-11);
  d.max_bandwidth = 2e6;
  std::vector<DeviceState> devs = {d};
  std::vector<double> s = {64};
  const double T = 0.1;
  const auto r = solve_min_total_power(s, T, devs, cfg);
  CHECK(r.bandwidth[0] == doctest::Approx(2e6));
  CHECK(r.power[0] == doctest::Approx(min_power_for_bandwidth(2e6, 64, T, d, cfg)));
  CHECK(r.feasible == (r.power[0] <= cfg.total_power));
  // 1-D grid over B gives no lower power.
  double best = 1e300;
  for (int i = 1; i <= 400; ++i) best = std::min(best, min_power_for_bandwidth(2e6 * i / 400, 64, T, d, cfg));
  CHECK(r.total_power <= best * (1 + 1e-12));
}

TEST_CASE("symmetric devices split bandwidth equally") {
  auto cfg = default_config();
  std::vector<DeviceState> devs = {dev(5e-12), dev(5e-12)};
  std::vector<double> s = {100, 100};
  const double T = 0.4;
  const auto r = solve_min_total_power(s, T, devs, cfg);
  CHECK(r.bandwidth[0] == doctest::Approx(1.5e6).epsilon(1e-8));
  CHECK(r.bandwidth[1] == doctest::Approx(1.5e6).epsilon(1e-8));
  const double grid = testing::split_grid_min_power(s, T, devs, cfg, 400);
  CHECK(rel(r.total_power, grid) <= 1e-4);
  CHECK(r.total_power <= grid * (1 + 1e-9));
}

TEST_CASE("split problem against grid on random instances") {
  auto cfg = default_config();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    std::vector<DeviceState> devs = {dev(channel_gain(0.3 + 0.2 * u(rng))), dev(channel_gain(0.3 + 0.2 * u(rng)))};
    std::vector<double> s = {8 + 120 * u(rng), 8 + 56 * u(rng)};
    const double T = 0.2 + 0.8 * u(rng);
    const auto r = solve_min_total_power(s, T, devs, cfg);
    const double grid = testing::split_grid_min_power(s, T, devs, cfg, 4000);
    CHECK(r.total_power <= grid * (1 + 1e-9));
    CHECK(rel(r.total_power, grid) <= 1e-4);
  }
}

TEST_CASE("dual consistency at interior optimum") {
  auto cfg = default_config();
  std::vector<DeviceState> devs = {dev(channel_gain(0.3)), dev(channel_gain(0.45)), dev(channel_gain(0.5))};
  std::vector<double> s = {128, 64, 90};
  const double T = 0.5;
  const auto r = solve_min_total_power(s, T, devs, cfg);
  REQUIRE(r.multiplier > 0);
  for (std::size_t m = 0; m < 3; ++m) {
    const double d = -power_curve_derivative(r.bandwidth[m], s[m], T, devs[m], cfg);
    CHECK(rel(d, r.multiplier) <= 1e-6);
  }
  double sum = 0;
  for (double b : r.bandwidth) sum += b;
  CHECK(sum == doctest::Approx(cfg.total_bandwidth).epsilon(1e-9));
}

TEST_CASE("caps are honoured") {
  auto cfg = default_config();
  std::vector<DeviceState> devs = {dev(channel_gain(0.3)), dev(channel_gain(0.5))};
  devs[0].max_bandwidth = 0.5e6;
  devs[1].max_power = 0.05;
  std::vector<double> s = {128, 64};
  const auto r = solve_min_total_power(s, 0.6, devs, cfg);
  CHECK(r.bandwidth[0] <= 0.5e6 * (1 + 1e-12));
  CHECK(r.power[1] <= 0.05 * (1 + 1e-9));
}

TEST_CASE("latency search closed form and certificate") {
  auto cfg = default_config();
  std::vector<DeviceState> devs = {dev(channel_gain(0.4))};
  std::vector<double> s = {128};
  const auto r = min_latency_search(s, devs, cfg, 10.0);
  const double R = rate(cfg.total_bandwidth, cfg.total_power, devs[0].channel_gain, cfg.noise_psd);
  const double exact = s[0] * cfg.bits_per_token / R;
  CHECK(rel(r.min_latency, exact) <= 2 * cfg.tolerance);
  CHECK(r.min_latency >= exact * (1 - 1e-12));
  CHECK(solve_min_total_power(s, 1.01 * r.min_latency, devs, cfg).feasible);
  CHECK_FALSE(solve_min_total_power(s, 0.99 * r.min_latency, devs, cfg).feasible);
}

TEST_CASE("latency search against two-device grid") {
  auto cfg = default_config();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 20; ++i) {
    std::vector<DeviceState> devs = {dev(channel_gain(0.3 + 0.2 * u(rng))), dev(channel_gain(0.3 + 0.2 * u(rng)))};
    std::vector<double> s = {8 + 120 * u(rng), 8 + 56 * u(rng)};
    const auto r = min_latency_search(s, devs, cfg, 100.0);
    const double grid = testing::latency_grid_min(s, devs, cfg, 400);
    CHECK(r.min_latency <= grid * (1 + 1e-6));
    CHECK(rel(r.min_latency, grid) <= 1e-2);
    CHECK(r.allocation.total_power <= cfg.total_power * (1 + 1e-9));
    CHECK(solve_min_total_power(s, 1.01 * r.min_latency, devs, cfg).feasible);
    CHECK_FALSE(solve_min_total_power(s, 0.99 * r.min_latency, devs, cfg).feasible);
  }
}

TEST_CASE("feasibility is monotone in the latency target") {
  auto cfg = default_config();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<DeviceState> devs = {dev(channel_gain(0.35)), dev(channel_gain(0.48))};
  std::vector<double> s = {128, 64};
  for (int i = 0; i < 200; ++i) {
    const double t1 = 0.01 + 0.5 * u(rng), t2 = t1 * (1 + u(rng));
    if (solve_min_total_power(s, t1, devs, cfg).feasible) CHECK(solve_min_total_power(s, t2, devs, cfg).feasible);
  }
}

TEST_CASE("unreachable target reports infinite power") {
  auto cfg = default_config();
  std::vector<DeviceState> devs = {dev(channel_gain(0.5))};
  std::vector<double> s = {128};
  const auto r = solve_min_total_power(s, 1e-4, devs, cfg);
  CHECK_FALSE(r.feasible);
  CHECK(std::isinf(r.total_power));
}

TEST_CASE("latency search edge cases") {
  auto cfg = default_config();
  std::vector<DeviceState> devs = {dev(channel_gain(0.4))};
  std::vector<double> zero = {0};
  CHECK(min_latency_search(zero, devs, cfg, 1.0).min_latency == 0);
  std::vector<double> s = {128};
  CHECK_THROWS_AS(min_latency_search(s, devs, cfg, 1e-6), std::logic_error);
}
