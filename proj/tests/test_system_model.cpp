#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <stdexcept>

#include "tokalloc/system_model.hpp"

using namespace tokalloc;

TEST_CASE("dbm_to_watt") {
  CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dbm_to_watt(23.0) == doctest::Approx(0.199526).epsilon(1e-6));
  CHECK(dbm_to_watt(-174.0) == doctest::Approx(3.9811e-21).epsilon(1e-4));
}

TEST_CASE("dbm round trip") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-200.0, 60.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    CHECK(watt_to_dbm(dbm_to_watt(x)) == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("path loss and gain") {
  CHECK(path_loss_db(1.0) == doctest::Approx(128.1));
  CHECK(path_loss_db(0.3) == doctest::Approx(108.44).epsilon(1e-4));
  CHECK(path_loss_db(0.5) == doctest::Approx(116.78).epsilon(1e-4));
  CHECK_THROWS_AS(path_loss_db(0.0), std::domain_error);
  CHECK_THROWS_AS(path_loss_db(-1.0), std::domain_error);

  CHECK(channel_gain(1.0) == doctest::Approx(1.5488e-13).epsilon(1e-4));
  CHECK(channel_gain(0.3) == doctest::Approx(1.43227e-11).epsilon(1e-4));
  CHECK(channel_gain(0.3, 2.0) == doctest::Approx(2.0 * channel_gain(0.3)));
  CHECK_THROWS_AS(channel_gain(0.4, 0.0), std::domain_error);
}

TEST_CASE("rate") {
  const double n0 = 3.9811e-21;
  CHECK(rate(1e6, 0.0, 1e-11, n0) == 0.0);
  CHECK(rate(0.0, 0.1, 1e-11, n0) == 0.0);
  // g p = 3 N0 B -> log2(4) = 2
  CHECK(rate(1e6, 3.0 * n0 * 1e6 / 1e-11, 1e-11, n0) == doctest::Approx(2e6).epsilon(1e-12));
  CHECK(rate(1e6, 0.1, 1e-11, n0) == doctest::Approx(1e6 * std::log2(1.0 + 1e-12 / (n0 * 1e6))));
  CHECK(rate(1e6, 0.1, 1e-11, n0) == doctest::Approx(7.97835e6).epsilon(1e-5));
}

TEST_CASE("rate monotonicity") {
  const double n0 = dbm_to_watt(-174.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lb(4.0, 7.0), lp(-4.0, 0.0), lg(-13.0, -10.0);
  for (int i = 0; i < 500; ++i) {
    const double b = std::pow(10.0, lb(rng));
    const double p = std::pow(10.0, lp(rng));
    const double g = std::pow(10.0, lg(rng));
    CHECK(rate(b, p * 1.01, g, n0) >= rate(b, p, g, n0));
    CHECK(rate(b, p, g * 1.01, n0) >= rate(b, p, g, n0));
    CHECK(rate(b * 1.01, p, g, n0) >= rate(b, p, g, n0));
  }
}

TEST_CASE("latency") {
  CHECK(latency(0.0, 1000.0, 0.0) == 0.0);
  CHECK(latency(64.0, 1000.0, 64000.0) == doctest::Approx(1.0));
  CHECK(latency(128.0, 24576.0, 2.7904e7) == doctest::Approx(0.11273).epsilon(1e-4));
  CHECK(std::isinf(latency(1.0, 1000.0, 0.0)));
  for (double r = 1e3; r < 1e8; r *= 1.7) CHECK(latency(10.0, 1000.0, r * 1.01) < latency(10.0, 1000.0, r));
}

namespace {

DeviceState device(double gain, PerfModel perf, double max_tokens) {
  DeviceState d;
  d.channel_gain = gain;
  d.max_bandwidth = 3e6;
  d.max_power = 0.2;
  d.max_tokens = max_tokens;
  d.perf = perf;
  return d;
}

}  // namespace

TEST_CASE("total_cost weights") {
  auto cfg = default_config();
  std::vector<DeviceState> devs = {device(1e-11, {64, 1, 0.5}, 128), device(5e-12, {64, 0.5, 0.2}, 64)};
  Allocation a{{1e6, 2e6}, {0.1, 0.09}, {64, 16}, 0.0};
  cfg.lambda_weight = 1.0;
  auto c = total_cost(a, devs, cfg);
  CHECK(c.total == doctest::Approx(c.perf_term));
  CHECK(c.perf_term == doctest::Approx(1.5 + 2.2));
  cfg.lambda_weight = 0.0;
  c = total_cost(a, devs, cfg);
  CHECK(c.total == doctest::Approx(c.latency_term));
  CHECK(c.latency_term == doctest::Approx(std::max(c.per_device_latency[0], c.per_device_latency[1])));
}

TEST_CASE("total_cost identity on random inputs") {
  auto cfg = default_config();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    cfg.lambda_weight = u(rng);
    std::vector<DeviceState> devs;
    Allocation a;
    const int n = 1 + i % 3;
    for (int m = 0; m < n; ++m) {
      devs.push_back(device(1e-12 + 1e-11 * u(rng), {10 + 100 * u(rng), 2 * u(rng), u(rng)}, 128));
      a.bandwidth.push_back(1e5 + 1e6 * u(rng));
      a.power.push_back(1e-3 + 0.05 * u(rng));
      a.tokens.push_back(1 + 127 * u(rng));
    }
    const auto c = total_cost(a, devs, cfg);
    CHECK(c.total == doctest::Approx((1 - cfg.lambda_weight) * c.latency_term +
                                     cfg.lambda_weight * c.perf_term));
    CHECK(c.latency_term == *std::max_element(c.per_device_latency.begin(), c.per_device_latency.end()));
  }
}

TEST_CASE("total_cost hand example") {
  // Latencies {0.2, 0.5} s and losses {1.0, 1.5} at lambda 0.6.
  auto cfg = default_config();
  cfg.lambda_weight = 0.6;
  cfg.bits_per_token = 1000.0;
  std::vector<DeviceState> devs = {device(1e-11, {10, 1, 0.0}, 128), device(1e-11, {10, 1, 1.0}, 128)};
  const double n0 = cfg.noise_psd;
  // Choose powers so both links carry 1e5 bit/s on B = 1e5 Hz (SNR 1).
  const double p = n0 * 1e5 / 1e-11;
  Allocation a{{1e5, 1e5}, {p, p}, {10, 10}, 0.0};
  // rate = 1e5, latency = 10 * 1000 / 1e5 = 0.1 s; scale tokens to hit 0.2/0.5.
  a.tokens = {20, 50};
  devs[0].perf = {20, 1, 0.0};   // phi = 1.0
  devs[1].perf = {25, 1, 1.0};   // phi = 0.5 + 1.0 = 1.5
  const auto c = total_cost(a, devs, cfg);
  CHECK(c.per_device_latency[0] == doctest::Approx(0.2));
  CHECK(c.per_device_latency[1] == doctest::Approx(0.5));
  CHECK(c.perf_term == doctest::Approx(2.5));
  CHECK(c.total == doctest::Approx(1.7));
}

TEST_CASE("infinite latency propagates through the cost") {
  auto cfg = default_config();
  std::vector<DeviceState> devs = {device(1e-11, {64, 1, 0.5}, 128)};
  Allocation a{{1e6}, {0.0}, {10}, 0.0};
  const auto c = total_cost(a, devs, cfg);
  CHECK(std::isinf(c.latency_term));
  CHECK(std::isinf(c.total));
  cfg.lambda_weight = 1.0;
  CHECK(std::isfinite(total_cost(a, devs, cfg).total));
}

TEST_CASE("config validation") {
  auto cfg = default_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.lambda_weight = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = default_config();
  cfg.noise_psd = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
