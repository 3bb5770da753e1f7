#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "tokalloc/perf_model.hpp"

using namespace tokalloc;

TEST_CASE("phi values") {
  CHECK(phi({64, 0.5, 0.2}, 16) == doctest::Approx(2.2));
  CHECK(phi({64, 1.0, 0.0}, 64) == doctest::Approx(1.0));
  CHECK_THROWS_AS(phi({64, 1.0, 0.0}, 0.0), std::domain_error);
  CHECK_THROWS_AS(phi({64, 1.0, 0.0}, -3.0), std::domain_error);
}

TEST_CASE("phi_derivative") {
  CHECK(phi_derivative({64, 1.0, 0.3}, 8) == doctest::Approx(-1.0));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ua(1, 200), ub(0.05, 3), ug(0, 1), us(2, 300);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    const PerfModel m{ua(rng), ub(rng), ug(rng)};
    const double s = i == 0 ? 32.0 : us(rng);
    const double h = 1e-4 * s;
    const double fd = (phi(m, s + h) - phi(m, s - h)) / (2 * h);
    const double d = phi_derivative(m, s);
    CHECK(std::abs(fd - d) <= 1e-6 * std::abs(d));
    ++checked;
  }
  CHECK(checked == 300);
}

TEST_CASE("phi is strictly decreasing with limit gamma") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ua(1, 200), ub(0.5, 3), ug(0, 1), us(0.1, 1000);
  for (int i = 0; i < 500; ++i) {
    const PerfModel m{ua(rng), ub(rng), ug(rng)};
    double s1 = us(rng), s2 = us(rng);
    if (s1 == s2) continue;
    if (s1 > s2) std::swap(s1, s2);
    CHECK(phi(m, s1) > phi(m, s2));
    const double gap = phi(m, 1e9 * m.alpha) - m.gamma;
    CHECK(gap == doctest::Approx(std::pow(1e-9, m.beta)).epsilon(1e-6));
    if (m.beta >= 2.0 / 3.0) CHECK(gap <= 1e-6);
  }
}

namespace {

std::vector<FitPoint> synth(const PerfModel& m, std::vector<double> s) {
  std::vector<FitPoint> pts;
  for (double x : s) pts.push_back({x, phi(m, x)});
  return pts;
}

}  // namespace

TEST_CASE("fit recovers noiseless parameters") {
  const PerfModel truth{100, 0.8, 0.4};
  const auto pts = synth(truth, {8, 16, 32, 64, 128});
  const auto r = fit(pts);
  CHECK_FALSE(r.degenerate);
  CHECK(r.model.alpha == doctest::Approx(100).epsilon(1e-3));
  CHECK(r.model.beta == doctest::Approx(0.8).epsilon(1e-3));
  CHECK(r.model.gamma == doctest::Approx(0.4).epsilon(1e-3));
  CHECK(r.sse < 1e-12);
}

TEST_CASE("fit is no worse than any grid point it tried") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.02);
  auto pts = synth({60, 1.2, 0.3}, {4, 8, 12, 16, 24, 32, 48, 64});
  for (auto& p : pts) p.loss += noise(rng);
  const auto r = fit(pts);
  REQUIRE_FALSE(r.beta_grid.empty());
  for (const auto& [beta, sse] : r.beta_grid) CHECK(r.sse <= sse + 1e-15);
  CHECK(r.sse == doctest::Approx(fit_sse(r.model, pts)).epsilon(1e-9));
}

TEST_CASE("fit degenerate constant losses") {
  std::vector<FitPoint> pts = {{8, 0.7}, {16, 0.7}, {32, 0.7}, {64, 0.7}};
  const auto r = fit(pts);
  CHECK(r.degenerate);
  CHECK(r.model.gamma == doctest::Approx(0.7));
  for (double s : {1.0, 10.0, 1000.0}) CHECK(phi(r.model, s) == doctest::Approx(0.7));
}

TEST_CASE("fit permutation invariance") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.01);
  auto pts = synth({80, 0.6, 0.5}, {5, 9, 17, 33, 65, 129});
  for (auto& p : pts) p.loss += noise(rng);
  const auto a = fit(pts);
  std::shuffle(pts.begin(), pts.end(), rng);
  const auto b = fit(pts);
  CHECK(a.model.alpha == b.model.alpha);
  CHECK(a.model.beta == b.model.beta);
  CHECK(a.model.gamma == b.model.gamma);
}

TEST_CASE("fit input validation") {
  std::vector<FitPoint> two = {{8, 1.0}, {16, 0.9}};
  CHECK_THROWS_AS(fit(two), std::invalid_argument);
  std::vector<FitPoint> dup = {{8, 1.0}, {8, 0.9}, {16, 0.8}};
  CHECK_THROWS_AS(fit(dup), std::invalid_argument);
  std::vector<FitPoint> neg = {{-1, 1.0}, {8, 0.9}, {16, 0.8}};
  CHECK_THROWS_AS(fit(neg), std::invalid_argument);
}

TEST_CASE("read_fit_csv") {
  const auto path = std::filesystem::temp_directory_path() / "tokalloc_fit_test.csv";
  {
    std::ofstream f(path);
    f << "tokens,loss\n8,1.5\n16,1.1\n\n32,0.9\n";
  }
  const auto pts = read_fit_csv(path.string());
  std::filesystem::remove(path);
  REQUIRE(pts.size() == 3);
  CHECK(pts[1].tokens == 16);
  CHECK(pts[2].loss == doctest::Approx(0.9));
}
