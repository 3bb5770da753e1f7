#include "tokalloc/perf_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tokalloc {

double phi(const PerfModel& model, double tokens) {
  if (!(tokens > 0.0)) throw std::domain_error("phi: token length must be > 0");
  if (model.beta == 0.0) return 1.0 + model.gamma;
  return std::pow(model.alpha / tokens, model.beta) + model.gamma;
}

double phi_derivative(const PerfModel& model, double tokens) {
  if (!(tokens > 0.0)) throw std::domain_error("phi_derivative: token length must be > 0");
  if (model.beta == 0.0 || model.alpha == 0.0) return 0.0;
  return -model.beta * std::pow(model.alpha, model.beta) * std::pow(tokens, -model.beta - 1.0);
}

double fit_sse(const PerfModel& model, std::span<const FitPoint> data) {
  double sse = 0.0;
  for (const auto& p : data) {
    const double r = phi(model, p.tokens) - p.loss;
    sse += r * r;
  }
  return sse;
}

namespace {

struct LinearFit {
  double scale = 0.0;  // c = alpha^beta
  double offset = 0.0; // gamma
  double sse = std::numeric_limits<double>::infinity();
};

double linear_sse(std::span<const double> x, std::span<const FitPoint> data, double c,
                  double g) {
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = c * x[i] + g - data[i].loss;
    sse += r * r;
  }
  return sse;
}

// min ||c x + g 1 - L||^2 subject to c, g >= 0. The problem is convex, so the
// optimum is the unconstrained solution if feasible, else the best of the
// face-restricted optima.
LinearFit nonnegative_linear_fit(std::span<const double> x, std::span<const FitPoint> data) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    ml += data[i].loss;
  }
  mx /= n;
  ml /= n;
  double sxx = 0.0, sxl = 0.0, xx = 0.0, xl = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxl += (x[i] - mx) * (data[i].loss - ml);
    xx += x[i] * x[i];
    xl += x[i] * data[i].loss;
  }

  LinearFit best;
  auto consider = [&](double c, double g) {
    if (c < 0.0 || g < 0.0) return;
    const double sse = linear_sse(x, data, c, g);
    if (sse < best.sse) best = {c, g, sse};
  };
  if (sxx > 0.0) {
    const double c = sxl / sxx;
    consider(c, ml - c * mx);
  }
  consider(0.0, std::max(0.0, ml));
  if (xx > 0.0) consider(std::max(0.0, xl / xx), 0.0);
  return best;
}

struct BetaEval {
  double beta;
  LinearFit lin;
};

BetaEval evaluate_beta(double beta, std::span<const FitPoint> data, std::vector<double>& x) {
  for (std::size_t i = 0; i < data.size(); ++i) x[i] = std::pow(data[i].tokens, -beta);
  return {beta, nonnegative_linear_fit(x, data)};
}

PerfModel to_model(const BetaEval& e) {
  PerfModel m;
  m.beta = e.beta;
  m.gamma = e.lin.offset;
  m.alpha = e.lin.scale > 0.0 ? std::pow(e.lin.scale, 1.0 / e.beta) : 0.0;
  return m;
}

}  // namespace

FitResult fit(std::span<const FitPoint> data) {
  if (data.size() < 3) throw std::invalid_argument("fit: need at least 3 data points");
  std::set<double> seen;
  for (const auto& p : data) {
    if (!(p.tokens > 0.0)) throw std::invalid_argument("fit: token lengths must be > 0");
    if (!std::isfinite(p.loss)) throw std::invalid_argument("fit: losses must be finite");
    if (!seen.insert(p.tokens).second)
      throw std::invalid_argument("fit: token lengths must be distinct");
  }

  // Canonical order makes the result independent of the input permutation.
  std::vector<FitPoint> pts(data.begin(), data.end());
  std::sort(pts.begin(), pts.end(),
            [](const FitPoint& a, const FitPoint& b) { return a.tokens < b.tokens; });

  FitResult result;
  const auto [lo_it, hi_it] = std::minmax_element(
      pts.begin(), pts.end(), [](const FitPoint& a, const FitPoint& b) { return a.loss < b.loss; });
  const double mean =
      std::accumulate(pts.begin(), pts.end(), 0.0,
                      [](double acc, const FitPoint& p) { return acc + p.loss; }) /
      static_cast<double>(pts.size());
  if (hi_it->loss - lo_it->loss <= 1e-12 * std::max(1.0, std::abs(mean))) {
    result.degenerate = true;
    result.model = {0.0, 1.0, std::max(0.0, mean)};
    result.sse = fit_sse(result.model, pts);
    return result;
  }

  std::vector<double> x(pts.size());
  constexpr int kGrid = 100;
  std::vector<BetaEval> grid;
  grid.reserve(kGrid);
  for (int k = 0; k < kGrid; ++k) {
    const double beta = kFitBetaMin + (kFitBetaMax - kFitBetaMin) * k / (kGrid - 1);
    grid.push_back(evaluate_beta(beta, pts, x));
    result.beta_grid.emplace_back(beta, grid.back().lin.sse);
  }
  std::size_t k_best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (grid[k].lin.sse < grid[k_best].lin.sse) k_best = k;

  BetaEval best = grid[k_best];
  double a = grid[k_best == 0 ? 0 : k_best - 1].beta;
  double b = grid[std::min(k_best + 1, grid.size() - 1)].beta;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  BetaEval fc = evaluate_beta(c, pts, x);
  BetaEval fd = evaluate_beta(d, pts, x);
  for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
    if (fc.lin.sse < fd.lin.sse) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = evaluate_beta(c, pts, x);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = evaluate_beta(d, pts, x);
    }
  }
  for (const auto* cand : {&fc, &fd})
    if (cand->lin.sse < best.lin.sse) best = *cand;

  result.model = to_model(best);
  result.sse = best.lin.sse;
  if (best.lin.scale == 0.0) result.degenerate = true;
  return result;
}

std::vector<FitPoint> read_fit_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fit data file: " + path);
  std::vector<FitPoint> pts;
  std::string line;
  bool header = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header) {
      header = false;
      continue;
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    FitPoint p;
    if (!(fields >> p.tokens >> p.loss))
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected two numeric columns (tokens, loss)");
    pts.push_back(p);
  }
  return pts;
}

}  // namespace tokalloc
