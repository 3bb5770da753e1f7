#pragma once

#include <span>
#include <string>
#include <vector>

namespace tokalloc {

/// Exponential token-length -> validation-loss model
///   phi(s) = (alpha / s)^beta + gamma,  alpha, beta, gamma >= 0.
struct PerfModel {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

// Demo presets. They are not measured values; nothing in the solver depends
// on the specific numbers.
inline constexpr PerfModel kVisualPreset{128.0, 0.9, 0.35};
inline constexpr PerfModel kAudioPreset{64.0, 0.7, 0.45};

struct FitPoint {
  double tokens = 0.0;
  double loss = 0.0;
};

struct FitResult {
  PerfModel model;
  bool degenerate = false;
  double sse = 0.0;
  /// (beta, sse) for every outer grid point evaluated, in search order.
  std::vector<std::pair<double, double>> beta_grid;
};

inline constexpr double kFitBetaMin = 0.01;
inline constexpr double kFitBetaMax = 5.0;

/// Throws std::domain_error for tokens <= 0.
double phi(const PerfModel& model, double tokens);
double phi_derivative(const PerfModel& model, double tokens);

/// Sum of squared residuals of `model` on `data`.
double fit_sse(const PerfModel& model, std::span<const FitPoint> data);

/// Least-squares fit of (alpha, beta, gamma) under nonnegativity.
///
/// Outer search over beta in [kFitBetaMin, kFitBetaMax]: a uniform grid
/// followed by golden-section refinement around the best grid cell. For a
/// fixed beta the model is linear in (c, gamma) with c = alpha^beta, which
/// is solved as a two-variable nonnegative least-squares problem.
///
/// Requires >= 3 points with distinct positive token lengths
/// (std::invalid_argument otherwise). Constant losses give a degenerate fit
/// with alpha = 0 and gamma equal to the common loss.
FitResult fit(std::span<const FitPoint> data);

/// Reads a two-column CSV (tokens, loss) with one header row.
std::vector<FitPoint> read_fit_csv(const std::string& path);

}  // namespace tokalloc
