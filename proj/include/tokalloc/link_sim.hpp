#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace tokalloc::link {

/// Row-major token sequence: `rows` tokens of dimension `cols`.
struct TokenMatrix {
  std::size_t rows = 0;
  std::size_t cols = 1;
  std::vector<double> data;

  TokenMatrix() = default;
  TokenMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Complex baseband symbols carrying consecutive pairs of token components.
/// An odd component count is padded with one zero imaginary part.
struct ComplexSignal {
  std::vector<std::complex<double>> symbols;
  std::size_t rows = 0;
  std::size_t cols = 1;
  bool padded = false;
};

enum class Pooling { mean, max };

struct LinkConfig {
  double amplitude_gain = 1.0;  // h, sqrt of the power gain
  double power = 1.0;           // W
  double noise_var = 0.0;       // per complex symbol
  std::size_t window = 1;
  Pooling pooling = Pooling::mean;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

/// Splits the rows into ceil(rows / window) consecutive sets (the last one
/// possibly short) and pools each set to one row.
TokenMatrix sliding_pool(const TokenMatrix& tokens, std::size_t window, Pooling mode = Pooling::mean);

ComplexSignal modulate(const TokenMatrix& tokens);

/// Inverse of modulate(), dropping the pad component.
TokenMatrix demodulate(const ComplexSignal& sig);

/// y -> h sqrt(p) y + n with n circularly-symmetric Gaussian of variance
/// noise_var per symbol. Deterministic in cfg.seed.
ComplexSignal channel_apply(const ComplexSignal& sig, const LinkConfig& cfg);

/// Zero-forcing: divide by h sqrt(p), then demodulate. Throws
/// std::domain_error when h sqrt(p) == 0.
TokenMatrix equalize_demodulate(const ComplexSignal& sig, const LinkConfig& cfg);

/// Squared Frobenius norm of received - sent.
double reconstruction_loss(const TokenMatrix& received, const TokenMatrix& sent);

std::vector<double> column_mean(const TokenMatrix& tokens);

double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// -log softmax over the non-text modalities of sim(a_m, a_text) / tau,
/// evaluated at `target`. The denominator runs over `pooled` only.
double contrastive_loss(std::span<const std::vector<double>> pooled, std::span<const double> text,
                        double temperature, std::size_t target);

/// sigma^2 for unit-power symbols at the given SNR.
double noise_var_from_snr_db(double snr_db);

/// rows cols sigma^2 / (2 p h^2), the expected ZF reconstruction error.
double zf_expected_error(std::size_t rows, std::size_t cols, const LinkConfig& cfg);

struct LinkExperimentConfig {
  double snr_db = 10.0;
  std::size_t trials = 1000;
  std::size_t rows = 64;
  std::size_t cols = 32;
  std::size_t window = 4;
  std::uint64_t seed = 1;
};

struct LinkExperimentResult {
  double snr_db = 0.0;
  std::size_t trials = 0;
  double empirical_mse = 0.0;
  double theoretical_mse = 0.0;
  double relative_error = 0.0;
};

/// Monte Carlo of pool -> modulate -> AWGN -> ZF with unit-power symbols.
/// Trial t uses seed + t for both the source tokens and the channel.
LinkExperimentResult run_link_experiment(const LinkExperimentConfig& cfg);

}  // namespace tokalloc::link
