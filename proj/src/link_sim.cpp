#include "tokalloc/link_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tokalloc::link {

TokenMatrix sliding_pool(const TokenMatrix& tokens, std::size_t window, Pooling mode) {
  if (window < 1) throw std::invalid_argument("sliding_pool: window must be >= 1");
  const std::size_t out_rows = (tokens.rows + window - 1) / window;
  TokenMatrix out(out_rows, tokens.cols);
  for (std::size_t r = 0; r < out_rows; ++r) {
    const std::size_t begin = r * window;
    const std::size_t end = std::min(begin + window, tokens.rows);
    for (std::size_t c = 0; c < tokens.cols; ++c) {
      double acc = mode == Pooling::mean ? 0.0 : tokens.at(begin, c);
      for (std::size_t i = begin; i < end; ++i) {
        if (mode == Pooling::mean)
          acc += tokens.at(i, c);
        else
          acc = std::max(acc, tokens.at(i, c));
      }
      out.at(r, c) = mode == Pooling::mean ? acc / static_cast<double>(end - begin) : acc;
    }
  }
  return out;
}

ComplexSignal modulate(const TokenMatrix& tokens) {
  ComplexSignal sig;
  sig.rows = tokens.rows;
  sig.cols = tokens.cols;
  const std::size_t n = tokens.data.size();
  sig.padded = n % 2 != 0;
  sig.symbols.reserve((n + 1) / 2);
  for (std::size_t i = 0; i < n; i += 2)
    sig.symbols.emplace_back(tokens.data[i], i + 1 < n ? tokens.data[i + 1] : 0.0);
  return sig;
}

TokenMatrix demodulate(const ComplexSignal& sig) {
  TokenMatrix out(sig.rows, sig.cols);
  const std::size_t n = out.data.size();
  if (sig.symbols.size() != (n + 1) / 2)
    throw std::invalid_argument("demodulate: symbol count does not match source shape");
  for (std::size_t k = 0; k < sig.symbols.size(); ++k) {
    out.data[2 * k] = sig.symbols[k].real();
    if (2 * k + 1 < n) out.data[2 * k + 1] = sig.symbols[k].imag();
  }
  return out;
}

ComplexSignal channel_apply(const ComplexSignal& sig, const LinkConfig& cfg) {
  if (cfg.noise_var < 0.0) throw std::invalid_argument("channel_apply: noise_var must be >= 0");
  ComplexSignal out = sig;
  const double scale = cfg.amplitude_gain * std::sqrt(cfg.power);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(cfg.noise_var / 2.0));
  for (auto& y : out.symbols) {
    y *= scale;
    if (cfg.noise_var > 0.0) {
      const double re = noise(rng);
      const double im = noise(rng);
      y += std::complex<double>(re, im);
    }
  }
  return out;
}

TokenMatrix equalize_demodulate(const ComplexSignal& sig, const LinkConfig& cfg) {
  const double scale = cfg.amplitude_gain * std::sqrt(cfg.power);
  if (!(scale > 0.0)) throw std::domain_error("equalize_demodulate: degenerate channel h sqrt(p) = 0");
  ComplexSignal eq = sig;
  for (auto& y : eq.symbols) y /= scale;
  return demodulate(eq);
}

double reconstruction_loss(const TokenMatrix& received, const TokenMatrix& sent) {
  if (received.rows != sent.rows || received.cols != sent.cols)
    throw std::invalid_argument("reconstruction_loss: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < sent.data.size(); ++i) {
    const double d = received.data[i] - sent.data[i];
    acc += d * d;
  }
  return acc;
}

std::vector<double> column_mean(const TokenMatrix& tokens) {
  std::vector<double> mean(tokens.cols, 0.0);
  if (tokens.rows == 0) return mean;
  for (std::size_t r = 0; r < tokens.rows; ++r)
    for (std::size_t c = 0; c < tokens.cols; ++c) mean[c] += tokens.at(r, c);
  for (auto& v : mean) v /= static_cast<double>(tokens.rows);
  return mean;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw std::domain_error("cosine_similarity: zero vector");
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

double contrastive_loss(std::span<const std::vector<double>> pooled, std::span<const double> text,
                        double temperature, std::size_t target) {
  if (!(temperature > 0.0)) throw std::invalid_argument("contrastive_loss: temperature must be > 0");
  if (target >= pooled.size()) throw std::out_of_range("contrastive_loss: target index out of range");
  std::vector<double> logits;
  logits.reserve(pooled.size());
  for (const auto& a : pooled) logits.push_back(cosine_similarity(a, text) / temperature);
  const double top = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z - top);
  return -(logits[target] - top - std::log(denom));
}

double noise_var_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

double zf_expected_error(std::size_t rows, std::size_t cols, const LinkConfig& cfg) {
  const double gain2 = cfg.amplitude_gain * cfg.amplitude_gain;
  return static_cast<double>(rows * cols) * cfg.noise_var / (2.0 * cfg.power * gain2);
}

LinkExperimentResult run_link_experiment(const LinkExperimentConfig& cfg) {
  if (cfg.trials == 0) throw std::invalid_argument("link experiment: trials must be >= 1");
  if (cfg.rows == 0 || cfg.cols == 0) throw std::invalid_argument("link experiment: empty token matrix");
  LinkConfig link;
  link.noise_var = noise_var_from_snr_db(cfg.snr_db);
  link.window = cfg.window;

  double total = 0.0;
  std::size_t pooled_rows = 0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t trial_seed = cfg.seed + t;
    // Components of variance 1/2 give unit-power symbols.
    std::mt19937_64 src_rng(trial_seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> component(0.0, std::sqrt(0.5));
    TokenMatrix tokens(cfg.rows, cfg.cols);
    for (auto& v : tokens.data) v = component(src_rng);

    const auto pooled = sliding_pool(tokens, cfg.window, link.pooling);
    pooled_rows = pooled.rows;
    link.seed = trial_seed;
    const auto rx = equalize_demodulate(channel_apply(modulate(pooled), link), link);
    total += reconstruction_loss(rx, pooled);
  }

  LinkExperimentResult out;
  out.snr_db = cfg.snr_db;
  out.trials = cfg.trials;
  out.empirical_mse = total / static_cast<double>(cfg.trials);
  out.theoretical_mse = zf_expected_error(pooled_rows, cfg.cols, link);
  out.relative_error = std::abs(out.empirical_mse - out.theoretical_mse) / out.theoretical_mse;
  return out;
}

}  // namespace tokalloc::link
