#include "ssmcmc/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ssmcmc {

double log_sum_exp(std::span<const double> log_values) {
  if (log_values.empty()) {
    throw std::invalid_argument("log_sum_exp: empty sequence");
  }
  const double top = *std::max_element(log_values.begin(), log_values.end());
  if (top == -std::numeric_limits<double>::infinity()) {
    return top;
  }
  if (top == std::numeric_limits<double>::infinity()) {
    return top;
  }
  double acc = 0.0;
  for (double v : log_values) {
    acc += std::exp(v - top);
  }
  return top + std::log(acc);
}

std::vector<double> normalize_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) {
    throw std::invalid_argument("normalize_weights: degenerate weights");
  }
  const double total = log_sum_exp(log_weights);
  if (!std::isfinite(total)) {
    throw std::invalid_argument("normalize_weights: degenerate weights");
  }
  std::vector<double> out(log_weights.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(log_weights[i] - total);
  }
  return out;
}

double effective_sample_size(std::span<const double> log_weights) {
  const auto w = normalize_weights(log_weights);
  double sumsq = 0.0;
  for (double p : w) {
    sumsq += p * p;
  }
  const double ess = 1.0 / sumsq;
  return std::clamp(ess, 1.0, static_cast<double>(w.size()));
}

void multinomial_resample_normalized(std::span<const double> probs, RngStream& rng,
                                     std::span<std::size_t> out) {
  const std::size_t m = probs.size();
  std::vector<double> cumulative(m);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < m; ++i) {
    acc += probs[i];
    cumulative[i] = acc;
    if (probs[i] > 0.0) {
      last_positive = i;
    }
  }
  for (auto& idx : out) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    idx = it == cumulative.end() ? last_positive : static_cast<std::size_t>(it - cumulative.begin());
  }
}

std::vector<std::size_t> multinomial_resample(std::span<const double> log_weights,
                                              std::size_t count, RngStream& rng) {
  if (count == 0) {
    throw std::invalid_argument("multinomial_resample: count must be at least 1");
  }
  const auto probs = normalize_weights(log_weights);
  std::vector<std::size_t> out(count);
  multinomial_resample_normalized(probs, rng, out);
  return out;
}

}  // namespace ssmcmc
