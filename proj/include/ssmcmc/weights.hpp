#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ssmcmc/rng.hpp"

namespace ssmcmc {

/// Points paired with log-domain importance weights.
template <class T>
struct WeightedSample {
  std::vector<T> values;
  std::vector<double> log_weights;

  WeightedSample() = default;
  WeightedSample(std::vector<T> v, std::vector<double> lw)
      : values(std::move(v)), log_weights(std::move(lw)) {
    if (values.size() != log_weights.size()) {
      throw std::invalid_argument("WeightedSample: length mismatch");
    }
  }
  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// log(sum(exp(v))) without overflow. Throws on an empty sequence.
double log_sum_exp(std::span<const double> log_values);

/// exp(lw - log_sum_exp(lw)); throws "degenerate weights" if no weight is positive.
std::vector<double> normalize_weights(std::span<const double> log_weights);

/// 1 / sum of squared normalised weights.
double effective_sample_size(std::span<const double> log_weights);

/// `count` independent draws of an index with probability proportional to
/// the (log-domain) weights.
std::vector<std::size_t> multinomial_resample(std::span<const double> log_weights,
                                              std::size_t count, RngStream& rng);

/// Same draws as above for weights that are already normalised.
void multinomial_resample_normalized(std::span<const double> probs, RngStream& rng,
                                     std::span<std::size_t> out);

template <class T>
std::vector<double> normalize_weights(const WeightedSample<T>& ws) {
  return normalize_weights(ws.log_weights);
}

template <class T>
double effective_sample_size(const WeightedSample<T>& ws) {
  return effective_sample_size(ws.log_weights);
}

template <class T>
std::vector<std::size_t> multinomial_resample(const WeightedSample<T>& ws, std::size_t count,
                                              RngStream& rng) {
  return multinomial_resample(ws.log_weights, count, rng);
}

}  // namespace ssmcmc
