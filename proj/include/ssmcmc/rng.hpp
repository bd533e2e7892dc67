#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace ssmcmc {

/// Splittable random stream keyed by a seed and a path of integer keys.
///
/// A stream is identified by (seed, path) where the path is a sequence of
/// structured keys such as (chain, iteration, time, particle). Child streams
/// are derived from the identity of the parent, not from its current position,
/// so `rng.split(t).split(m)` yields the same draws no matter how many values
/// the parent has already produced. This is what lets particle-level work be
/// reordered or parallelised without changing results.
///
/// The path is folded into a 64-bit key by a SplitMix64-style mixer; the draw
/// engine is xoshiro256++ seeded from that key.
class RngStream {
public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0);

  /// Stream for (seed, path).
  RngStream(std::uint64_t seed, std::span<const std::uint64_t> path);

  /// Child stream whose path is this stream's path followed by `key`.
  [[nodiscard]] RngStream split(std::uint64_t key) const;
  [[nodiscard]] RngStream split(std::uint64_t k1, std::uint64_t k2) const {
    return split(k1).split(k2);
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  /// Folded identity of the path; equal for equal (seed, path).
  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::size_t depth() const noexcept { return depth_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() { return normal_(*this); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape);
  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }
  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);
  /// Index drawn with probability proportional to `probs` (need not sum to 1).
  std::size_t categorical(std::span<const double> probs);

private:
  RngStream(std::uint64_t seed, std::uint64_t key, std::size_t depth);
  void reseed() noexcept;

  std::uint64_t seed_;
  std::uint64_t key_;
  std::size_t depth_;
  std::array<std::uint64_t, 4> state_{};
  std::normal_distribution<double> normal_{};
};

}  // namespace ssmcmc
