#include "ssmcmc/rng.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace ssmcmc {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fold(std::uint64_t key, std::uint64_t child) noexcept {
  return mix64(key ^ mix64(child + kGolden) ^ 0x6a09e667f3bcc909ULL) + kGolden;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : RngStream(seed, mix64(seed), 0) {}

RngStream::RngStream(std::uint64_t seed, std::span<const std::uint64_t> path)
    : RngStream(seed) {
  for (auto k : path) {
    key_ = fold(key_, k);
  }
  depth_ = path.size();
  reseed();
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t key, std::size_t depth)
    : seed_(seed), key_(key), depth_(depth) {
  reseed();
}

RngStream RngStream::split(std::uint64_t key) const {
  return RngStream(seed_, fold(key_, key), depth_ + 1);
}

void RngStream::reseed() noexcept {
  std::uint64_t s = key_;
  for (auto& word : state_) {
    s += kGolden;
    word = mix64(s);
  }
  normal_.reset();
}

RngStream::result_type RngStream::operator()() noexcept {
  // xoshiro256++
  const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = std::rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() noexcept {
  // 53 random bits, shifted off zero
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::invalid_argument("gamma: shape must be positive");
  }
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(*this);
}

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("uniform_index: empty range");
  }
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(*this);
}

std::size_t RngStream::categorical(std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) {
    total += p;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("categorical: degenerate weights");
  }
  const double u = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      last_positive = i;
      acc += probs[i];
      if (u < acc) {
        return i;
      }
    }
  }
  return last_positive;
}

}  // namespace ssmcmc
