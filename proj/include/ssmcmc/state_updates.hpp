#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ssmcmc/models.hpp"
#include "ssmcmc/rng.hpp"

namespace ssmcmc {

// ---------------------------------------------------------------------------
// Discrete HMM: single-site Gibbs

/// Normalised full conditional of X_t given X_{t-1}, X_{t+1} and y_t. O(K).
std::vector<double> hmm_full_conditional(std::size_t t, std::span<const int> path,
                                         std::span<const int> y, const HmmParams& hmm);

/// One Gibbs sweep t = 0..n-1 over the path.
StatePath hmm_single_site_sweep(StatePath path, std::span<const int> y, const HmmParams& hmm,
                                RngStream& rng);

// ---------------------------------------------------------------------------
// SV: single-site independence sampler

struct GaussianProposal {
  double mean = 0.0;
  double variance = 1.0;

  [[nodiscard]] double log_density(double x) const;
  [[nodiscard]] double precision() const { return 1.0 / variance; }
};

/// Normal approximation to p(x_t | x_{t-1}, x_{t+1}, y_t) from a second-order
/// expansion of the emission term about the prior conditional mean.
GaussianProposal sv_single_site_proposal(std::size_t t, std::span<const double> x,
                                         std::span<const double> y, const SvParams& params);

/// Unnormalised log p(x_t = value | x_{t-1}, x_{t+1}, y_t).
double sv_single_site_log_target(std::size_t t, double value, std::span<const double> x,
                                 std::span<const double> y, const SvParams& params);

struct SiteUpdate {
  double value = 0.0;
  bool accepted = false;
  double log_accept_ratio = 0.0;
};

SiteUpdate sv_single_site_update(std::size_t t, std::span<const double> x,
                                 std::span<const double> y, const SvParams& params,
                                 RngStream& rng);

/// Updates every x_t in turn; returns the number of accepted moves.
std::size_t sv_single_site_sweep(RealPath& x, std::span<const double> y, const SvParams& params,
                                 RngStream& rng);

// ---------------------------------------------------------------------------
// Block independence sampler for AR(1) latent states

/// Second-order expansion of log p(y_j | x_j) about a point.
struct EmissionExpansion {
  double gradient = 0.0;
  double hessian = 0.0;
};

/// Emission of the SV model, N(0, beta^2 e^x).
struct SvEmission {
  std::span<const double> y;
  double beta = 1.0;

  [[nodiscard]] double log_density(std::size_t j, double x) const;
  [[nodiscard]] EmissionExpansion expand(std::size_t j, double x_hat) const;
};

/// y_j ~ N(x_j, noise_var). The expansion is exact, which makes block
/// proposals exact conditionals; used to check the block machinery.
struct GaussianEmission {
  std::span<const double> y;
  double noise_var = 1.0;

  [[nodiscard]] double log_density(std::size_t j, double x) const;
  [[nodiscard]] EmissionExpansion expand(std::size_t j, double x_hat) const;
};

/// x_1 ~ N(0, sigma^2/(1-phi^2)), x_t | x_{t-1} ~ N(phi x_{t-1}, sigma^2).
struct ArDynamics {
  double phi = 0.9;
  double sigma = 0.2;

  [[nodiscard]] double log_initial(double x) const;
  [[nodiscard]] double log_transition(double prev, double x) const;
};

/// Gaussian approximation to p(x_{t:s} | x_{t-1}, x_{s+1}, y_{t:s}) stored in
/// backward-sampling form: x_j = offset_j + slope_j x_{j+1} + sqrt(cond_var_j) z.
/// The right end uses the fixed neighbour x_{s+1} when it exists.
struct GaussianBlockProposal {
  std::size_t first = 0;
  std::size_t last = 0;
  std::vector<double> offset;
  std::vector<double> slope;
  std::vector<double> cond_var;
  std::vector<double> mean;          ///< marginal means
  std::vector<double> marginal_var;  ///< marginal variances
  std::size_t dropped_terms = 0;     ///< non-concave emission expansions skipped

  [[nodiscard]] std::size_t size() const { return last - first + 1; }
  [[nodiscard]] std::vector<double> sample(RngStream& rng) const;
  [[nodiscard]] double log_density(std::span<const double> block) const;
};

namespace detail {

struct InfoFactor {
  double h = 0.0;  // linear coefficient
  double j = 0.0;  // precision contribution
};

GaussianBlockProposal build_block(std::size_t first, std::size_t last, std::span<const double> x,
                                  const ArDynamics& dyn, std::span<const InfoFactor> factors);

}  // namespace detail

/// Block proposal for x_{first..last} (0-based, inclusive). The expansion point
/// starts at the AR bridge mean and is refined `refine_iters` times to the
/// mean of the previous approximation. Cost O(last - first).
template <class Emission>
GaussianBlockProposal gaussian_block_proposal(std::size_t first, std::size_t last,
                                              std::span<const double> x, const ArDynamics& dyn,
                                              const Emission& emission, int refine_iters) {
  if (first > last || last >= x.size()) {
    throw std::invalid_argument("block proposal: need first <= last < n");
  }
  if (refine_iters < 0) {
    throw std::invalid_argument("block proposal: refine_iters must be non-negative");
  }
  const std::size_t len = last - first + 1;
  std::vector<detail::InfoFactor> factors(len);
  GaussianBlockProposal q = detail::build_block(first, last, x, dyn, factors);
  std::vector<double> x_hat = q.mean;
  for (int iter = 0; iter <= refine_iters; ++iter) {
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < len; ++i) {
      const EmissionExpansion e = emission.expand(first + i, x_hat[i]);
      const double prec = -e.hessian;
      if (prec < 0.0 || !std::isfinite(prec) || !std::isfinite(e.gradient)) {
        factors[i] = {};
        ++dropped;
      } else {
        factors[i] = {e.gradient + prec * x_hat[i], prec};
      }
    }
    q = detail::build_block(first, last, x, dyn, factors);
    q.dropped_terms = dropped;
    x_hat = q.mean;
  }
  return q;
}

/// Unnormalised log p(x_{t:s} | x_{t-1}, x_{s+1}, y_{t:s}) for a candidate block.
template <class Emission>
double block_log_target(std::size_t first, std::span<const double> block,
                        std::span<const double> x, const ArDynamics& dyn,
                        const Emission& emission) {
  const std::size_t last = first + block.size() - 1;
  double lp = first == 0 ? dyn.log_initial(block[0]) : dyn.log_transition(x[first - 1], block[0]);
  for (std::size_t i = 1; i < block.size(); ++i) {
    lp += dyn.log_transition(block[i - 1], block[i]);
  }
  if (last + 1 < x.size()) {
    lp += dyn.log_transition(block.back(), x[last + 1]);
  }
  for (std::size_t i = 0; i < block.size(); ++i) {
    lp += emission.log_density(first + i, block[i]);
  }
  return lp;
}

struct BlockUpdate {
  std::vector<double> block;
  bool accepted = false;
  double log_accept_ratio = 0.0;

  [[nodiscard]] double accept_probability() const {
    return log_accept_ratio >= 0.0 ? 1.0 : std::exp(log_accept_ratio);
  }
};

/// Independence MH update of x_{first..last}; `x` is not modified.
template <class Emission>
BlockUpdate gaussian_block_update(std::size_t first, std::size_t last, std::span<const double> x,
                                  const ArDynamics& dyn, const Emission& emission,
                                  int refine_iters, RngStream& rng) {
  const GaussianBlockProposal q =
      gaussian_block_proposal(first, last, x, dyn, emission, refine_iters);
  BlockUpdate out;
  std::vector<double> proposal = q.sample(rng);
  const std::span<const double> current = x.subspan(first, q.size());
  out.log_accept_ratio =
      (block_log_target(first, proposal, x, dyn, emission) - q.log_density(proposal)) -
      (block_log_target(first, current, x, dyn, emission) - q.log_density(current));
  if (std::isnan(out.log_accept_ratio)) {
    out.log_accept_ratio = -std::numeric_limits<double>::infinity();
  }
  out.accepted = std::log(rng.uniform()) < out.log_accept_ratio;
  if (out.accepted) {
    out.block = std::move(proposal);
  } else {
    out.block.assign(current.begin(), current.end());
  }
  return out;
}

GaussianBlockProposal sv_block_proposal(std::size_t first, std::size_t last,
                                        std::span<const double> x, std::span<const double> y,
                                        const SvParams& params, int refine_iters = 2);

BlockUpdate sv_block_update(std::size_t first, std::size_t last, std::span<const double> x,
                            std::span<const double> y, const SvParams& params, int refine_iters,
                            RngStream& rng);

// ---------------------------------------------------------------------------
// Block schedules

enum class BlockScheme { fixed, random, overlapping };

BlockScheme parse_block_scheme(const std::string& name);
const char* to_string(BlockScheme scheme);

/// 0-based inclusive (first, last) pairs covering 0..n-1.
struct BlockSchedule {
  std::vector<std::pair<std::size_t, std::size_t>> intervals;
  BlockScheme scheme = BlockScheme::fixed;
};

/// fixed: consecutive disjoint blocks; random: the same with a uniformly
/// random offset of the first boundary; overlapping: length-`size` blocks
/// starting every size/2 indices.
BlockSchedule block_schedule(std::size_t n, BlockScheme scheme, std::size_t size, RngStream& rng);

struct SweepStats {
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  double sum_accept_prob = 0.0;
};

/// Applies sv_block_update to every interval of the schedule in order.
SweepStats sv_block_sweep(RealPath& x, std::span<const double> y, const SvParams& params,
                          const BlockSchedule& schedule, int refine_iters, RngStream& rng);

}  // namespace ssmcmc
