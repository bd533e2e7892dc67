#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ssmcmc/models.hpp"
#include "ssmcmc/rng.hpp"

namespace ssmcmc {

/// Normalised filtering densities plus per-step log normalisers.
///
/// filt(t, k) = Pr(X_t = k | y_{1:t}); log_increments[t] = log p(y_t | y_{1:t-1}).
struct FilterBank {
  Eigen::MatrixXd filt;  ///< n x K
  std::vector<double> log_increments;

  [[nodiscard]] std::size_t length() const { return log_increments.size(); }
  [[nodiscard]] double log_likelihood() const;
};

/// Forward recursion, O(nK^2). Throws "impossible observation" when some y_t
/// has zero probability under every reachable state.
FilterBank forward_filter(const HmmParams& hmm, std::span<const int> y);

/// Exact log-likelihood by summing the joint over all K^n paths.
/// Intended as a test oracle; refuses instances with K^n > 1e7.
double brute_force_loglik(const HmmParams& hmm, std::span<const int> y);

/// Exact draw from p(x_{1:n} | y_{1:n}) by backward simulation, O(nK).
StatePath backward_sample(const FilterBank& fb, const HmmParams& hmm, RngStream& rng);

/// log p(x_{1:n} | y_{1:n}) evaluated through the backward kernels of `fb`.
double backward_path_logprob(const FilterBank& fb, const HmmParams& hmm,
                             std::span<const int> path);

/// Smoothing marginals Pr(X_t = k | y_{1:n}) (n x K) from a forward-backward pass.
Eigen::MatrixXd smoothing_marginals(const HmmParams& hmm, std::span<const int> y);

struct PathUpdate {
  StatePath path;
  bool accepted = false;
  double log_accept_ratio = 0.0;
};

/// Independence sampler that proposes whole paths from p(x | y, theta_hat).
///
/// The forward pass at theta_hat is run once at construction; the backward
/// kernel normalisers are cached so each proposal costs O(nK).
class FixedThetaPathSampler {
public:
  FixedThetaPathSampler(HmmParams theta_hat, std::span<const int> y);
  FixedThetaPathSampler(HmmParams theta_hat, FilterBank fb_hat);

  /// MH step targeting p(x | y, theta) with proposal p(x | y, theta_hat).
  PathUpdate update(std::span<const int> current, const HmmParams& theta, std::span<const int> y,
                    RngStream& rng) const;

  [[nodiscard]] StatePath propose(RngStream& rng) const;
  [[nodiscard]] double proposal_logprob(std::span<const int> path) const;
  [[nodiscard]] const FilterBank& filter_bank() const { return fb_; }

private:
  void cache_predictive();

  HmmParams theta_hat_;
  FilterBank fb_;
  Eigen::MatrixXd log_predictive_;  ///< (n-1) x K: log sum_l filt(t,l) P(l,k)
};

/// One-off form of FixedThetaPathSampler::update.
PathUpdate fb_independence_update(std::span<const int> current, const HmmParams& theta,
                                  const HmmParams& theta_hat, const FilterBank& fb_hat,
                                  std::span<const int> y, RngStream& rng);

}  // namespace ssmcmc
