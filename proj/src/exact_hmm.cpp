#include "ssmcmc/exact_hmm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ssmcmc/weights.hpp"

namespace ssmcmc {

double FilterBank::log_likelihood() const {
  double total = 0.0;
  for (double v : log_increments) {
    total += v;
  }
  return total;
}

FilterBank forward_filter(const HmmParams& hmm, std::span<const int> y) {
  if (y.empty()) {
    throw std::invalid_argument("forward_filter: empty observation sequence");
  }
  const int k = hmm.num_states();
  const auto n = static_cast<Eigen::Index>(y.size());
  FilterBank fb;
  fb.filt.resize(n, k);
  fb.log_increments.resize(y.size());

  Eigen::VectorXd pred = hmm.initial;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (t > 0) {
      pred = hmm.transition.transpose() * fb.filt.row(t - 1).transpose();
    }
    Eigen::VectorXd a = pred.cwiseProduct(hmm.emission.col(y[t]));
    const double c = a.sum();
    if (!(c > 0.0)) {
      throw std::domain_error("forward_filter: impossible observation at t=" + std::to_string(t));
    }
    fb.filt.row(t) = (a / c).transpose();
    fb.log_increments[t] = std::log(c);
  }
  return fb;
}

double brute_force_loglik(const HmmParams& hmm, std::span<const int> y) {
  const int k = hmm.num_states();
  const std::size_t n = y.size();
  if (n == 0) {
    throw std::invalid_argument("brute_force_loglik: empty observation sequence");
  }
  double count = 1.0;
  for (std::size_t t = 0; t < n; ++t) {
    count *= k;
    if (count > 1e7) {
      throw std::invalid_argument("brute_force_loglik: instance too large");
    }
  }
  const auto total = static_cast<std::size_t>(count);
  std::vector<double> terms;
  terms.reserve(total);
  StatePath path(n, 0);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t t = 0; t < n; ++t) {
      path[t] = static_cast<int>(c % k);
      c /= k;
    }
    terms.push_back(hmm_log_joint(path, y, hmm));
  }
  return log_sum_exp(terms);
}

StatePath backward_sample(const FilterBank& fb, const HmmParams& hmm, RngStream& rng) {
  const auto n = static_cast<Eigen::Index>(fb.length());
  const int k = hmm.num_states();
  StatePath path(n);
  std::vector<double> probs(k);
  for (int j = 0; j < k; ++j) {
    probs[j] = fb.filt(n - 1, j);
  }
  path[n - 1] = static_cast<int>(rng.categorical(probs));
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const int next = path[t + 1];
    for (int l = 0; l < k; ++l) {
      probs[l] = fb.filt(t, l) * hmm.transition(l, next);
    }
    path[t] = static_cast<int>(rng.categorical(probs));
  }
  return path;
}

double backward_path_logprob(const FilterBank& fb, const HmmParams& hmm,
                             std::span<const int> path) {
  const auto n = static_cast<Eigen::Index>(fb.length());
  if (static_cast<Eigen::Index>(path.size()) != n) {
    throw std::invalid_argument("backward_path_logprob: length mismatch");
  }
  double lp = std::log(fb.filt(n - 1, path[n - 1]));
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    const int next = path[t + 1];
    const double norm = fb.filt.row(t).dot(hmm.transition.col(next));
    lp += std::log(fb.filt(t, path[t]) * hmm.transition(path[t], next) / norm);
  }
  return lp;
}

Eigen::MatrixXd smoothing_marginals(const HmmParams& hmm, std::span<const int> y) {
  const FilterBank fb = forward_filter(hmm, y);
  const auto n = static_cast<Eigen::Index>(y.size());
  const int k = hmm.num_states();
  Eigen::MatrixXd out(n, k);
  Eigen::VectorXd beta = Eigen::VectorXd::Ones(k);
  out.row(n - 1) = fb.filt.row(n - 1);
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const Eigen::VectorXd weighted = hmm.emission.col(y[t + 1]).cwiseProduct(beta);
    beta = hmm.transition * weighted / std::exp(fb.log_increments[t + 1]);
    Eigen::VectorXd s = fb.filt.row(t).transpose().cwiseProduct(beta);
    out.row(t) = (s / s.sum()).transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------

FixedThetaPathSampler::FixedThetaPathSampler(HmmParams theta_hat, std::span<const int> y)
    : theta_hat_(std::move(theta_hat)), fb_(forward_filter(theta_hat_, y)) {
  cache_predictive();
}

FixedThetaPathSampler::FixedThetaPathSampler(HmmParams theta_hat, FilterBank fb_hat)
    : theta_hat_(std::move(theta_hat)), fb_(std::move(fb_hat)) {
  cache_predictive();
}

void FixedThetaPathSampler::cache_predictive() {
  const auto n = static_cast<Eigen::Index>(fb_.length());
  const int k = theta_hat_.num_states();
  log_predictive_.resize(n > 0 ? n - 1 : 0, k);
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    log_predictive_.row(t) = (fb_.filt.row(t) * theta_hat_.transition).array().log();
  }
}

StatePath FixedThetaPathSampler::propose(RngStream& rng) const {
  return backward_sample(fb_, theta_hat_, rng);
}

double FixedThetaPathSampler::proposal_logprob(std::span<const int> path) const {
  const auto n = static_cast<Eigen::Index>(fb_.length());
  if (static_cast<Eigen::Index>(path.size()) != n) {
    throw std::invalid_argument("proposal_logprob: length mismatch");
  }
  double lp = std::log(fb_.filt(n - 1, path[n - 1]));
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    const int next = path[t + 1];
    lp += std::log(fb_.filt(t, path[t])) + std::log(theta_hat_.transition(path[t], next)) -
          log_predictive_(t, next);
  }
  return lp;
}

PathUpdate FixedThetaPathSampler::update(std::span<const int> current, const HmmParams& theta,
                                         std::span<const int> y, RngStream& rng) const {
  PathUpdate out;
  StatePath proposal = propose(rng);
  const double log_target_new = hmm_log_joint(proposal, y, theta);
  const double log_target_old = hmm_log_joint(current, y, theta);
  out.log_accept_ratio = (log_target_new - log_target_old) +
                         (proposal_logprob(current) - proposal_logprob(proposal));
  if (std::isnan(out.log_accept_ratio)) {
    out.log_accept_ratio = -std::numeric_limits<double>::infinity();
  }
  out.accepted = std::log(rng.uniform()) < out.log_accept_ratio;
  if (out.accepted) {
    out.path = std::move(proposal);
  } else {
    out.path.assign(current.begin(), current.end());
  }
  return out;
}

PathUpdate fb_independence_update(std::span<const int> current, const HmmParams& theta,
                                  const HmmParams& theta_hat, const FilterBank& fb_hat,
                                  std::span<const int> y, RngStream& rng) {
  const FixedThetaPathSampler sampler(theta_hat, fb_hat);
  return sampler.update(current, theta, y, rng);
}

}  // namespace ssmcmc
