#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ssmcmc/diagnostics.hpp"
#include "ssmcmc/models.hpp"
#include "ssmcmc/param_updates.hpp"
#include "ssmcmc/rng.hpp"
#include "ssmcmc/smc.hpp"

namespace ssmcmc {

/// Gaussian random walk theta' ~ N(theta, lambda^2 V).
class RWProposal {
public:
  RWProposal(double lambda, Eigen::MatrixXd covariance);

  [[nodiscard]] Eigen::VectorXd propose(const Eigen::VectorXd& theta, RngStream& rng) const;
  /// Symmetric, so the constant is dropped.
  [[nodiscard]] double log_density(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
    return 0.0;
  }
  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] const Eigen::MatrixXd& covariance() const { return cov_; }

private:
  double lambda_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
};

/// Sample covariance of pilot draws for use as V in RWProposal.
/// Falls back to the diagonal when the estimate is not positive definite or
/// its condition number exceeds 1e8.
Eigen::MatrixXd proposal_covariance(const std::vector<Eigen::VectorXd>& samples);

struct ChainOptions {
  std::size_t iterations = 1000;
  std::size_t burn_in = std::numeric_limits<std::size_t>::max();  ///< max = 10% default
  bool store_paths = true;
  std::size_t path_stride = 1;
  std::vector<std::string> names;
};

struct ChainState {
  Eigen::VectorXd theta;
  double log_post_hat = 0.0;
  std::vector<double> path;
};

namespace detail {

inline constexpr std::uint64_t kInit = 0xffff'ffffULL;

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

inline std::vector<double> strided(const std::vector<double>& path, std::size_t stride) {
  std::vector<double> out;
  for (std::size_t t = 0; t < path.size(); t += stride) out.push_back(path[t]);
  return out;
}

inline void start_trace(ChainTrace& trace, const ChainOptions& opt, const RngStream& rng,
                        const Eigen::VectorXd& init) {
  trace.names = opt.names;
  if (trace.names.empty()) {
    for (Eigen::Index j = 0; j < init.size(); ++j) {
      trace.names.push_back("theta" + std::to_string(j + 1));
    }
  }
  trace.meta.seed = rng.seed();
  trace.meta.burn_in =
      opt.burn_in == std::numeric_limits<std::size_t>::max() ? default_burn_in(opt.iterations)
                                                             : opt.burn_in;
  trace.path_stride = opt.path_stride;
}

/// Shared MH loop. `estimate(theta, rng, path_rng, path_out)` returns a log
/// likelihood estimate and may fill a path. Iteration i uses rng.split(i):
/// split(0) proposal, split(1) estimator, split(2) accept, split(3) path choice.
template <class Proposal, class LogPrior, class Estimate, class Report>
ChainTrace mh_loop(const LogPrior& log_prior, const Proposal& proposal, const Estimate& estimate,
                   const Eigen::VectorXd& init, const RngStream& rng, const ChainOptions& opt,
                   const Report& report, bool want_path) {
  if (opt.iterations < 1) {
    throw std::invalid_argument("mcmc: iterations must be >= 1");
  }
  ChainTrace trace;
  start_trace(trace, opt, rng, init);
  ChainState cur;
  cur.theta = init;
  {
    RngStream r_est = rng.split(kInit, 1);
    RngStream r_path = rng.split(kInit, 3);
    cur.log_post_hat = log_prior(init) + estimate(init, r_est, r_path, want_path ? &cur.path : nullptr);
  }
  if (!std::isfinite(cur.log_post_hat)) {
    throw std::domain_error("mcmc: non-finite initial log posterior estimate");
  }
  trace.theta.reserve(opt.iterations);
  for (std::size_t i = 0; i < opt.iterations; ++i) {
    const RngStream it = rng.split(i);
    RngStream r_prop = it.split(0);
    Eigen::VectorXd cand = proposal.propose(cur.theta, r_prop);
    const double lp_prior = log_prior(cand);
    double log_post = -std::numeric_limits<double>::infinity();
    std::vector<double> cand_path;
    if (lp_prior > -std::numeric_limits<double>::infinity()) {
      RngStream r_est = it.split(1);
      RngStream r_path = it.split(3);
      log_post = lp_prior + estimate(cand, r_est, r_path, want_path ? &cand_path : nullptr);
    }
    double log_ratio = log_post - cur.log_post_hat + proposal.log_density(cur.theta, cand) -
                       proposal.log_density(cand, cur.theta);
    if (std::isnan(log_ratio)) {
      log_ratio = -std::numeric_limits<double>::infinity();
    }
    RngStream r_acc = it.split(2);
    const bool accept = std::log(r_acc.uniform()) < log_ratio;
    if (accept) {
      cur.theta = std::move(cand);
      cur.log_post_hat = log_post;
      if (want_path) cur.path = std::move(cand_path);
    }
    trace.append(report(cur.theta), cur.log_post_hat, accept);
    if (want_path && opt.store_paths) {
      trace.paths.push_back(strided(cur.path, opt.path_stride));
    }
  }
  return trace;
}

}  // namespace detail

/// Pseudo-marginal MH: `log_lik_hat(theta, rng)` returns the log of a
/// non-negative unbiased likelihood estimate. On rejection the previous
/// estimate is carried forward. `report` maps theta to the recorded values.
template <class Proposal, class LogPrior, class LikEstimator, class Report>
ChainTrace pseudo_marginal_mh(const LogPrior& log_prior, const Proposal& proposal,
                              const LikEstimator& log_lik_hat, const Eigen::VectorXd& init,
                              const RngStream& rng, const ChainOptions& opt,
                              const Report& report) {
  auto est = [&](const Eigen::VectorXd& th, RngStream& r, RngStream&, std::vector<double>*) {
    return log_lik_hat(th, r);
  };
  return detail::mh_loop(log_prior, proposal, est, init, rng, opt, report, false);
}

/// Standard MH on pi(theta) p(y | theta) with an exact log-likelihood. Uses the
/// same stream layout as pseudo_marginal_mh.
template <class Proposal, class LogPrior, class LogLik, class Report>
ChainTrace exact_marginal_mh(const LogPrior& log_prior, const Proposal& proposal,
                             const LogLik& log_lik, const Eigen::VectorXd& init,
                             const RngStream& rng, const ChainOptions& opt, const Report& report) {
  auto est = [&](const Eigen::VectorXd& th, RngStream&) { return log_lik(th); };
  return pseudo_marginal_mh(log_prior, proposal, est, init, rng, opt, report);
}

/// PMMH: a bootstrap filter of make_model(theta) supplies the likelihood
/// estimate, and a path drawn from it is kept only when the move is accepted.
template <class Proposal, class LogPrior, class MakeModel, class Obs, class Report>
ChainTrace pmmh(const LogPrior& log_prior, const Proposal& proposal, const MakeModel& make_model,
                std::span<const Obs> y, std::size_t M, const Eigen::VectorXd& init,
                const RngStream& rng, const ChainOptions& opt, const Report& report) {
  auto est = [&](const Eigen::VectorXd& th, RngStream& r, RngStream& r_path,
                 std::vector<double>* path_out) {
    const auto model = make_model(th);
    const auto ps = bootstrap_filter(model, y, M, r);
    if (path_out) {
      const auto chosen = sample_backward_path(ps, r_path).second;
      path_out->assign(chosen.begin(), chosen.end());
    }
    return ps.log_lik_hat;
  };
  return detail::mh_loop(log_prior, proposal, est, init, rng, opt, report, true);
}

/// Particle Gibbs: theta_step(theta, path, rng) draws theta | x, y, then a
/// conditional SMC sweep and path selection give the new path, which is
/// always accepted. Iteration i uses rng.split(i): split(0) theta, split(1)
/// cSMC, split(2) path choice. `log_post` records the cSMC estimate.
template <class Theta, class State, class ThetaStep, class MakeModel, class Obs, class Report>
ChainTrace particle_gibbs(const ThetaStep& theta_step, const MakeModel& make_model,
                          std::span<const Obs> y, std::size_t M, Theta theta,
                          std::vector<State> path,
                          const RngStream& rng, bool ancestor_sampling, const ChainOptions& opt,
                          const Report& report) {
  if (opt.iterations < 1) {
    throw std::invalid_argument("mcmc: iterations must be >= 1");
  }
  if (path.size() != y.size()) {
    throw std::invalid_argument("particle_gibbs: initial path length differs from data");
  }
  ChainTrace trace;
  trace.names = opt.names;
  trace.meta.seed = rng.seed();
  trace.meta.burn_in =
      opt.burn_in == std::numeric_limits<std::size_t>::max() ? default_burn_in(opt.iterations)
                                                             : opt.burn_in;
  trace.path_stride = opt.path_stride;
  for (std::size_t i = 0; i < opt.iterations; ++i) {
    const RngStream it = rng.split(i);
    RngStream r_theta = it.split(0);
    theta = theta_step(theta, path, r_theta);
    const auto model = make_model(theta);
    const auto ps = conditional_smc(model, y, M, path, it.split(1), ancestor_sampling);
    RngStream r_sel = it.split(2);
    path = csmc_select_path(ps, r_sel);
    trace.append(report(theta), ps.log_lik_hat, true);
    if (opt.store_paths) {
      std::vector<double> as_double(path.begin(), path.end());
      trace.paths.push_back(detail::strided(as_double, opt.path_stride));
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// SV inference on theta = (log beta, logit((1+phi)/2), log sigma)

Eigen::Vector3d sv_to_theta(const SvParams& p);
SvParams sv_from_theta(const Eigen::VectorXd& theta);
/// Log prior density of the transformed theta including Jacobians.
double sv_log_prior_theta(const Eigen::VectorXd& theta, const SvPrior& prior);
/// (beta, phi, sigma) for the trace.
std::vector<double> sv_report(const Eigen::VectorXd& theta);

/// beta^2, then sigma^2 given phi, then phi given sigma.
SvParams sv_conditional_theta_step(const SvParams& params, std::span<const double> x,
                                   std::span<const double> y, const SvPrior& prior,
                                   RngStream& rng);

/// Named SV experiment preset.
struct SvPreset {
  std::size_t T = 400;
  SvParams truth{1.0, 0.98, 0.2};
  SvPrior prior{1.0, 1.0, 0.2, 5.0};
  double lambda = 1.3;
};

}  // namespace ssmcmc
