#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ssmcmc/models.hpp"
#include "ssmcmc/rng.hpp"

namespace ssmcmc {

// ---------------------------------------------------------------------------
// SV conditionals. The path is in the default representation (x independent of beta).

/// beta^2 | x, y ~ S / chi^2_n with S = sum y_t^2 exp(-x_t).
double sv_sample_beta2(std::span<const double> x, std::span<const double> y, RngStream& rng);

/// sigma^2 | x, phi ~ {S0 + x_1^2 (1-phi^2) + sum_{t>=2} (x_t - phi x_{t-1})^2} / chi^2_{n+p}.
/// An empty path gives a draw from the prior.
double sv_sample_sigma2(std::span<const double> x, double phi, const SvPrior& prior,
                        RngStream& rng);

/// Scale of the inverse chi-squared conditional above.
double sv_sigma2_scale(std::span<const double> x, double phi, const SvPrior& prior);

/// Gaussian proposal for phi that absorbs the exponential part of its conditional.
struct PhiProposal {
  double mean = 0.0;
  double variance = 1.0;
};
PhiProposal sv_phi_proposal(std::span<const double> x, double sigma);

/// Unnormalised log p(phi | x, sigma) including the Beta prior on (phi+1)/2.
double sv_phi_log_conditional(double phi, std::span<const double> x, double sigma,
                              const SvPrior& prior);

/// log of (1+phi')^{a-1/2}(1-phi')^{b-1/2} / (1+phi)^{a-1/2}(1-phi)^{b-1/2}: the
/// MH ratio left once the proposal cancels the Gaussian factor.
double sv_phi_reduced_log_ratio(double phi_new, double phi_old, const SvPrior& prior);

struct PhiUpdate {
  double value = 0.0;
  bool accepted = false;
  double log_accept_ratio = 0.0;
};

/// Independence MH step for phi. Proposals outside (-1, 1) are rejected.
PhiUpdate sv_update_phi(std::span<const double> x, double sigma, const SvPrior& prior,
                        double phi_current, RngStream& rng);

/// Coefficients of mu | x', y ~ N(b/a, sigma^2/a) in the centred representation.
struct CenteredMuConditional {
  double a = 0.0;
  double b = 0.0;
  [[nodiscard]] double mean() const { return b / a; }
};
CenteredMuConditional sv_mu_conditional(std::span<const double> x_centered, double phi);

/// Draw of mu = 2 log beta given the centred path (flat prior on mu).
double sv_sample_mu_centered(std::span<const double> x_centered, double phi, double sigma,
                             RngStream& rng);

// ---------------------------------------------------------------------------
// Reparameterisations of the SV state

enum class Parameterisation { noncentered_beta, centered_mu, noncentered_beta_sigma };

Parameterisation parse_parameterisation(const std::string& name);
const char* to_string(Parameterisation p);

/// Maps a path between representations. centered_mu: x' = x + 2 log beta;
/// noncentered_beta_sigma: x' = x / sigma. Parameters are unchanged.
RealPath reparam_transform(const SvParams& params, std::span<const double> path,
                           Parameterisation from, Parameterisation to);

/// log p(x', y | theta) written directly in the given representation.
double sv_log_joint_in(Parameterisation kind, std::span<const double> path,
                       std::span<const double> y, const SvParams& params);

// ---------------------------------------------------------------------------
// Discrete HMM conditionals

struct DirichletPrior {
  Eigen::MatrixXd transition;  ///< K x K concentrations, one row per P_k
  Eigen::MatrixXd emission;    ///< K x S concentrations

  void validate() const;
  static DirichletPrior uniform(int k, int s, double value = 1.0);
};

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng);

/// Transition counts c_ij = #{t : x_t = i, x_{t+1} = j}.
Eigen::MatrixXd transition_counts(std::span<const int> x, int k);
/// Emission counts e_ks = #{t : x_t = k, y_t = s}.
Eigen::MatrixXd emission_counts(std::span<const int> x, std::span<const int> y, int k, int s);

/// Draws P and the emission rows from their Dirichlet conditionals. The law
/// of X_1 is held fixed at `initial`, so the rows are conditionally independent.
HmmParams hmm_sample_conditionals(std::span<const int> x, std::span<const int> y,
                                  const DirichletPrior& prior, const Eigen::VectorXd& initial,
                                  RngStream& rng);

// ---------------------------------------------------------------------------
// Joint theta-path update

template <class Theta, class Path>
struct JointUpdate {
  Theta theta;
  Path path;
  bool accepted = false;
  double log_accept_ratio = 0.0;
};

/// Proposes theta' ~ q(.|theta) then a path from p(x | theta', y) and accepts
/// with the marginal MH ratio, which does not involve either path.
///
/// `proposal` provides `Theta propose(const Theta&, RngStream&)` and
/// `double log_density(const Theta& to, const Theta& from)`. `log_post` is
/// log p(theta) + log p(y | theta). `path_sampler(theta, rng)` draws an exact path.
/// The path draw uses its own stream so the theta transcript matches a plain
/// MH chain on p(theta | y) run on `theta_rng`.
template <class Theta, class Path, class Proposal, class LogPost, class PathSampler>
JointUpdate<Theta, Path> joint_update(const Theta& theta, const Path& path,
                                      const Proposal& proposal, const LogPost& log_post,
                                      const PathSampler& path_sampler, RngStream& theta_rng,
                                      RngStream& path_rng) {
  JointUpdate<Theta, Path> out{theta, path, false, 0.0};
  Theta candidate = proposal.propose(theta, theta_rng);
  out.log_accept_ratio = log_post(candidate) - log_post(theta) +
                         proposal.log_density(theta, candidate) -
                         proposal.log_density(candidate, theta);
  if (std::isnan(out.log_accept_ratio)) {
    out.log_accept_ratio = -std::numeric_limits<double>::infinity();
  }
  // A candidate outside the support is never accepted, so no path is drawn for it.
  std::optional<Path> fresh;
  if (out.log_accept_ratio > -std::numeric_limits<double>::infinity()) {
    fresh = path_sampler(candidate, path_rng);
  }
  out.accepted = std::log(theta_rng.uniform()) < out.log_accept_ratio;
  if (out.accepted) {
    out.theta = std::move(candidate);
    out.path = std::move(*fresh);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bayesian fraction of missing information

struct GammaEstimate {
  double gamma = 0.0;
  double marginal_var = 0.0;
  double mean_conditional_var = 0.0;
  std::size_t retained = 0;
};

namespace detail {
double sample_variance(std::span<const double> v);
GammaEstimate finish_gamma(std::span<const double> f_values, std::span<const double> cond_vars);
}  // namespace detail

/// gamma_f = 1 - E[Var(f(theta) | x, y) | y] / Var(f(theta) | y).
///
/// `f_values` holds f(theta) along the chain and `paths` the matching paths.
/// Every `thin`-th path is kept and `draw_f(path, rng)` is called `repeats`
/// times on it to estimate the conditional variance. Result clamped to [0, 1].
template <class Path, class DrawF>
GammaEstimate estimate_gamma_f(std::span<const double> f_values, std::span<const Path> paths,
                               const DrawF& draw_f, std::size_t repeats, RngStream& rng,
                               std::size_t thin = 10) {
  if (f_values.size() != paths.size()) {
    throw std::invalid_argument("estimate_gamma_f: length mismatch");
  }
  if (f_values.size() < 100) {
    throw std::invalid_argument("estimate_gamma_f: chain shorter than 100");
  }
  if (repeats < 2) {
    throw std::invalid_argument("estimate_gamma_f: need at least 2 repeats");
  }
  thin = std::max<std::size_t>(thin, 1);
  std::vector<double> cond_vars;
  std::vector<double> draws(repeats);
  for (std::size_t i = 0; i < paths.size(); i += thin) {
    RngStream local = rng.split(i);
    for (std::size_t r = 0; r < repeats; ++r) {
      draws[r] = draw_f(paths[i], local);
    }
    cond_vars.push_back(detail::sample_variance(draws));
  }
  return detail::finish_gamma(f_values, cond_vars);
}

}  // namespace ssmcmc
