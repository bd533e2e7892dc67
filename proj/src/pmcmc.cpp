#include "ssmcmc/pmcmc.hpp"

#include <Eigen/Eigenvalues>

namespace ssmcmc {

RWProposal::RWProposal(double lambda, Eigen::MatrixXd covariance)
    : lambda_(lambda), cov_(std::move(covariance)) {
  if (!(lambda_ > 0.0)) {
    throw std::invalid_argument("RWProposal: lambda must be positive");
  }
  if (cov_.rows() != cov_.cols() || cov_.rows() == 0) {
    throw std::invalid_argument("RWProposal: covariance must be square");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("RWProposal: covariance not positive definite");
  }
  chol_ = llt.matrixL();
}

Eigen::VectorXd RWProposal::propose(const Eigen::VectorXd& theta, RngStream& rng) const {
  Eigen::VectorXd z(theta.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    z[j] = rng.normal();
  }
  return theta + lambda_ * (chol_ * z);
}

Eigen::MatrixXd proposal_covariance(const std::vector<Eigen::VectorXd>& samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("proposal_covariance: need at least 2 samples");
  }
  const auto d = samples.front().size();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
  for (const auto& s : samples) m += s;
  m /= static_cast<double>(samples.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : samples) c += (s - m) * (s - m).transpose();
  c /= static_cast<double>(samples.size() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo > 0.0 && hi / lo <= 1e8) {
    return c;
  }
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    diag(j, j) = c(j, j) > 0.0 ? c(j, j) : 1e-4;
  }
  return diag;
}

// ---------------------------------------------------------------------------

Eigen::Vector3d sv_to_theta(const SvParams& p) {
  const double u = 0.5 + 0.5 * p.phi;
  return {std::log(p.beta), std::log(u / (1.0 - u)), std::log(p.sigma)};
}

SvParams sv_from_theta(const Eigen::VectorXd& theta) {
  const double u = 1.0 / (1.0 + std::exp(-theta[1]));
  return {std::exp(theta[0]), 2.0 * u - 1.0, std::exp(theta[2])};
}

double sv_log_prior_theta(const Eigen::VectorXd& theta, const SvPrior& prior) {
  // log beta: flat. logit u: u^a (1-u)^b. log sigma: (sigma^2)^{-p/2} exp(-S0 / (2 sigma^2)).
  const SvParams p = sv_from_theta(theta);
  if (!std::isfinite(p.beta) || !(p.beta > 0.0) || !(p.sigma > 0.0) || !std::isfinite(p.sigma) ||
      !(std::abs(p.phi) < 1.0)) {
    return -std::numeric_limits<double>::infinity();
  }
  const double eta = theta[1];
  const double log_u = -std::log1p(std::exp(-eta));
  const double log_1mu = -std::log1p(std::exp(eta));
  const double s2 = std::exp(2.0 * theta[2]);
  return prior.a * log_u + prior.b * log_1mu - prior.p * theta[2] - prior.s0 / (2.0 * s2);
}

std::vector<double> sv_report(const Eigen::VectorXd& theta) {
  const SvParams p = sv_from_theta(theta);
  return {p.beta, p.phi, p.sigma};
}

SvParams sv_conditional_theta_step(const SvParams& params, std::span<const double> x,
                                   std::span<const double> y, const SvPrior& prior,
                                   RngStream& rng) {
  SvParams out = params;
  out.beta = std::sqrt(sv_sample_beta2(x, y, rng));
  out.sigma = std::sqrt(sv_sample_sigma2(x, out.phi, prior, rng));
  out.phi = sv_update_phi(x, out.sigma, prior, out.phi, rng).value;
  return out;
}

}  // namespace ssmcmc
