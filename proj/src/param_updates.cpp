#include "ssmcmc/param_updates.hpp"

namespace ssmcmc {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double log_normal(double x, double mean, double var) {
  const double d = x - mean;
  return -kHalfLog2Pi - 0.5 * std::log(var) - 0.5 * d * d / var;
}

}  // namespace

double sv_sample_beta2(std::span<const double> x, std::span<const double> y, RngStream& rng) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("sv_sample_beta2: need equal non-empty x and y");
  }
  double s = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    s += y[t] * y[t] * std::exp(-x[t]);
  }
  if (!(s > 0.0)) {
    throw std::domain_error("sv_sample_beta2: degenerate sufficient statistic");
  }
  return s / rng.chi_squared(static_cast<double>(x.size()));
}

double sv_sigma2_scale(std::span<const double> x, double phi, const SvPrior& prior) {
  double scale = prior.s0;
  if (!x.empty()) {
    scale += x[0] * x[0] * (1.0 - phi * phi);
  }
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double r = x[t] - phi * x[t - 1];
    scale += r * r;
  }
  return scale;
}

double sv_sample_sigma2(std::span<const double> x, double phi, const SvPrior& prior,
                        RngStream& rng) {
  if (!(std::abs(phi) < 1.0)) {
    throw std::invalid_argument("sv_sample_sigma2: |phi| must be < 1");
  }
  const double df = static_cast<double>(x.size()) + prior.p;
  return sv_sigma2_scale(x, phi, prior) / rng.chi_squared(df);
}

PhiProposal sv_phi_proposal(std::span<const double> x, double sigma) {
  const std::size_t n = x.size();
  double cross = 0.0;
  double inner = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    cross += x[t] * x[t - 1];
  }
  for (std::size_t t = 1; t + 1 < n; ++t) {
    inner += x[t] * x[t];
  }
  if (!(inner > 0.0)) {
    throw std::domain_error("sv_update_phi: degenerate proposal");
  }
  return {cross / inner, sigma * sigma / inner};
}

double sv_phi_log_conditional(double phi, std::span<const double> x, double sigma,
                              const SvPrior& prior) {
  if (!(std::abs(phi) < 1.0)) {
    return -std::numeric_limits<double>::infinity();
  }
  SvParams params{1.0, phi, sigma};
  double lp = (prior.a - 1.0) * std::log1p(phi) + (prior.b - 1.0) * std::log1p(-phi);
  lp += sv_initial_logdensity(x[0], params);
  for (std::size_t t = 1; t < x.size(); ++t) {
    lp += sv_transition_logdensity(x[t - 1], x[t], params);
  }
  return lp;
}

double sv_phi_reduced_log_ratio(double phi_new, double phi_old, const SvPrior& prior) {
  auto term = [&](double phi) {
    return (prior.a - 0.5) * std::log1p(phi) + (prior.b - 0.5) * std::log1p(-phi);
  };
  return term(phi_new) - term(phi_old);
}

PhiUpdate sv_update_phi(std::span<const double> x, double sigma, const SvPrior& prior,
                        double phi_current, RngStream& rng) {
  if (!(std::abs(phi_current) < 1.0)) {
    throw std::invalid_argument("sv_update_phi: |phi| must be < 1");
  }
  const PhiProposal q = sv_phi_proposal(x, sigma);
  const double candidate = rng.normal(q.mean, std::sqrt(q.variance));
  PhiUpdate out{phi_current, false, -std::numeric_limits<double>::infinity()};
  if (std::abs(candidate) >= 1.0) {
    return out;
  }
  out.log_accept_ratio = sv_phi_reduced_log_ratio(candidate, phi_current, prior);
  out.accepted = std::log(rng.uniform()) < out.log_accept_ratio;
  if (out.accepted) {
    out.value = candidate;
  }
  return out;
}

CenteredMuConditional sv_mu_conditional(std::span<const double> x_centered, double phi) {
  const std::size_t n = x_centered.size();
  if (n == 0) {
    throw std::invalid_argument("sv_mu_conditional: empty path");
  }
  CenteredMuConditional c;
  c.a = static_cast<double>(n - 1) * (1.0 - phi) * (1.0 - phi) + (1.0 - phi * phi);
  double resid = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    resid += x_centered[t] - phi * x_centered[t - 1];
  }
  c.b = (1.0 - phi) * resid + x_centered[0] * (1.0 - phi * phi);
  return c;
}

double sv_sample_mu_centered(std::span<const double> x_centered, double phi, double sigma,
                             RngStream& rng) {
  if (!(std::abs(phi) < 1.0)) {
    throw std::invalid_argument("sv_sample_mu_centered: |phi| must be < 1");
  }
  const CenteredMuConditional c = sv_mu_conditional(x_centered, phi);
  return rng.normal(c.mean(), sigma / std::sqrt(c.a));
}

// ---------------------------------------------------------------------------

Parameterisation parse_parameterisation(const std::string& name) {
  if (name == "noncentered_beta") return Parameterisation::noncentered_beta;
  if (name == "centered_mu") return Parameterisation::centered_mu;
  if (name == "noncentered_beta_sigma") return Parameterisation::noncentered_beta_sigma;
  throw std::invalid_argument("unknown parameterisation '" + name + "'");
}

const char* to_string(Parameterisation p) {
  switch (p) {
    case Parameterisation::noncentered_beta: return "noncentered_beta";
    case Parameterisation::centered_mu: return "centered_mu";
    case Parameterisation::noncentered_beta_sigma: return "noncentered_beta_sigma";
  }
  return "?";
}

RealPath reparam_transform(const SvParams& params, std::span<const double> path,
                           Parameterisation from, Parameterisation to) {
  params.validate();
  const double mu = 2.0 * std::log(params.beta);
  RealPath x(path.begin(), path.end());
  // To the default representation first.
  if (from == Parameterisation::centered_mu) {
    for (double& v : x) v -= mu;
  } else if (from == Parameterisation::noncentered_beta_sigma) {
    for (double& v : x) v *= params.sigma;
  }
  if (to == Parameterisation::centered_mu) {
    for (double& v : x) v += mu;
  } else if (to == Parameterisation::noncentered_beta_sigma) {
    for (double& v : x) v /= params.sigma;
  }
  return x;
}

double sv_log_joint_in(Parameterisation kind, std::span<const double> path,
                       std::span<const double> y, const SvParams& params) {
  if (path.size() != y.size() || path.empty()) {
    throw std::invalid_argument("sv_log_joint_in: need equal non-empty x and y");
  }
  const double phi = params.phi;
  const double s2 = params.sigma * params.sigma;
  double lp = 0.0;
  switch (kind) {
    case Parameterisation::noncentered_beta:
      return sv_log_joint(path, y, params);
    case Parameterisation::centered_mu: {
      const double mu = 2.0 * std::log(params.beta);
      lp += log_normal(path[0], mu, s2 / (1.0 - phi * phi));
      for (std::size_t t = 1; t < path.size(); ++t) {
        lp += log_normal(path[t], mu + phi * (path[t - 1] - mu), s2);
      }
      for (std::size_t t = 0; t < path.size(); ++t) {
        lp += log_normal(y[t], 0.0, std::exp(path[t]));
      }
      return lp;
    }
    case Parameterisation::noncentered_beta_sigma: {
      const double b2 = params.beta * params.beta;
      lp += log_normal(path[0], 0.0, 1.0 / (1.0 - phi * phi));
      for (std::size_t t = 1; t < path.size(); ++t) {
        lp += log_normal(path[t], phi * path[t - 1], 1.0);
      }
      for (std::size_t t = 0; t < path.size(); ++t) {
        lp += log_normal(y[t], 0.0, b2 * std::exp(params.sigma * path[t]));
      }
      return lp;
    }
  }
  return lp;
}

// ---------------------------------------------------------------------------

void DirichletPrior::validate() const {
  if (transition.rows() != transition.cols() || transition.rows() < 1) {
    throw std::invalid_argument("DirichletPrior: transition concentrations must be K x K");
  }
  if (emission.rows() != transition.rows()) {
    throw std::invalid_argument("DirichletPrior: emission concentrations must have K rows");
  }
  if ((transition.array() <= 0.0).any() || (emission.array() <= 0.0).any()) {
    throw std::invalid_argument("DirichletPrior: concentrations must be positive");
  }
}

DirichletPrior DirichletPrior::uniform(int k, int s, double value) {
  return {Eigen::MatrixXd::Constant(k, k, value), Eigen::MatrixXd::Constant(k, s, value)};
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng) {
  Eigen::VectorXd g(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    g[i] = rng.gamma(alpha[i]);
  }
  return g / g.sum();
}

Eigen::MatrixXd transition_counts(std::span<const int> x, int k) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t t = 1; t < x.size(); ++t) {
    c(x[t - 1], x[t]) += 1.0;
  }
  return c;
}

Eigen::MatrixXd emission_counts(std::span<const int> x, std::span<const int> y, int k, int s) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("emission_counts: length mismatch");
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, s);
  for (std::size_t t = 0; t < x.size(); ++t) {
    c(x[t], y[t]) += 1.0;
  }
  return c;
}

HmmParams hmm_sample_conditionals(std::span<const int> x, std::span<const int> y,
                                  const DirichletPrior& prior, const Eigen::VectorXd& initial,
                                  RngStream& rng) {
  prior.validate();
  const auto k = static_cast<int>(prior.transition.rows());
  const auto s = static_cast<int>(prior.emission.cols());
  const Eigen::MatrixXd post_p = prior.transition + transition_counts(x, k);
  const Eigen::MatrixXd post_e = prior.emission + emission_counts(x, y, k, s);
  HmmParams out;
  out.transition.resize(k, k);
  out.emission.resize(k, s);
  for (int i = 0; i < k; ++i) {
    out.transition.row(i) = sample_dirichlet(post_p.row(i).transpose(), rng).transpose();
  }
  for (int i = 0; i < k; ++i) {
    out.emission.row(i) = sample_dirichlet(post_e.row(i).transpose(), rng).transpose();
  }
  out.initial = initial;
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) {
    return 0.0;
  }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

GammaEstimate finish_gamma(std::span<const double> f_values, std::span<const double> cond_vars) {
  GammaEstimate g;
  g.marginal_var = sample_variance(f_values);
  double mean = 0.0;
  for (double v : f_values) mean += v;
  mean /= static_cast<double>(f_values.size());
  if (!(g.marginal_var > 1e-14 * std::max(1.0, mean * mean))) {
    throw std::domain_error("estimate_gamma_f: constant functional");
  }
  double acc = 0.0;
  for (double v : cond_vars) acc += v;
  g.retained = cond_vars.size();
  g.mean_conditional_var = acc / static_cast<double>(cond_vars.size());
  g.gamma = std::clamp(1.0 - g.mean_conditional_var / g.marginal_var, 0.0, 1.0);
  return g;
}

}  // namespace detail

}  // namespace ssmcmc
