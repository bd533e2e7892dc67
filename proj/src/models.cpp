#include "ssmcmc/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ssmcmc {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

double log_normal(double x, double mean, double var) {
  const double d = x - mean;
  return -kHalfLog2Pi - 0.5 * std::log(var) - 0.5 * d * d / var;
}

void check_probability_vector(const Eigen::Ref<const Eigen::VectorXd>& v, const char* what) {
  if ((v.array() < 0.0).any() || std::abs(v.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument(std::string(what) + ": not a probability vector");
  }
}

}  // namespace

void SvParams::validate() const {
  if (!(beta > 0.0) || !(sigma > 0.0) || !(std::abs(phi) < 1.0)) {
    throw std::invalid_argument("SvParams: need beta > 0, sigma > 0, |phi| < 1");
  }
}

void SvPrior::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(s0 > 0.0) || !(p > 0.0)) {
    throw std::invalid_argument("SvPrior: a, b, s0, p must be positive");
  }
}

double sv_obs_logdensity(double x, double y, const SvParams& params) {
  // N(0, beta^2 e^x)
  const double log_var = 2.0 * std::log(params.beta) + x;
  return -kHalfLog2Pi - 0.5 * log_var - 0.5 * y * y * std::exp(-log_var);
}

double sv_transition_logdensity(double x_prev, double x, const SvParams& params) {
  return log_normal(x, params.phi * x_prev, params.sigma * params.sigma);
}

double sv_initial_logdensity(double x, const SvParams& params) {
  return log_normal(x, 0.0, params.stationary_variance());
}

double sv_log_joint(std::span<const double> x, std::span<const double> y, const SvParams& params) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("sv_log_joint: length mismatch");
  }
  double lp = sv_initial_logdensity(x[0], params);
  for (std::size_t t = 1; t < x.size(); ++t) {
    lp += sv_transition_logdensity(x[t - 1], x[t], params);
  }
  for (std::size_t t = 0; t < x.size(); ++t) {
    lp += sv_obs_logdensity(x[t], y[t], params);
  }
  return lp;
}

Simulated<double, double> sv_simulate(const SvParams& params, std::size_t n, RngStream& rng) {
  params.validate();
  if (n == 0) {
    throw std::invalid_argument("sv_simulate: n must be at least 1");
  }
  const SvModel model(params);
  Simulated<double, double> out;
  out.x.resize(n);
  out.y.resize(n);
  out.x[0] = model.sample_initial(rng);
  for (std::size_t t = 1; t < n; ++t) {
    out.x[t] = model.sample_transition(out.x[t - 1], rng);
  }
  for (std::size_t t = 0; t < n; ++t) {
    out.y[t] = params.beta * std::exp(0.5 * out.x[t]) * rng.normal();
  }
  return out;
}

// ---------------------------------------------------------------------------

void HmmParams::validate() const {
  const auto k = transition.rows();
  if (k < 1 || transition.cols() != k || emission.rows() != k || initial.size() != k ||
      emission.cols() < 1) {
    throw std::invalid_argument("HmmParams: inconsistent dimensions");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    check_probability_vector(transition.row(i).transpose(), "HmmParams transition row");
    check_probability_vector(emission.row(i).transpose(), "HmmParams emission row");
  }
  check_probability_vector(initial, "HmmParams initial");
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  const auto k = transition.rows();
  // Solve pi (P - I) = 0 with sum(pi) = 1 by replacing one equation.
  Eigen::MatrixXd a = transition.transpose() - Eigen::MatrixXd::Identity(k, k);
  a.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  if (!pi.allFinite() || (pi.array() < -1e-12).any()) {
    // Reducible chain: fall back to uniform.
    return Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  }
  pi = pi.cwiseMax(0.0);
  return pi / pi.sum();
}

HmmParams make_hmm(Eigen::MatrixXd transition, Eigen::MatrixXd emission) {
  Eigen::VectorXd initial = stationary_distribution(transition);
  return make_hmm(std::move(transition), std::move(emission), std::move(initial));
}

HmmParams make_hmm(Eigen::MatrixXd transition, Eigen::MatrixXd emission,
                   Eigen::VectorXd initial) {
  HmmParams hmm{std::move(transition), std::move(emission), std::move(initial)};
  hmm.validate();
  return hmm;
}

HmmParams dna_params(double alpha, double beta_sep) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("dna_params: alpha must lie in (0, 1)");
  }
  if (!(beta_sep > 0.0 && beta_sep < 0.25)) {
    throw std::invalid_argument("dna_params: beta must lie in (0, 1/4)");
  }
  Eigen::MatrixXd p(2, 2);
  p << 1.0 - alpha, alpha, alpha, 1.0 - alpha;
  Eigen::MatrixXd e(2, 4);
  const double hi = 0.25 + beta_sep;
  const double lo = 0.25 - beta_sep;
  e << hi, hi, lo, lo,
       lo, lo, hi, hi;
  Eigen::VectorXd init(2);
  init << 0.5, 0.5;
  return make_hmm(std::move(p), std::move(e), std::move(init));
}

double hmm_log_joint(std::span<const int> x, std::span<const int> y, const HmmParams& hmm) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("hmm_log_joint: length mismatch");
  }
  double lp = std::log(hmm.initial(x[0]));
  for (std::size_t t = 1; t < x.size(); ++t) {
    lp += std::log(hmm.transition(x[t - 1], x[t]));
  }
  for (std::size_t t = 0; t < x.size(); ++t) {
    lp += std::log(hmm.emission(x[t], y[t]));
  }
  return lp;
}

namespace {

// Categorical draw from one row of a (column-major) probability matrix.
int sample_row(const Eigen::MatrixXd& m, int row, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double p = m(row, j);
    if (p > 0.0) {
      acc += p;
      last = static_cast<int>(j);
      if (u < acc) {
        return last;
      }
    }
  }
  return last;
}

}  // namespace

int HmmModel::sample_initial(RngStream& rng) const {
  return static_cast<int>(
      rng.categorical(std::span<const double>(params.initial.data(), params.initial.size())));
}

int HmmModel::sample_transition(int prev, RngStream& rng) const {
  return sample_row(params.transition, prev, rng);
}

Simulated<int, int> hmm_simulate(const HmmParams& hmm, std::size_t n, RngStream& rng) {
  hmm.validate();
  if (n == 0) {
    throw std::invalid_argument("hmm_simulate: n must be at least 1");
  }
  const HmmModel model(hmm);
  Simulated<int, int> out;
  out.x.resize(n);
  out.y.resize(n);
  out.x[0] = model.sample_initial(rng);
  for (std::size_t t = 1; t < n; ++t) {
    out.x[t] = model.sample_transition(out.x[t - 1], rng);
  }
  for (std::size_t t = 0; t < n; ++t) {
    out.y[t] = sample_row(hmm.emission, out.x[t], rng);
  }
  return out;
}

char dna_symbol(int code) {
  static constexpr char kSymbols[] = {'A', 'C', 'G', 'T'};
  if (code < 0 || code > 3) {
    throw std::invalid_argument("dna_symbol: code out of range");
  }
  return kSymbols[code];
}

int dna_code(char symbol) {
  switch (symbol) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: throw std::invalid_argument(std::string("dna_code: unknown symbol '") + symbol + "'");
  }
}

}  // namespace ssmcmc
