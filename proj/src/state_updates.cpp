#include "ssmcmc/state_updates.hpp"

#include <algorithm>

namespace ssmcmc {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double log_normal(double x, double mean, double var) {
  const double d = x - mean;
  return -kHalfLog2Pi - 0.5 * std::log(var) - 0.5 * d * d / var;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> hmm_full_conditional(std::size_t t, std::span<const int> path,
                                         std::span<const int> y, const HmmParams& hmm) {
  const std::size_t n = path.size();
  if (t >= n || y.size() != n) {
    throw std::invalid_argument("hmm_full_conditional: index out of range");
  }
  const int k = hmm.num_states();
  std::vector<double> probs(k);
  double total = 0.0;
  for (int s = 0; s < k; ++s) {
    double v = hmm.emission(s, y[t]);
    v *= t == 0 ? hmm.initial(s) : hmm.transition(path[t - 1], s);
    if (t + 1 < n) {
      v *= hmm.transition(s, path[t + 1]);
    }
    probs[s] = v;
    total += v;
  }
  if (!(total > 0.0)) {
    throw std::domain_error("hmm_full_conditional: impossible configuration");
  }
  for (double& p : probs) {
    p /= total;
  }
  return probs;
}

StatePath hmm_single_site_sweep(StatePath path, std::span<const int> y, const HmmParams& hmm,
                                RngStream& rng) {
  for (std::size_t t = 0; t < path.size(); ++t) {
    const auto probs = hmm_full_conditional(t, path, y, hmm);
    path[t] = static_cast<int>(rng.categorical(probs));
  }
  return path;
}

// ---------------------------------------------------------------------------

double GaussianProposal::log_density(double x) const { return log_normal(x, mean, variance); }

namespace {

// Prior conditional mean and variance of x_t given its neighbours.
std::pair<double, double> sv_prior_conditional(std::size_t t, std::span<const double> x,
                                               const SvParams& p) {
  const std::size_t n = x.size();
  const double s2 = p.sigma * p.sigma;
  if (n == 1) {
    return {0.0, p.stationary_variance()};
  }
  if (t == 0) {
    return {p.phi * x[1], s2};
  }
  if (t == n - 1) {
    return {p.phi * x[n - 2], s2};
  }
  const double denom = 1.0 + p.phi * p.phi;
  return {p.phi * (x[t - 1] + x[t + 1]) / denom, s2 / denom};
}

}  // namespace

GaussianProposal sv_single_site_proposal(std::size_t t, std::span<const double> x,
                                         std::span<const double> y, const SvParams& params) {
  if (t >= x.size() || y.size() != x.size()) {
    throw std::invalid_argument("sv_single_site_proposal: index out of range");
  }
  const auto [mu, tau2] = sv_prior_conditional(t, x, params);
  const double c = y[t] * y[t] / (2.0 * params.beta * params.beta) * std::exp(-mu);
  const double precision = 1.0 / tau2 + c;
  const double variance = 1.0 / precision;
  return {mu + variance * (c - 0.5), variance};
}

double sv_single_site_log_target(std::size_t t, double value, std::span<const double> x,
                                 std::span<const double> y, const SvParams& params) {
  const auto [mu, tau2] = sv_prior_conditional(t, x, params);
  const double d = value - mu;
  return -0.5 * d * d / tau2 - 0.5 * value -
         y[t] * y[t] * std::exp(-value) / (2.0 * params.beta * params.beta);
}

SiteUpdate sv_single_site_update(std::size_t t, std::span<const double> x,
                                 std::span<const double> y, const SvParams& params,
                                 RngStream& rng) {
  const GaussianProposal q = sv_single_site_proposal(t, x, y, params);
  const double proposal = rng.normal(q.mean, std::sqrt(q.variance));
  SiteUpdate out;
  out.log_accept_ratio =
      (sv_single_site_log_target(t, proposal, x, y, params) - q.log_density(proposal)) -
      (sv_single_site_log_target(t, x[t], x, y, params) - q.log_density(x[t]));
  out.accepted = std::log(rng.uniform()) < out.log_accept_ratio;
  out.value = out.accepted ? proposal : x[t];
  return out;
}

std::size_t sv_single_site_sweep(RealPath& x, std::span<const double> y, const SvParams& params,
                                 RngStream& rng) {
  std::size_t accepted = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const SiteUpdate u = sv_single_site_update(t, x, y, params, rng);
    x[t] = u.value;
    accepted += u.accepted ? 1 : 0;
  }
  return accepted;
}

// ---------------------------------------------------------------------------

double SvEmission::log_density(std::size_t j, double x) const {
  const double log_var = 2.0 * std::log(beta) + x;
  return -kHalfLog2Pi - 0.5 * log_var - 0.5 * y[j] * y[j] * std::exp(-log_var);
}

EmissionExpansion SvEmission::expand(std::size_t j, double x_hat) const {
  const double c = y[j] * y[j] / (2.0 * beta * beta) * std::exp(-x_hat);
  return {c - 0.5, -c};
}

double GaussianEmission::log_density(std::size_t j, double x) const {
  return log_normal(y[j], x, noise_var);
}

EmissionExpansion GaussianEmission::expand(std::size_t j, double x_hat) const {
  return {(y[j] - x_hat) / noise_var, -1.0 / noise_var};
}

double ArDynamics::log_initial(double x) const {
  return log_normal(x, 0.0, sigma * sigma / (1.0 - phi * phi));
}

double ArDynamics::log_transition(double prev, double x) const {
  return log_normal(x, phi * prev, sigma * sigma);
}

namespace detail {

GaussianBlockProposal build_block(std::size_t first, std::size_t last, std::span<const double> x,
                                  const ArDynamics& dyn, std::span<const InfoFactor> factors) {
  const std::size_t len = last - first + 1;
  const double s2 = dyn.sigma * dyn.sigma;
  const double phi = dyn.phi;

  // Forward pass in information form.
  std::vector<double> m(len);
  std::vector<double> v(len);
  for (std::size_t i = 0; i < len; ++i) {
    double m_pred = 0.0;
    double v_pred = 0.0;
    if (i == 0) {
      if (first == 0) {
        v_pred = s2 / (1.0 - phi * phi);
      } else {
        m_pred = phi * x[first - 1];
        v_pred = s2;
      }
    } else {
      m_pred = phi * m[i - 1];
      v_pred = phi * phi * v[i - 1] + s2;
    }
    const double precision = 1.0 / v_pred + factors[i].j;
    v[i] = 1.0 / precision;
    m[i] = v[i] * (m_pred / v_pred + factors[i].h);
  }

  // Backward kernels; the right neighbour, if any, acts as an exact observation.
  GaussianBlockProposal q;
  q.first = first;
  q.last = last;
  q.offset.resize(len);
  q.slope.resize(len);
  q.cond_var.resize(len);
  const bool anchored = last + 1 < x.size();
  for (std::size_t i = len; i-- > 0;) {
    if (i == len - 1 && !anchored) {
      q.offset[i] = m[i];
      q.slope[i] = 0.0;
      q.cond_var[i] = v[i];
      continue;
    }
    const double cv = 1.0 / (1.0 / v[i] + phi * phi / s2);
    q.cond_var[i] = cv;
    if (i == len - 1) {
      q.offset[i] = cv * (m[i] / v[i] + phi * x[last + 1] / s2);
      q.slope[i] = 0.0;
    } else {
      q.offset[i] = cv * m[i] / v[i];
      q.slope[i] = cv * phi / s2;
    }
  }

  q.mean.resize(len);
  q.marginal_var.resize(len);
  q.mean[len - 1] = q.offset[len - 1];
  q.marginal_var[len - 1] = q.cond_var[len - 1];
  for (std::size_t i = len - 1; i-- > 0;) {
    q.mean[i] = q.offset[i] + q.slope[i] * q.mean[i + 1];
    q.marginal_var[i] = q.cond_var[i] + q.slope[i] * q.slope[i] * q.marginal_var[i + 1];
  }
  return q;
}

}  // namespace detail

std::vector<double> GaussianBlockProposal::sample(RngStream& rng) const {
  const std::size_t len = size();
  std::vector<double> out(len);
  for (std::size_t i = len; i-- > 0;) {
    const double next = i + 1 < len ? out[i + 1] : 0.0;
    out[i] = offset[i] + slope[i] * next + std::sqrt(cond_var[i]) * rng.normal();
  }
  return out;
}

double GaussianBlockProposal::log_density(std::span<const double> block) const {
  const std::size_t len = size();
  if (block.size() != len) {
    throw std::invalid_argument("GaussianBlockProposal::log_density: length mismatch");
  }
  double lp = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double next = i + 1 < len ? block[i + 1] : 0.0;
    lp += log_normal(block[i], offset[i] + slope[i] * next, cond_var[i]);
  }
  return lp;
}

GaussianBlockProposal sv_block_proposal(std::size_t first, std::size_t last,
                                        std::span<const double> x, std::span<const double> y,
                                        const SvParams& params, int refine_iters) {
  return gaussian_block_proposal(first, last, x, ArDynamics{params.phi, params.sigma},
                                 SvEmission{y, params.beta}, refine_iters);
}

BlockUpdate sv_block_update(std::size_t first, std::size_t last, std::span<const double> x,
                            std::span<const double> y, const SvParams& params, int refine_iters,
                            RngStream& rng) {
  return gaussian_block_update(first, last, x, ArDynamics{params.phi, params.sigma},
                               SvEmission{y, params.beta}, refine_iters, rng);
}

// ---------------------------------------------------------------------------

BlockScheme parse_block_scheme(const std::string& name) {
  if (name == "fixed") return BlockScheme::fixed;
  if (name == "random") return BlockScheme::random;
  if (name == "overlapping") return BlockScheme::overlapping;
  throw std::invalid_argument("unknown block scheme '" + name + "'");
}

const char* to_string(BlockScheme scheme) {
  switch (scheme) {
    case BlockScheme::fixed: return "fixed";
    case BlockScheme::random: return "random";
    case BlockScheme::overlapping: return "overlapping";
  }
  return "?";
}

BlockSchedule block_schedule(std::size_t n, BlockScheme scheme, std::size_t size, RngStream& rng) {
  if (size < 1 || size > n) {
    throw std::invalid_argument("block_schedule: size out of range");
  }
  BlockSchedule out;
  out.scheme = scheme;
  switch (scheme) {
    case BlockScheme::fixed:
    case BlockScheme::random: {
      std::size_t start = 0;
      if (scheme == BlockScheme::random) {
        const std::size_t offset = rng.uniform_index(size);
        if (offset > 0) {
          out.intervals.emplace_back(0, offset - 1);
          start = offset;
        }
      }
      for (; start < n; start += size) {
        out.intervals.emplace_back(start, std::min(start + size, n) - 1);
      }
      break;
    }
    case BlockScheme::overlapping: {
      const std::size_t stride = std::max<std::size_t>(1, size / 2);
      for (std::size_t start = 0;; start += stride) {
        const std::size_t end = std::min(start + size, n) - 1;
        out.intervals.emplace_back(start, end);
        if (end == n - 1) {
          break;
        }
      }
      break;
    }
  }
  return out;
}

SweepStats sv_block_sweep(RealPath& x, std::span<const double> y, const SvParams& params,
                          const BlockSchedule& schedule, int refine_iters, RngStream& rng) {
  SweepStats stats;
  for (const auto& [first, last] : schedule.intervals) {
    const BlockUpdate u = sv_block_update(first, last, x, y, params, refine_iters, rng);
    std::copy(u.block.begin(), u.block.end(), x.begin() + static_cast<std::ptrdiff_t>(first));
    ++stats.proposals;
    stats.accepted += u.accepted ? 1 : 0;
    stats.sum_accept_prob += u.accept_probability();
  }
  return stats;
}

}  // namespace ssmcmc
