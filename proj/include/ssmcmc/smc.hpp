#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssmcmc/models.hpp"
#include "ssmcmc/parallel.hpp"
#include "ssmcmc/rng.hpp"
#include "ssmcmc/weights.hpp"

namespace ssmcmc {

/// Every particle, log-weight and ancestor index of one filter run.
///
/// Rows are time steps. ancestor(t, m) for t >= 1 is the index at time t-1
/// of the parent of particle m at time t. Weights are stored per step and
/// never multiplied across time.
template <class State>
struct ParticleSystem {
  std::size_t T = 0;
  std::size_t M = 0;
  std::vector<State> particles;      // T x M
  std::vector<double> log_weights;   // T x M
  std::vector<std::size_t> parents;  // (T-1) x M
  double log_lik_hat = 0.0;

  ParticleSystem() = default;
  ParticleSystem(std::size_t t, std::size_t m)
      : T(t), M(m), particles(t * m), log_weights(t * m), parents(t > 0 ? (t - 1) * m : 0) {}

  State& particle(std::size_t t, std::size_t m) { return particles[t * M + m]; }
  const State& particle(std::size_t t, std::size_t m) const { return particles[t * M + m]; }
  double& log_weight(std::size_t t, std::size_t m) { return log_weights[t * M + m]; }
  double log_weight(std::size_t t, std::size_t m) const { return log_weights[t * M + m]; }
  std::size_t& ancestor(std::size_t t, std::size_t m) { return parents[(t - 1) * M + m]; }
  std::size_t ancestor(std::size_t t, std::size_t m) const { return parents[(t - 1) * M + m]; }

  [[nodiscard]] std::span<const double> weight_row(std::size_t t) const {
    return {log_weights.data() + t * M, M};
  }
};

/// Thrown when every weight at some step is zero.
class FilterCollapse : public std::runtime_error {
public:
  explicit FilterCollapse(std::size_t t)
      : std::runtime_error("filter collapse at t=" + std::to_string(t)), t_(t) {}
  [[nodiscard]] std::size_t time() const noexcept { return t_; }

private:
  std::size_t t_;
};

/// q(x_1) and q(x_t | x_{t-1}); t is passed so a proposal may look at y_t.
template <class State>
struct ProposalKernel {
  std::function<State(RngStream&)> sample_initial;
  std::function<State(const State&, std::size_t, RngStream&)> sample;
  std::function<double(const State&)> log_initial;
  std::function<double(const State&, const State&, std::size_t)> log_density;
};

/// The model's own dynamics as a proposal kernel.
template <StateSpaceModel Model>
ProposalKernel<typename Model::State> prior_kernel(const Model& model) {
  using S = typename Model::State;
  return {
      [model](RngStream& rng) { return model.sample_initial(rng); },
      [model](const S& prev, std::size_t, RngStream& rng) {
        return model.sample_transition(prev, rng);
      },
      [model](const S& x) { return model.log_initial(x); },
      [model](const S& prev, const S& x, std::size_t) { return model.log_transition(prev, x); },
  };
}

namespace detail {

// Stream layout under the caller's stream: propagation of particle m at time
// t uses split(kPropagate, t).split(m); resampling at t uses split(kResample, t).
inline constexpr std::uint64_t kPropagate = 0x70;
inline constexpr std::uint64_t kResample = 0x72;
inline constexpr std::uint64_t kAncestor = 0x61;

struct BootstrapPolicy {
  template <class Model>
  auto initial(const Model& m, RngStream& rng) const {
    return m.sample_initial(rng);
  }
  template <class Model, class S>
  S propagate(const Model& m, const S& prev, std::size_t, RngStream& rng) const {
    return m.sample_transition(prev, rng);
  }
  template <class Model, class S>
  double initial_correction(const Model&, const S&) const {
    return 0.0;
  }
  template <class Model, class S>
  double transition_correction(const Model&, const S&, const S&, std::size_t) const {
    return 0.0;
  }
};

template <class S>
struct KernelPolicy {
  const ProposalKernel<S>& q;

  template <class Model>
  S initial(const Model&, RngStream& rng) const {
    return q.sample_initial(rng);
  }
  template <class Model>
  S propagate(const Model&, const S& prev, std::size_t t, RngStream& rng) const {
    return q.sample(prev, t, rng);
  }
  template <class Model>
  double initial_correction(const Model& m, const S& x) const {
    return m.log_initial(x) - q.log_initial(x);
  }
  template <class Model>
  double transition_correction(const Model& m, const S& prev, const S& x, std::size_t t) const {
    return m.log_transition(prev, x) - q.log_density(prev, x, t);
  }
};

/// Shared filter loop. With a reference path, column 0 is pinned to it.
template <class Model, class Policy>
ParticleSystem<typename Model::State> run_filter(
    const Model& model, std::span<const typename Model::Observation> y, std::size_t M,
    const Policy& policy, const RngStream& rng,
    const std::vector<typename Model::State>* reference, bool ancestor_sampling) {
  using S = typename Model::State;
  if (M < 1) {
    throw std::invalid_argument("particle filter: need M >= 1");
  }
  if (y.empty()) {
    throw std::invalid_argument("particle filter: empty observation sequence");
  }
  const std::size_t T = y.size();
  if (reference && reference->size() != T) {
    throw std::invalid_argument("conditional SMC: reference length differs from data");
  }
  const std::size_t first_free = reference ? 1 : 0;
  ParticleSystem<S> ps(T, M);
  const double log_m = std::log(static_cast<double>(M));

  auto finish_row = [&](std::size_t t) {
    const double lse = log_sum_exp(ps.weight_row(t));
    if (!(lse > -std::numeric_limits<double>::infinity()) || std::isnan(lse)) {
      throw FilterCollapse(t);
    }
    ps.log_lik_hat += lse - log_m;
  };

  const RngStream propagate_root = rng.split(kPropagate);
  {
    const RngStream step = propagate_root.split(0);
    if (reference) {
      ps.particle(0, 0) = (*reference)[0];
    }
    for (std::size_t m = first_free; m < M; ++m) {
      RngStream r = step.split(m);
      ps.particle(0, m) = policy.initial(model, r);
    }
    for (std::size_t m = 0; m < M; ++m) {
      const S& x = ps.particle(0, m);
      ps.log_weight(0, m) = model.log_emission(x, y[0]) + policy.initial_correction(model, x);
    }
    finish_row(0);
  }

  std::vector<double> probs(M);
  std::vector<std::size_t> idx(M);
  for (std::size_t t = 1; t < T; ++t) {
    const auto prev_row = ps.weight_row(t - 1);
    const double lse = log_sum_exp(prev_row);
    for (std::size_t m = 0; m < M; ++m) {
      probs[m] = std::exp(prev_row[m] - lse);
    }
    RngStream rs = rng.split(kResample, t);
    multinomial_resample_normalized(probs, rs, std::span<std::size_t>(idx).subspan(first_free));
    if (reference) {
      ps.particle(t, 0) = (*reference)[t];
      idx[0] = 0;
      if (ancestor_sampling && M > 1) {
        std::vector<double> lw(M);
        for (std::size_t j = 0; j < M; ++j) {
          lw[j] = prev_row[j] + model.log_transition(ps.particle(t - 1, j), (*reference)[t]);
        }
        RngStream ra = rng.split(kAncestor, t);
        idx[0] = multinomial_resample(lw, 1, ra)[0];
      }
    }
    const RngStream step = propagate_root.split(t);
    for (std::size_t m = 0; m < M; ++m) {
      ps.ancestor(t, m) = idx[m];
    }
    for (std::size_t m = first_free; m < M; ++m) {
      RngStream r = step.split(m);
      ps.particle(t, m) = policy.propagate(model, ps.particle(t - 1, idx[m]), t, r);
    }
    for (std::size_t m = 0; m < M; ++m) {
      const S& x = ps.particle(t, m);
      ps.log_weight(t, m) =
          model.log_emission(x, y[t]) +
          policy.transition_correction(model, ps.particle(t - 1, idx[m]), x, t);
    }
    finish_row(t);
  }
  return ps;
}

}  // namespace detail

/// Particle filter with a general proposal; resamples at every step.
template <StateSpaceModel Model>
ParticleSystem<typename Model::State> particle_filter(
    const Model& model, std::span<const typename Model::Observation> y, std::size_t M,
    const ProposalKernel<typename Model::State>& proposal, const RngStream& rng) {
  return detail::run_filter(model, y, M, detail::KernelPolicy<typename Model::State>{proposal}, rng,
                            nullptr, false);
}

/// Bootstrap filter: proposes from the model and weights by p(y_t | x_t).
/// Needs only simulation from the transition.
template <StateSpaceModel Model>
ParticleSystem<typename Model::State> bootstrap_filter(
    const Model& model, std::span<const typename Model::Observation> y, std::size_t M,
    const RngStream& rng) {
  return detail::run_filter(model, y, M, detail::BootstrapPolicy{}, rng, nullptr, false);
}

/// Bootstrap filter with column 0 pinned to `reference`. With ancestor
/// sampling the reference's parent at each step is redrawn with probability
/// proportional to w_{t-1}^j p(x_t^ref | x_{t-1}^j).
template <StateSpaceModel Model>
ParticleSystem<typename Model::State> conditional_smc(
    const Model& model, std::span<const typename Model::Observation> y, std::size_t M,
    const std::vector<typename Model::State>& reference, const RngStream& rng,
    bool ancestor_sampling) {
  if (ancestor_sampling && !model.has_transition_density()) {
    throw std::logic_error("intractable transition");
  }
  return detail::run_filter(model, y, M, detail::BootstrapPolicy{}, rng, &reference,
                            ancestor_sampling);
}

/// Ancestral line of final particle k.
template <class State>
std::vector<State> trace_path(const ParticleSystem<State>& ps, std::size_t k) {
  std::vector<State> path(ps.T);
  std::size_t b = k;
  for (std::size_t t = ps.T; t-- > 0;) {
    path[t] = ps.particle(t, b);
    if (t > 0) {
      b = ps.ancestor(t, b);
    }
  }
  return path;
}

/// Draws k with probability proportional to w_T^k and returns its ancestral path.
template <class State>
std::pair<std::size_t, std::vector<State>> sample_backward_path(const ParticleSystem<State>& ps,
                                                                RngStream& rng) {
  const std::size_t k = multinomial_resample(ps.weight_row(ps.T - 1), 1, rng)[0];
  return {k, trace_path(ps, k)};
}

/// New reference path for the next conditional SMC sweep.
template <class State>
std::vector<State> csmc_select_path(const ParticleSystem<State>& ps, RngStream& rng) {
  return sample_backward_path(ps, rng).second;
}

/// Unbiased sample variance of the log-likelihood estimate over independent
/// bootstrap filter runs; replicate r uses rng.split(r).
template <StateSpaceModel Model>
double estimate_loglik_variance(const Model& model,
                                std::span<const typename Model::Observation> y, std::size_t M,
                                std::size_t replicates, const RngStream& rng,
                                std::size_t threads = 1) {
  if (replicates < 2) {
    throw std::invalid_argument("estimate_loglik_variance: need at least 2 replicates");
  }
  std::vector<double> ll(replicates);
  parallel_for(replicates, threads,
               [&](std::size_t r) { ll[r] = bootstrap_filter(model, y, M, rng.split(r)).log_lik_hat; });
  double mean = 0.0;
  for (double v : ll) mean += v;
  mean /= static_cast<double>(replicates);
  double ss = 0.0;
  for (double v : ll) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(replicates - 1);
}

/// Writes t,m,x,logw,ancestor rows (1-based t, m and ancestor; ancestor 0 at t=1).
template <class State>
void write_particle_csv(const ParticleSystem<State>& ps, std::ostream& os) {
  os << "t,m,x,logw,ancestor\n";
  char buf[64];
  for (std::size_t t = 0; t < ps.T; ++t) {
    for (std::size_t m = 0; m < ps.M; ++m) {
      os << t + 1 << ',' << m + 1 << ',';
      std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(ps.particle(t, m)));
      os << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", ps.log_weight(t, m));
      os << buf << ',' << (t > 0 ? ps.ancestor(t, m) + 1 : 0) << '\n';
    }
  }
}

}  // namespace ssmcmc
