#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssmcmc/rng.hpp"

namespace ssmcmc {

/// Real-valued latent path (SV) or observation sequence.
using RealPath = std::vector<double>;
/// Discrete latent path; states are 0-based internally, 1-based in files.
using StatePath = std::vector<int>;
/// Discrete observations (DNA: 0..3 for A,C,G,T).
using SymbolSeq = std::vector<int>;

template <class State, class Obs>
struct Simulated {
  std::vector<State> x;
  std::vector<Obs> y;
};

// ---------------------------------------------------------------------------
// Stochastic volatility

struct SvParams {
  double beta = 1.0;
  double phi = 0.9;
  double sigma = 0.2;

  /// Throws std::invalid_argument unless beta > 0, sigma > 0, |phi| < 1.
  void validate() const;
  [[nodiscard]] double stationary_variance() const { return sigma * sigma / (1.0 - phi * phi); }
};

/// Independent priors: p(beta) ∝ 1/beta, (phi+1)/2 ~ Beta(a, b),
/// sigma^2 ~ s0 * inverse-chi-squared(p).
struct SvPrior {
  double a = 1.0;
  double b = 1.0;
  double s0 = 0.2;
  double p = 5.0;

  void validate() const;
};

double sv_obs_logdensity(double x, double y, const SvParams& params);
double sv_transition_logdensity(double x_prev, double x, const SvParams& params);
double sv_initial_logdensity(double x, const SvParams& params);
/// log p(x_{1:n}, y_{1:n} | theta).
double sv_log_joint(std::span<const double> x, std::span<const double> y, const SvParams& params);

Simulated<double, double> sv_simulate(const SvParams& params, std::size_t n, RngStream& rng);

struct SvModel {
  using State = double;
  using Observation = double;

  SvParams params;

  explicit SvModel(const SvParams& p) : params(p) { params.validate(); }

  [[nodiscard]] double sample_initial(RngStream& rng) const {
    return rng.normal(0.0, std::sqrt(params.stationary_variance()));
  }
  [[nodiscard]] double sample_transition(double prev, RngStream& rng) const {
    return rng.normal(params.phi * prev, params.sigma);
  }
  [[nodiscard]] double log_initial(double x) const { return sv_initial_logdensity(x, params); }
  [[nodiscard]] double log_transition(double prev, double x) const {
    return sv_transition_logdensity(prev, x, params);
  }
  [[nodiscard]] double log_emission(double x, double y) const {
    return sv_obs_logdensity(x, y, params);
  }
  [[nodiscard]] static constexpr bool has_transition_density() { return true; }
};

// ---------------------------------------------------------------------------
// Discrete HMM

struct HmmParams {
  Eigen::MatrixXd transition;  ///< K x K, row-stochastic
  Eigen::MatrixXd emission;    ///< K x S, row k is the symbol distribution of state k
  Eigen::VectorXd initial;     ///< length K

  [[nodiscard]] int num_states() const { return static_cast<int>(transition.rows()); }
  [[nodiscard]] int num_symbols() const { return static_cast<int>(emission.cols()); }
  void validate() const;
};

/// Stationary distribution of a row-stochastic matrix.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

/// Builds an HMM; the initial law defaults to the stationary distribution of P.
HmmParams make_hmm(Eigen::MatrixXd transition, Eigen::MatrixXd emission);
HmmParams make_hmm(Eigen::MatrixXd transition, Eigen::MatrixXd emission,
                   Eigen::VectorXd initial);

/// Two-state DNA model: P12 = P21 = alpha and emissions
/// (1/4)(1,1,1,1) ± beta_sep (1,1,-1,-1).
HmmParams dna_params(double alpha, double beta_sep);

double hmm_log_joint(std::span<const int> x, std::span<const int> y, const HmmParams& hmm);

Simulated<int, int> hmm_simulate(const HmmParams& hmm, std::size_t n, RngStream& rng);

struct HmmModel {
  using State = int;
  using Observation = int;

  HmmParams params;

  explicit HmmModel(HmmParams p) : params(std::move(p)) { params.validate(); }

  [[nodiscard]] int sample_initial(RngStream& rng) const;
  [[nodiscard]] int sample_transition(int prev, RngStream& rng) const;
  [[nodiscard]] double log_initial(int x) const { return std::log(params.initial(x)); }
  [[nodiscard]] double log_transition(int prev, int x) const {
    return std::log(params.transition(prev, x));
  }
  [[nodiscard]] double log_emission(int x, int y) const { return std::log(params.emission(x, y)); }
  [[nodiscard]] static constexpr bool has_transition_density() { return true; }
};

// ---------------------------------------------------------------------------
// Uniform model contract used by the particle methods.

template <class M>
concept StateSpaceModel = requires(const M& m, const typename M::State& x,
                                   const typename M::Observation& y, RngStream& rng) {
  { m.sample_initial(rng) } -> std::convertible_to<typename M::State>;
  { m.sample_transition(x, rng) } -> std::convertible_to<typename M::State>;
  { m.log_initial(x) } -> std::convertible_to<double>;
  { m.log_transition(x, x) } -> std::convertible_to<double>;
  { m.log_emission(x, y) } -> std::convertible_to<double>;
  { m.has_transition_density() } -> std::convertible_to<bool>;
};

/// Hides the transition density of a model, leaving only simulation. The
/// bootstrap filter still works on such a model; ancestor sampling does not.
template <StateSpaceModel M>
struct SimulationOnly {
  using State = typename M::State;
  using Observation = typename M::Observation;

  M inner;

  [[nodiscard]] State sample_initial(RngStream& rng) const { return inner.sample_initial(rng); }
  [[nodiscard]] State sample_transition(const State& prev, RngStream& rng) const {
    return inner.sample_transition(prev, rng);
  }
  [[nodiscard]] double log_initial(const State& x) const { return inner.log_initial(x); }
  [[noreturn]] double log_transition(const State&, const State&) const {
    throw std::logic_error("intractable transition");
  }
  [[nodiscard]] double log_emission(const State& x, const Observation& y) const {
    return inner.log_emission(x, y);
  }
  [[nodiscard]] static constexpr bool has_transition_density() { return false; }
};

static_assert(StateSpaceModel<SvModel>);
static_assert(StateSpaceModel<HmmModel>);

// ---------------------------------------------------------------------------
// DNA symbols

char dna_symbol(int code);
int dna_code(char symbol);

}  // namespace ssmcmc
