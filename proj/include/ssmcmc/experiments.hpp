#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ssmcmc/config.hpp"
#include "ssmcmc/param_updates.hpp"
#include "ssmcmc/pmcmc.hpp"
#include "ssmcmc/rng.hpp"
#include "ssmcmc/state_updates.hpp"

namespace ssmcmc {

/// Tidy CSV table: header row plus string cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  void write(std::ostream& os, const std::vector<std::string>& header_comments = {}) const;
};

/// 10 significant digits; enough for summaries and stable across runs.
std::string fmt(double v);

// ---------------------------------------------------------------------------
// Lag-1 ACF of the Hamming distance, single-site Gibbs on the DNA HMM

struct HmmAcfSettings {
  std::vector<double> alphas;  ///< default: 10 evenly spaced values from 0.02 to 0.5
  std::vector<double> betas{0.02, 0.065, 0.11, 0.155, 0.2};
  std::vector<double> ns{200, 500};
  std::size_t replicates = 5;
  std::size_t iterations = 2000;
  std::size_t burn_in = 200;

  static HmmAcfSettings from_config(const Config& cfg);
};

struct HmmAcfRow {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t n = 0;
  std::size_t replicate = 0;
  double acf = 0.0;
  double mean_hamming = 0.0;
};

std::vector<HmmAcfRow> run_hmm_acf(const HmmAcfSettings& s, const RngStream& rng,
                                   std::size_t threads);
Table hmm_acf_table(const std::vector<HmmAcfRow>& rows);

// ---------------------------------------------------------------------------
// Lag-1 ACF of the state MSE, single-site SV sampler

struct SvAcfSettings {
  std::vector<double> phis{0.5, 0.7, 0.8, 0.9, 0.95, 0.99};
  std::vector<double> tau2s{0.5, 1.0, 2.0};
  std::vector<double> ns{200, 500};
  double beta = 1.0;
  std::size_t replicates = 5;
  std::size_t iterations = 2000;
  std::size_t burn_in = 200;

  static SvAcfSettings from_config(const Config& cfg);
};

struct SvAcfRow {
  double phi = 0.0;
  double tau2 = 0.0;
  std::size_t n = 0;
  std::size_t replicate = 0;
  double acf = 0.0;
  double acceptance = 0.0;
};

std::vector<SvAcfRow> run_sv_acf(const SvAcfSettings& s, const RngStream& rng,
                                 std::size_t threads);
Table sv_acf_table(const std::vector<SvAcfRow>& rows);

// ---------------------------------------------------------------------------
// Block independence sampler acceptance against block size

struct BlockAcceptanceSettings {
  std::vector<double> phis{0.8, 0.9, 0.95, 0.99};
  std::vector<double> block_sizes{10, 25, 50, 100, 200, 400};
  double tau2 = 0.2;
  double beta = 1.0;
  std::size_t n = 2000;
  std::size_t datasets = 20;
  std::size_t sweeps = 10;
  int refine_iters = 2;
  BlockScheme scheme = BlockScheme::random;

  static BlockAcceptanceSettings from_config(const Config& cfg);
};

struct BlockAcceptanceRow {
  double phi = 0.0;
  std::size_t block_size = 0;
  std::size_t dataset = 0;
  double mean_acceptance = 0.0;
};

std::vector<BlockAcceptanceRow> run_block_acceptance(const BlockAcceptanceSettings& s,
                                                     const RngStream& rng, std::size_t threads);
Table block_acceptance_table(const std::vector<BlockAcceptanceRow>& rows);

// ---------------------------------------------------------------------------
// Centred versus non-centred beta updates

struct ParameterisationSettings {
  std::vector<double> phis{0.8, 0.9, 0.95, 0.975, 0.99};
  double sigma = 0.02;
  double beta = 1.0;
  std::size_t n = 200;
  std::size_t replicates = 3;
  std::size_t iterations = 20000;
  std::size_t burn_in = 2000;
  std::size_t gamma_repeats = 20;

  static ParameterisationSettings from_config(const Config& cfg);
};

struct ParameterisationRow {
  double phi = 0.0;
  Parameterisation kind = Parameterisation::noncentered_beta;
  std::size_t replicate = 0;
  double acf_beta = 0.0;
  double gamma_f = 0.0;
  double state_acceptance = 0.0;
};

/// Gibbs sampler with phi and sigma at their true values: single-site state
/// sweep, then beta (non-centred) or mu = 2 log beta (centred).
std::vector<ParameterisationRow> run_parameterisation(const ParameterisationSettings& s,
                                                      const RngStream& rng, std::size_t threads);
Table parameterisation_table(const std::vector<ParameterisationRow>& rows);
/// Replicate-averaged ACF: one row per parameterisation, one column per phi.
Table parameterisation_summary(const std::vector<ParameterisationRow>& rows);

// ---------------------------------------------------------------------------
// Pseudo-marginal MH on the SV preset

struct PmmhSettings {
  SvPreset preset;
  std::vector<double> variance_T{400, 200};
  std::vector<double> variance_M{50, 100, 200};
  std::size_t variance_replicates = 200;
  /// (T, M) pairs for the chains; T=200 uses the first half of the data.
  std::vector<std::pair<std::size_t, std::size_t>> chains{{400, 50}, {400, 100}, {200, 50}};
  std::size_t chain_replicates = 5;
  std::size_t iterations = 5000;
  std::size_t pilot_iterations = 1000;
  std::size_t pilot_M = 200;

  static PmmhSettings from_config(const Config& cfg);
};

struct LoglikVarianceRow {
  std::size_t T = 0;
  std::size_t M = 0;
  double variance = 0.0;
};

struct PmmhChainRow {
  std::size_t T = 0;
  std::size_t M = 0;
  std::size_t replicate = 0;
  double acceptance = 0.0;
  std::size_t max_run = 0;
  double mean_log_sigma = 0.0;
};

struct PmmhResult {
  std::vector<LoglikVarianceRow> variances;
  std::vector<PmmhChainRow> chains;
  std::vector<ChainTrace> traces;  ///< replicate 0 of each (T, M) pair
  Eigen::MatrixXd covariance;      ///< pilot estimate of V for T = max
};

/// Simulates one data set of length preset.T from `rng`; variance replicates
/// and chains all use it.
PmmhResult run_pmmh_demo(const PmmhSettings& s, const RngStream& rng, std::size_t threads,
                         bool run_variances = true, bool run_chains = true);
Table loglik_variance_table(const std::vector<LoglikVarianceRow>& rows);
Table pmmh_chain_table(const std::vector<PmmhChainRow>& rows);

// ---------------------------------------------------------------------------
// Particle Gibbs path degeneracy

struct PgibbsSettings {
  SvPreset preset;
  std::size_t M = 100;
  std::size_t iterations = 1000;
  bool update_theta = true;

  static PgibbsSettings from_config(const Config& cfg);
};

struct PgibbsResult {
  std::vector<double> rate_plain;     ///< per-time update rate without ancestor sampling
  std::vector<double> rate_ancestor;  ///< with ancestor sampling
  ChainTrace trace_plain;
  ChainTrace trace_ancestor;
};

PgibbsResult run_pgibbs_demo(const PgibbsSettings& s, const RngStream& rng, std::size_t threads);
Table pgibbs_table(const PgibbsResult& r);

// ---------------------------------------------------------------------------

/// Names accepted by run_named_experiment.
const std::vector<std::string>& experiment_names();

/// Runs experiment `name` with settings from `cfg`, writing CSVs to `out_dir`.
/// Returns the list of files written.
std::vector<std::string> run_named_experiment(const std::string& name, const Config& cfg,
                                              std::uint64_t seed, std::size_t threads,
                                              const std::string& out_dir);

/// Header lines recorded at the top of every output file.
std::vector<std::string> provenance_header(const Config& cfg, std::uint64_t seed);

}  // namespace ssmcmc
