#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssmcmc/config.hpp"
#include "ssmcmc/data_io.hpp"
#include "ssmcmc/diagnostics.hpp"
#include "ssmcmc/experiments.hpp"

namespace ssmcmc {

/// Model section of a config. `model.kind` is "sv" or "hmm".
///
///   sv:  model.beta, model.phi, model.sigma, model.n (defaults: the SV preset)
///   hmm: model.alpha, model.beta, model.n (DNA model; defaults 0.11, 0.11, 200)
struct ModelSpec {
  std::string kind = "sv";
  std::size_t n = 400;
  SvParams sv{1.0, 0.98, 0.2};
  double alpha = 0.11;
  double beta_sep = 0.11;
  SvPrior prior;

  static ModelSpec from_config(const Config& cfg);
  [[nodiscard]] HmmParams hmm() const { return dna_params(alpha, beta_sep); }
};

/// Simulates a data set from the model section.
DataSet simulate_data(const ModelSpec& spec, std::uint64_t seed);

/// Algorithms accepted by `algorithm.kind`.
const std::vector<std::string>& algorithm_names();

struct RunResult {
  ChainTrace trace;
  /// Two columns, statistic and value.
  Table summary;
};

/// Runs `algorithm.kind` on `data`. Parameters the algorithm does not sample
/// are held at the values in the model section.
/// Single chains are sequential.
RunResult run_algorithm(const Config& cfg, const DataSet& data, std::uint64_t seed);

}  // namespace ssmcmc
