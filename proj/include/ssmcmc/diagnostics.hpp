#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ssmcmc {

struct TraceMeta {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::size_t burn_in = 0;
};

/// Per-iteration record of a chain: parameter values on the natural scale,
/// the (estimated) log posterior, the acceptance flag and optionally a path
/// or a strided subset of it.
struct ChainTrace {
  std::vector<std::string> names;
  std::vector<std::vector<double>> theta;
  std::vector<double> log_post;
  std::vector<std::uint8_t> accepted;
  std::vector<std::vector<double>> paths;
  std::size_t path_stride = 1;
  TraceMeta meta;

  [[nodiscard]] std::size_t size() const { return theta.size(); }
  [[nodiscard]] bool has_paths() const { return !paths.empty(); }
  void append(std::vector<double> values, double lp, bool acc);
  /// Column of theta component `j` from iteration `from` on.
  [[nodiscard]] std::vector<double> column(std::size_t j, std::size_t from = 0) const;
  [[nodiscard]] std::vector<double> column(const std::string& name, std::size_t from = 0) const;
};

/// Default burn-in: 10% of the iterations.
std::size_t default_burn_in(std::size_t iterations);

/// CSV with columns iteration, theta..., log_post, accepted[, x_1...]. Values
/// are written with 17 significant digits so a read-back is exact.
void write_trace_csv(const ChainTrace& trace, std::ostream& os,
                     const std::vector<std::string>& header_comments = {});
ChainTrace read_trace_csv(std::istream& is);

// ---------------------------------------------------------------------------

double mean(std::span<const double> v);
/// Sample variance with 1/(N-1) normalisation.
double variance(std::span<const double> v);

/// Lag-1 autocorrelation with the biased (1/N) autocovariance.
double lag1_acf(std::span<const double> series);

std::size_t hamming(std::span<const int> a, std::span<const int> b);
double state_mse(std::span<const double> path, std::span<const double> truth);

/// Fraction of accepted moves among iterations [from, end).
double acceptance_rate(const ChainTrace& trace, std::size_t from = 0);
/// Longest run of consecutive identical theta rows.
std::size_t max_run_length(const ChainTrace& trace, std::size_t from = 0);
/// For each time index, the fraction of consecutive path pairs in which x_t changed.
std::vector<double> update_rate_per_time(const std::vector<std::vector<double>>& paths);

/// Standard error of the mean by non-overlapping batch means.
double batch_means_se(std::span<const double> series, std::size_t batches = 25);

}  // namespace ssmcmc
