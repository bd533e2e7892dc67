#include "ssmcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ssmcmc {

void ChainTrace::append(std::vector<double> values, double lp, bool acc) {
  theta.push_back(std::move(values));
  log_post.push_back(lp);
  accepted.push_back(acc ? 1 : 0);
}

std::vector<double> ChainTrace::column(std::size_t j, std::size_t from) const {
  std::vector<double> out;
  for (std::size_t i = from; i < theta.size(); ++i) {
    out.push_back(theta[i].at(j));
  }
  return out;
}

std::vector<double> ChainTrace::column(const std::string& name, std::size_t from) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw std::invalid_argument("ChainTrace: no column '" + name + "'");
  }
  return column(static_cast<std::size_t>(it - names.begin()), from);
}

std::size_t default_burn_in(std::size_t iterations) { return iterations / 10; }

namespace {

void put(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_trace_csv(const ChainTrace& trace, std::ostream& os,
                     const std::vector<std::string>& header_comments) {
  for (const auto& c : header_comments) {
    os << "# " << c << '\n';
  }
  os << "# seed=" << trace.meta.seed << '\n';
  os << "# config_hash=" << trace.meta.config_hash << '\n';
  os << "# burn_in=" << trace.meta.burn_in << '\n';
  os << "# path_stride=" << trace.path_stride << '\n';
  os << "iteration";
  for (const auto& n : trace.names) {
    os << ',' << n;
  }
  os << ",log_post,accepted";
  const std::size_t path_cols = trace.has_paths() ? trace.paths.front().size() : 0;
  for (std::size_t j = 0; j < path_cols; ++j) {
    os << ",x_" << j * trace.path_stride + 1;
  }
  os << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) {
    os << i;
    for (double v : trace.theta[i]) {
      os << ',';
      put(os, v);
    }
    os << ',';
    put(os, trace.log_post[i]);
    os << ',' << static_cast<int>(trace.accepted[i]);
    if (path_cols > 0) {
      for (double v : trace.paths[i]) {
        os << ',';
        put(os, v);
      }
    }
    os << '\n';
  }
}

ChainTrace read_trace_csv(std::istream& is) {
  ChainTrace trace;
  std::string line;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "seed") trace.meta.seed = std::stoull(value);
      else if (key == "config_hash") trace.meta.config_hash = value;
      else if (key == "burn_in") trace.meta.burn_in = std::stoull(value);
      else if (key == "path_stride") trace.path_stride = std::stoull(value);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
    break;
  }
  const auto lp_pos = std::find(header.begin(), header.end(), "log_post");
  if (header.empty() || header.front() != "iteration" || lp_pos == header.end()) {
    throw std::runtime_error("read_trace_csv: malformed header");
  }
  const auto n_theta = static_cast<std::size_t>(lp_pos - header.begin()) - 1;
  trace.names.assign(header.begin() + 1, lp_pos);
  const std::size_t n_path = header.size() - n_theta - 3;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != header.size()) {
      throw std::runtime_error("read_trace_csv: ragged row");
    }
    trace.append(std::vector<double>(row.begin() + 1, row.begin() + 1 + n_theta),
                 row[1 + n_theta], row[2 + n_theta] != 0.0);
    if (n_path > 0) {
      trace.paths.emplace_back(row.begin() + 3 + n_theta, row.end());
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------

double mean(std::span<const double> v) {
  if (v.empty()) {
    throw std::invalid_argument("mean: empty sequence");
  }
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) {
    throw std::invalid_argument("variance: need at least 2 values");
  }
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double lag1_acf(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 3) {
    throw std::invalid_argument("lag1_acf: need at least 3 values");
  }
  const double m = mean(series);
  double c0 = 0.0;
  double c1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = series[i] - m;
    c0 += d * d;
    if (i + 1 < n) {
      c1 += d * (series[i + 1] - m);
    }
  }
  if (!(c0 > 1e-300) || c0 <= 1e-24 * m * m * static_cast<double>(n)) {
    throw std::domain_error("lag1_acf: zero variance");
  }
  return c1 / c0;
}

std::size_t hamming(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("hamming: length mismatch");
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += a[i] != b[i] ? 1 : 0;
  }
  return d;
}

double state_mse(std::span<const double> path, std::span<const double> truth) {
  if (path.size() != truth.size() || path.empty()) {
    throw std::invalid_argument("state_mse: length mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double d = path[i] - truth[i];
    s += d * d;
  }
  return s / static_cast<double>(path.size());
}

double acceptance_rate(const ChainTrace& trace, std::size_t from) {
  if (from >= trace.size()) {
    throw std::invalid_argument("acceptance_rate: empty trace");
  }
  std::size_t acc = 0;
  for (std::size_t i = from; i < trace.size(); ++i) acc += trace.accepted[i];
  return static_cast<double>(acc) / static_cast<double>(trace.size() - from);
}

std::size_t max_run_length(const ChainTrace& trace, std::size_t from) {
  if (from >= trace.size()) {
    throw std::invalid_argument("max_run_length: empty trace");
  }
  std::size_t best = 1;
  std::size_t run = 1;
  for (std::size_t i = from + 1; i < trace.size(); ++i) {
    run = trace.theta[i] == trace.theta[i - 1] ? run + 1 : 1;
    best = std::max(best, run);
  }
  return best;
}

std::vector<double> update_rate_per_time(const std::vector<std::vector<double>>& paths) {
  if (paths.size() < 2) {
    throw std::invalid_argument("update_rate_per_time: need at least 2 paths");
  }
  const std::size_t n = paths.front().size();
  std::vector<double> rate(n, 0.0);
  for (std::size_t i = 1; i < paths.size(); ++i) {
    for (std::size_t t = 0; t < n; ++t) {
      rate[t] += paths[i][t] != paths[i - 1][t] ? 1.0 : 0.0;
    }
  }
  for (double& r : rate) r /= static_cast<double>(paths.size() - 1);
  return rate;
}

double batch_means_se(std::span<const double> series, std::size_t batches) {
  if (batches < 2 || series.size() < 2 * batches) {
    throw std::invalid_argument("batch_means_se: series too short");
  }
  const std::size_t len = series.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    means[b] = mean(series.subspan(b * len, len));
  }
  return std::sqrt(variance(means) / static_cast<double>(batches));
}

}  // namespace ssmcmc
