#include "ssmcmc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "ssmcmc/diagnostics.hpp"
#include "ssmcmc/exact_hmm.hpp"
#include "ssmcmc/parallel.hpp"
#include "ssmcmc/smc.hpp"

namespace ssmcmc {

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("Table::add: row width differs from header");
  }
  rows.push_back(std::move(row));
}

void Table::write(std::ostream& os, const std::vector<std::string>& header_comments) const {
  for (const auto& c : header_comments) {
    os << "# " << c << '\n';
  }
  for (std::size_t j = 0; j < columns.size(); ++j) {
    os << (j ? "," : "") << columns[j];
  }
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      os << (j ? "," : "") << r[j];
    }
    os << '\n';
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

std::string fmt(std::size_t v) { return std::to_string(v); }

std::vector<std::size_t> as_sizes(const std::vector<double>& v, const char* what) {
  std::vector<std::size_t> out;
  for (double d : v) {
    if (!(d >= 1.0) || d != std::floor(d)) {
      throw ConfigError(std::string(what) + ": expected positive integers");
    }
    out.push_back(static_cast<std::size_t>(d));
  }
  return out;
}

std::size_t get_count(const Config& cfg, const std::string& key, std::size_t fallback) {
  const long long v = cfg.get_int(key, static_cast<long long>(fallback));
  if (v < 0) {
    throw ConfigError("config key '" + key + "' must be non-negative");
  }
  return static_cast<std::size_t>(v);
}

double acf_or_nan(const std::vector<double>& series) {
  try {
    return lag1_acf(series);
  } catch (const std::domain_error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<double> linspace(double lo, double hi, std::size_t k) {
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = k == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

HmmAcfSettings HmmAcfSettings::from_config(const Config& cfg) {
  HmmAcfSettings s;
  s.alphas = cfg.get_list("fig_hmm_acf.alphas", linspace(0.02, 0.5, 10));
  s.betas = cfg.get_list("fig_hmm_acf.betas", s.betas);
  s.ns = cfg.get_list("fig_hmm_acf.ns", s.ns);
  s.replicates = get_count(cfg, "fig_hmm_acf.replicates", s.replicates);
  s.iterations = get_count(cfg, "fig_hmm_acf.iterations", s.iterations);
  s.burn_in = get_count(cfg, "fig_hmm_acf.burn_in", s.burn_in);
  return s;
}

std::vector<HmmAcfRow> run_hmm_acf(const HmmAcfSettings& s0, const RngStream& rng,
                                   std::size_t threads) {
  HmmAcfSettings s = s0;
  if (s.alphas.empty()) s.alphas = linspace(0.02, 0.5, 10);
  const auto ns = as_sizes(s.ns, "fig_hmm_acf.ns");
  if (s.burn_in + 3 > s.iterations) {
    throw ConfigError("fig_hmm_acf: need iterations >= burn_in + 3");
  }
  std::vector<HmmAcfRow> rows;
  for (std::size_t ia = 0; ia < s.alphas.size(); ++ia)
    for (std::size_t ib = 0; ib < s.betas.size(); ++ib)
      for (std::size_t in = 0; in < ns.size(); ++in)
        for (std::size_t r = 0; r < s.replicates; ++r)
          rows.push_back({s.alphas[ia], s.betas[ib], ns[in], r, 0.0, 0.0});

  parallel_for(rows.size(), threads, [&](std::size_t j) {
    HmmAcfRow& row = rows[j];
    const HmmParams hmm = dna_params(row.alpha, row.beta);
    const RngStream base = rng.split(j);
    RngStream r_sim = base.split(0);
    const auto sim = hmm_simulate(hmm, row.n, r_sim);
    RngStream r_init = base.split(1);
    StatePath path = backward_sample(forward_filter(hmm, sim.y), hmm, r_init);
    RngStream r_chain = base.split(2);
    std::vector<double> series;
    series.reserve(s.iterations - s.burn_in);
    for (std::size_t it = 0; it < s.iterations; ++it) {
      path = hmm_single_site_sweep(std::move(path), sim.y, hmm, r_chain);
      if (it >= s.burn_in) {
        series.push_back(static_cast<double>(hamming(path, sim.x)));
      }
    }
    row.acf = acf_or_nan(series);
    row.mean_hamming = mean(series);
  });
  return rows;
}

Table hmm_acf_table(const std::vector<HmmAcfRow>& rows) {
  Table t{{"alpha", "beta", "n", "replicate", "acf_hamming", "mean_hamming"}, {}};
  for (const auto& r : rows) {
    t.add({fmt(r.alpha), fmt(r.beta), fmt(r.n), fmt(r.replicate), fmt(r.acf), fmt(r.mean_hamming)});
  }
  return t;
}

// ---------------------------------------------------------------------------

SvAcfSettings SvAcfSettings::from_config(const Config& cfg) {
  SvAcfSettings s;
  s.phis = cfg.get_list("fig_sv_acf.phis", s.phis);
  s.tau2s = cfg.get_list("fig_sv_acf.tau2s", s.tau2s);
  s.ns = cfg.get_list("fig_sv_acf.ns", s.ns);
  s.beta = cfg.get_double("fig_sv_acf.beta", s.beta);
  s.replicates = get_count(cfg, "fig_sv_acf.replicates", s.replicates);
  s.iterations = get_count(cfg, "fig_sv_acf.iterations", s.iterations);
  s.burn_in = get_count(cfg, "fig_sv_acf.burn_in", s.burn_in);
  return s;
}

std::vector<SvAcfRow> run_sv_acf(const SvAcfSettings& s, const RngStream& rng,
                                 std::size_t threads) {
  const auto ns = as_sizes(s.ns, "fig_sv_acf.ns");
  if (s.burn_in + 3 > s.iterations) {
    throw ConfigError("fig_sv_acf: need iterations >= burn_in + 3");
  }
  std::vector<SvAcfRow> rows;
  for (double phi : s.phis)
    for (double tau2 : s.tau2s)
      for (std::size_t n : ns)
        for (std::size_t r = 0; r < s.replicates; ++r) rows.push_back({phi, tau2, n, r, 0.0, 0.0});

  parallel_for(rows.size(), threads, [&](std::size_t j) {
    SvAcfRow& row = rows[j];
    const SvParams params{s.beta, row.phi, std::sqrt(row.tau2 * (1.0 - row.phi * row.phi))};
    params.validate();
    const RngStream base = rng.split(j);
    RngStream r_sim = base.split(0);
    const auto sim = sv_simulate(params, row.n, r_sim);
    RngStream r_chain = base.split(1);
    RealPath x = sim.x;
    std::vector<double> series;
    std::size_t accepted = 0;
    for (std::size_t it = 0; it < s.iterations; ++it) {
      accepted += sv_single_site_sweep(x, sim.y, params, r_chain);
      if (it >= s.burn_in) {
        series.push_back(state_mse(x, sim.x));
      }
    }
    row.acf = acf_or_nan(series);
    row.acceptance =
        static_cast<double>(accepted) / static_cast<double>(s.iterations * row.n);
  });
  return rows;
}

Table sv_acf_table(const std::vector<SvAcfRow>& rows) {
  Table t{{"phi", "tau2", "n", "replicate", "acf_mse", "acceptance"}, {}};
  for (const auto& r : rows) {
    t.add({fmt(r.phi), fmt(r.tau2), fmt(r.n), fmt(r.replicate), fmt(r.acf), fmt(r.acceptance)});
  }
  return t;
}

// ---------------------------------------------------------------------------

BlockAcceptanceSettings BlockAcceptanceSettings::from_config(const Config& cfg) {
  BlockAcceptanceSettings s;
  s.phis = cfg.get_list("fig_block.phis", s.phis);
  s.block_sizes = cfg.get_list("fig_block.block_sizes", s.block_sizes);
  s.tau2 = cfg.get_double("fig_block.tau2", s.tau2);
  s.beta = cfg.get_double("fig_block.beta", s.beta);
  s.n = get_count(cfg, "fig_block.n", s.n);
  s.datasets = get_count(cfg, "fig_block.datasets", s.datasets);
  s.sweeps = get_count(cfg, "fig_block.sweeps", s.sweeps);
  s.refine_iters = static_cast<int>(cfg.get_int("fig_block.refine_iters", s.refine_iters));
  try {
    s.scheme = parse_block_scheme(cfg.get_string("fig_block.scheme", "random"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

std::vector<BlockAcceptanceRow> run_block_acceptance(const BlockAcceptanceSettings& s,
                                                     const RngStream& rng, std::size_t threads) {
  const auto sizes = as_sizes(s.block_sizes, "fig_block.block_sizes");
  for (std::size_t b : sizes) {
    if (b > s.n) throw ConfigError("fig_block: block size exceeds n");
  }
  if (s.sweeps < 1) throw ConfigError("fig_block: sweeps must be >= 1");
  std::vector<BlockAcceptanceRow> rows;
  std::vector<std::pair<std::size_t, std::size_t>> keys;  // (phi index, size index)
  for (std::size_t ip = 0; ip < s.phis.size(); ++ip)
    for (std::size_t ib = 0; ib < sizes.size(); ++ib)
      for (std::size_t d = 0; d < s.datasets; ++d) {
        rows.push_back({s.phis[ip], sizes[ib], d, 0.0});
        keys.emplace_back(ip, ib);
      }

  parallel_for(rows.size(), threads, [&](std::size_t j) {
    BlockAcceptanceRow& row = rows[j];
    const auto [ip, ib] = keys[j];
    const SvParams params{s.beta, row.phi, std::sqrt(s.tau2 * (1.0 - row.phi * row.phi))};
    params.validate();
    // The same data sets are shared across block sizes.
    const RngStream data_key = rng.split(ip, row.dataset);
    RngStream r_sim = data_key.split(0);
    const auto sim = sv_simulate(params, s.n, r_sim);
    RngStream r_chain = data_key.split(1, ib);
    RealPath x = sim.x;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t sweep = 0; sweep < s.sweeps; ++sweep) {
      const BlockSchedule sched = block_schedule(s.n, s.scheme, row.block_size, r_chain);
      const SweepStats st = sv_block_sweep(x, sim.y, params, sched, s.refine_iters, r_chain);
      sum += st.sum_accept_prob;
      count += st.proposals;
    }
    row.mean_acceptance = sum / static_cast<double>(count);
  });
  return rows;
}

Table block_acceptance_table(const std::vector<BlockAcceptanceRow>& rows) {
  Table t{{"phi", "block_size", "dataset", "mean_acceptance"}, {}};
  for (const auto& r : rows) {
    t.add({fmt(r.phi), fmt(r.block_size), fmt(r.dataset), fmt(r.mean_acceptance)});
  }
  return t;
}

// ---------------------------------------------------------------------------

ParameterisationSettings ParameterisationSettings::from_config(const Config& cfg) {
  ParameterisationSettings s;
  s.phis = cfg.get_list("table_param.phis", s.phis);
  s.sigma = cfg.get_double("table_param.sigma", s.sigma);
  s.beta = cfg.get_double("table_param.beta", s.beta);
  s.n = get_count(cfg, "table_param.n", s.n);
  s.replicates = get_count(cfg, "table_param.replicates", s.replicates);
  s.iterations = get_count(cfg, "table_param.iterations", s.iterations);
  s.burn_in = get_count(cfg, "table_param.burn_in", s.burn_in);
  s.gamma_repeats = get_count(cfg, "table_param.gamma_repeats", s.gamma_repeats);
  return s;
}

std::vector<ParameterisationRow> run_parameterisation(const ParameterisationSettings& s,
                                                      const RngStream& rng, std::size_t threads) {
  if (s.iterations < s.burn_in + 1000) {
    throw ConfigError("table_param: need iterations >= burn_in + 1000");
  }
  const Parameterisation kinds[2] = {Parameterisation::noncentered_beta,
                                     Parameterisation::centered_mu};
  std::vector<ParameterisationRow> rows;
  std::vector<std::size_t> phi_index;
  for (std::size_t ip = 0; ip < s.phis.size(); ++ip)
    for (std::size_t r = 0; r < s.replicates; ++r)
      for (auto k : kinds) {
        rows.push_back({s.phis[ip], k, r, 0.0, 0.0, 0.0});
        phi_index.push_back(ip);
      }

  constexpr std::size_t kThin = 10;
  parallel_for(rows.size(), threads, [&](std::size_t j) {
    ParameterisationRow& row = rows[j];
    const SvParams truth{s.beta, row.phi, s.sigma};
    truth.validate();
    const RngStream data_key = rng.split(phi_index[j], row.replicate);
    RngStream r_sim = data_key.split(0);
    const auto sim = sv_simulate(truth, s.n, r_sim);
    const bool centered = row.kind == Parameterisation::centered_mu;
    RngStream r_chain = data_key.split(1, centered ? 1 : 0);

    SvParams p = truth;
    RealPath x = sim.x;  // default representation throughout
    std::vector<double> betas;
    std::vector<double> f_thin;
    std::vector<RealPath> paths_thin;
    std::size_t accepted = 0;
    for (std::size_t it = 0; it < s.iterations; ++it) {
      accepted += sv_single_site_sweep(x, sim.y, p, r_chain);
      if (!centered) {
        p.beta = std::sqrt(sv_sample_beta2(x, sim.y, r_chain));
      } else {
        RealPath xc = reparam_transform(p, x, Parameterisation::noncentered_beta,
                                        Parameterisation::centered_mu);
        const double mu = sv_sample_mu_centered(xc, p.phi, p.sigma, r_chain);
        p.beta = std::exp(0.5 * mu);
        x = reparam_transform(p, xc, Parameterisation::centered_mu,
                              Parameterisation::noncentered_beta);
      }
      if (it >= s.burn_in) {
        betas.push_back(p.beta);
        if ((it - s.burn_in) % kThin == 0) {
          f_thin.push_back(2.0 * std::log(p.beta));
          paths_thin.push_back(centered ? reparam_transform(p, x, Parameterisation::noncentered_beta,
                                                            Parameterisation::centered_mu)
                                        : x);
        }
      }
    }
    row.acf_beta = acf_or_nan(betas);
    row.state_acceptance =
        static_cast<double>(accepted) / static_cast<double>(s.iterations * s.n);

    const std::span<const double> y(sim.y);
    const double phi = p.phi;
    const double sigma = p.sigma;
    auto draw_f = [&](const RealPath& path, RngStream& r) {
      if (centered) {
        return sv_sample_mu_centered(path, phi, sigma, r);
      }
      return std::log(sv_sample_beta2(path, y, r));
    };
    RngStream r_gamma = data_key.split(2, centered ? 1 : 0);
    try {
      row.gamma_f = estimate_gamma_f(std::span<const double>(f_thin),
                                     std::span<const RealPath>(paths_thin), draw_f,
                                     s.gamma_repeats, r_gamma, 1)
                        .gamma;
    } catch (const std::exception&) {
      row.gamma_f = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return rows;
}

Table parameterisation_table(const std::vector<ParameterisationRow>& rows) {
  Table t{{"phi", "parameterisation", "replicate", "acf_beta", "gamma_f", "state_acceptance"}, {}};
  for (const auto& r : rows) {
    t.add({fmt(r.phi), to_string(r.kind), fmt(r.replicate), fmt(r.acf_beta), fmt(r.gamma_f),
           fmt(r.state_acceptance)});
  }
  return t;
}

Table parameterisation_summary(const std::vector<ParameterisationRow>& rows) {
  std::vector<double> phis;
  for (const auto& r : rows) {
    if (std::find(phis.begin(), phis.end(), r.phi) == phis.end()) phis.push_back(r.phi);
  }
  Table t;
  t.columns.push_back("parameterisation");
  for (double phi : phis) t.columns.push_back("phi_" + fmt(phi));
  for (auto kind : {Parameterisation::noncentered_beta, Parameterisation::centered_mu}) {
    std::vector<std::string> cells{to_string(kind)};
    for (double phi : phis) {
      double sum = 0.0;
      std::size_t cnt = 0;
      for (const auto& r : rows) {
        if (r.kind == kind && r.phi == phi && !std::isnan(r.acf_beta)) {
          sum += r.acf_beta;
          ++cnt;
        }
      }
      cells.push_back(fmt(cnt ? sum / static_cast<double>(cnt)
                              : std::numeric_limits<double>::quiet_NaN()));
    }
    t.add(std::move(cells));
  }
  return t;
}

// ---------------------------------------------------------------------------

namespace {

SvPreset preset_from_config(const Config& cfg, const std::string& section) {
  SvPreset p;
  p.T = get_count(cfg, section + ".T", p.T);
  p.truth.beta = cfg.get_double(section + ".beta", p.truth.beta);
  p.truth.phi = cfg.get_double(section + ".phi", p.truth.phi);
  p.truth.sigma = cfg.get_double(section + ".sigma", p.truth.sigma);
  p.prior.a = cfg.get_double(section + ".prior_a", p.prior.a);
  p.prior.b = cfg.get_double(section + ".prior_b", p.prior.b);
  p.prior.s0 = cfg.get_double(section + ".prior_s0", p.prior.s0);
  p.prior.p = cfg.get_double(section + ".prior_p", p.prior.p);
  p.lambda = cfg.get_double(section + ".lambda", p.lambda);
  try {
    p.truth.validate();
    p.prior.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

Simulated<double, double> preset_data(const SvPreset& preset, const RngStream& rng) {
  RngStream r = rng.split(0);
  return sv_simulate(preset.truth, preset.T, r);
}

SvModel sv_model_from_theta(const Eigen::VectorXd& theta) { return SvModel(sv_from_theta(theta)); }

}  // namespace

PmmhSettings PmmhSettings::from_config(const Config& cfg) {
  PmmhSettings s;
  s.preset = preset_from_config(cfg, "pmmh");
  s.variance_T = cfg.get_list("pmmh.variance_T", s.variance_T);
  s.variance_M = cfg.get_list("pmmh.variance_M", s.variance_M);
  s.variance_replicates = get_count(cfg, "pmmh.variance_replicates", s.variance_replicates);
  if (cfg.has("pmmh.chain_T") || cfg.has("pmmh.chain_M")) {
    const auto ts = as_sizes(cfg.get_list("pmmh.chain_T", {}), "pmmh.chain_T");
    const auto ms = as_sizes(cfg.get_list("pmmh.chain_M", {}), "pmmh.chain_M");
    if (ts.size() != ms.size()) throw ConfigError("pmmh.chain_T and pmmh.chain_M differ in length");
    s.chains.clear();
    for (std::size_t i = 0; i < ts.size(); ++i) s.chains.emplace_back(ts[i], ms[i]);
  }
  s.chain_replicates = get_count(cfg, "pmmh.chain_replicates", s.chain_replicates);
  s.iterations = get_count(cfg, "pmmh.iterations", s.iterations);
  s.pilot_iterations = get_count(cfg, "pmmh.pilot_iterations", s.pilot_iterations);
  s.pilot_M = get_count(cfg, "pmmh.pilot_M", s.pilot_M);
  return s;
}

PmmhResult run_pmmh_demo(const PmmhSettings& s, const RngStream& rng, std::size_t threads,
                         bool run_variances, bool run_chains) {
  const auto sim = preset_data(s.preset, rng);
  const std::span<const double> y_all(sim.y);
  const auto var_T = as_sizes(s.variance_T, "pmmh.variance_T");
  const auto var_M = as_sizes(s.variance_M, "pmmh.variance_M");
  PmmhResult out;

  if (run_variances) {
    const SvModel model(s.preset.truth);
    for (std::size_t T : var_T) {
      if (T > s.preset.T) throw ConfigError("pmmh.variance_T exceeds the data length");
      for (std::size_t M : var_M) {
        const double v = estimate_loglik_variance(model, y_all.first(T), M, s.variance_replicates,
                                                  rng.split(1).split(T, M), threads);
        out.variances.push_back({T, M, v});
      }
    }
  }
  if (!run_chains) return out;

  const Eigen::VectorXd init = sv_to_theta(s.preset.truth);
  const SvPrior prior = s.preset.prior;
  auto log_prior = [&](const Eigen::VectorXd& th) { return sv_log_prior_theta(th, prior); };

  // One pilot run per distinct T gives V for the main chains.
  std::map<std::size_t, Eigen::MatrixXd> cov_by_T;
  for (const auto& [T, M] : s.chains) {
    if (T > s.preset.T) throw ConfigError("pmmh chain T exceeds the data length");
    if (cov_by_T.count(T)) continue;
    Eigen::MatrixXd pilot_cov = Eigen::Vector3d(0.01, 0.25, 0.04).asDiagonal();
    ChainOptions opt;
    opt.iterations = std::max<std::size_t>(s.pilot_iterations, 20);
    opt.store_paths = false;
    const RWProposal rw(1.0, pilot_cov);
    const ChainTrace pilot = pmmh(log_prior, rw, sv_model_from_theta, y_all.first(T), s.pilot_M,
                                  init, rng.split(2, T), opt, detail::to_std);
    std::vector<Eigen::VectorXd> draws;
    for (std::size_t i = pilot.meta.burn_in; i < pilot.size(); ++i) {
      draws.push_back(Eigen::Map<const Eigen::VectorXd>(pilot.theta[i].data(), 3));
    }
    cov_by_T[T] = proposal_covariance(draws);
  }
  out.covariance = cov_by_T.rbegin()->second;

  struct Job {
    std::size_t T, M, rep;
  };
  std::vector<Job> jobs;
  for (const auto& [T, M] : s.chains)
    for (std::size_t r = 0; r < s.chain_replicates; ++r) jobs.push_back({T, M, r});
  std::vector<ChainTrace> traces(jobs.size());
  out.chains.resize(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    const RWProposal rw(s.preset.lambda, cov_by_T.at(job.T));
    ChainOptions opt;
    opt.iterations = s.iterations;
    opt.store_paths = false;
    opt.names = {"beta", "phi", "sigma"};
    traces[j] = pmmh(log_prior, rw, sv_model_from_theta, y_all.first(job.T), job.M, init,
                     rng.split(3).split(job.T, job.M).split(job.rep), opt, sv_report);
    const ChainTrace& tr = traces[j];
    PmmhChainRow& row = out.chains[j];
    row.T = job.T;
    row.M = job.M;
    row.replicate = job.rep;
    row.acceptance = acceptance_rate(tr, tr.meta.burn_in);
    row.max_run = max_run_length(tr, tr.meta.burn_in);
    double acc = 0.0;
    for (std::size_t i = tr.meta.burn_in; i < tr.size(); ++i) acc += std::log(tr.theta[i][2]);
    row.mean_log_sigma = acc / static_cast<double>(tr.size() - tr.meta.burn_in);
  });
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (jobs[j].rep == 0) out.traces.push_back(std::move(traces[j]));
  }
  return out;
}

Table loglik_variance_table(const std::vector<LoglikVarianceRow>& rows) {
  Table t{{"T", "M", "var_loglik"}, {}};
  for (const auto& r : rows) t.add({fmt(r.T), fmt(r.M), fmt(r.variance)});
  return t;
}

Table pmmh_chain_table(const std::vector<PmmhChainRow>& rows) {
  Table t{{"T", "M", "replicate", "acceptance", "max_run", "mean_log_sigma"}, {}};
  for (const auto& r : rows) {
    t.add({fmt(r.T), fmt(r.M), fmt(r.replicate), fmt(r.acceptance), fmt(r.max_run),
           fmt(r.mean_log_sigma)});
  }
  return t;
}

// ---------------------------------------------------------------------------

PgibbsSettings PgibbsSettings::from_config(const Config& cfg) {
  PgibbsSettings s;
  s.preset = preset_from_config(cfg, "pgibbs");
  s.M = get_count(cfg, "pgibbs.M", s.M);
  s.iterations = get_count(cfg, "pgibbs.iterations", s.iterations);
  s.update_theta = cfg.get_bool("pgibbs.update_theta", s.update_theta);
  return s;
}

PgibbsResult run_pgibbs_demo(const PgibbsSettings& s, const RngStream& rng, std::size_t threads) {
  const auto sim = preset_data(s.preset, rng);
  const std::span<const double> y(sim.y);
  const SvPrior prior = s.preset.prior;
  const SvModel truth_model(s.preset.truth);
  RngStream r_init = rng.split(4);
  const auto init_ps = bootstrap_filter(truth_model, y, s.M, rng.split(5));
  const RealPath init_path = csmc_select_path(init_ps, r_init);

  auto theta_step = [&](const SvParams& p, const RealPath& x, RngStream& r) {
    return s.update_theta ? sv_conditional_theta_step(p, x, y, prior, r) : p;
  };
  auto make_model = [](const SvParams& p) { return SvModel(p); };
  auto report = [](const SvParams& p) { return std::vector<double>{p.beta, p.phi, p.sigma}; };

  PgibbsResult out;
  ChainTrace* targets[2] = {&out.trace_plain, &out.trace_ancestor};
  parallel_for(2, threads, [&](std::size_t v) {
    ChainOptions opt;
    opt.iterations = s.iterations;
    opt.names = {"beta", "phi", "sigma"};
    *targets[v] = particle_gibbs(theta_step, make_model, y, s.M, s.preset.truth, init_path,
                                 rng.split(6, v), v == 1, opt, report);
  });
  auto rates = [](const ChainTrace& tr) {
    std::vector<std::vector<double>> kept(tr.paths.begin() + static_cast<std::ptrdiff_t>(tr.meta.burn_in),
                                          tr.paths.end());
    return update_rate_per_time(kept);
  };
  out.rate_plain = rates(out.trace_plain);
  out.rate_ancestor = rates(out.trace_ancestor);
  return out;
}

Table pgibbs_table(const PgibbsResult& r) {
  Table t{{"t", "rate_no_ancestor_sampling", "rate_ancestor_sampling"}, {}};
  for (std::size_t i = 0; i < r.rate_plain.size(); ++i) {
    t.add({fmt(i + 1), fmt(r.rate_plain[i]), fmt(r.rate_ancestor[i])});
  }
  return t;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"fig-hmm-acf",           "fig-sv-acf",
                                              "fig-block-acceptance",  "table-parameterisation",
                                              "pmmh-demo",             "pgibbs-demo"};
  return names;
}

std::vector<std::string> provenance_header(const Config& cfg, std::uint64_t seed) {
  return {"ssmcmc " SSMCMC_VERSION, "config_hash=" + cfg.hash(), "seed=" + std::to_string(seed)};
}

namespace {

std::string write_table(const Table& t, const std::string& dir, const std::string& file,
                        const std::vector<std::string>& header) {
  const std::string path = (std::filesystem::path(dir) / file).string();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  t.write(os, header);
  return path;
}

std::string write_trace(const ChainTrace& tr, const std::string& dir, const std::string& file,
                        const std::vector<std::string>& header) {
  const std::string path = (std::filesystem::path(dir) / file).string();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  write_trace_csv(tr, os, header);
  return path;
}

}  // namespace

std::vector<std::string> run_named_experiment(const std::string& name, const Config& cfg,
                                              std::uint64_t seed, std::size_t threads,
                                              const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto header = provenance_header(cfg, seed);
  const RngStream rng(seed);
  std::vector<std::string> files;
  if (name == "fig-hmm-acf") {
    const auto rows = run_hmm_acf(HmmAcfSettings::from_config(cfg), rng, threads);
    files.push_back(write_table(hmm_acf_table(rows), out_dir, "fig_hmm_acf.csv", header));
  } else if (name == "fig-sv-acf") {
    const auto rows = run_sv_acf(SvAcfSettings::from_config(cfg), rng, threads);
    files.push_back(write_table(sv_acf_table(rows), out_dir, "fig_sv_acf.csv", header));
  } else if (name == "fig-block-acceptance") {
    const auto rows = run_block_acceptance(BlockAcceptanceSettings::from_config(cfg), rng, threads);
    files.push_back(
        write_table(block_acceptance_table(rows), out_dir, "fig_block_acceptance.csv", header));
  } else if (name == "table-parameterisation") {
    const auto rows = run_parameterisation(ParameterisationSettings::from_config(cfg), rng, threads);
    files.push_back(
        write_table(parameterisation_table(rows), out_dir, "table_parameterisation.csv", header));
    files.push_back(write_table(parameterisation_summary(rows), out_dir,
                                "table_parameterisation_summary.csv", header));
  } else if (name == "pmmh-demo") {
    const auto settings = PmmhSettings::from_config(cfg);
    const auto res = run_pmmh_demo(settings, rng, threads);
    files.push_back(write_table(loglik_variance_table(res.variances), out_dir,
                                "pmmh_loglik_variance.csv", header));
    files.push_back(write_table(pmmh_chain_table(res.chains), out_dir, "pmmh_chains.csv", header));
    for (std::size_t i = 0; i < res.traces.size(); ++i) {
      const auto [T, M] = settings.chains[i];
      files.push_back(write_trace(res.traces[i], out_dir,
                                  "pmmh_trace_T" + std::to_string(T) + "_M" + std::to_string(M) +
                                      ".csv",
                                  header));
    }
  } else if (name == "pgibbs-demo") {
    const auto res = run_pgibbs_demo(PgibbsSettings::from_config(cfg), rng, threads);
    files.push_back(write_table(pgibbs_table(res), out_dir, "pgibbs_update_rates.csv", header));
  } else {
    std::string valid;
    for (const auto& n : experiment_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown experiment '" + name + "'; valid names: " + valid);
  }
  return files;
}

}  // namespace ssmcmc
