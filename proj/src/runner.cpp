#include "ssmcmc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ssmcmc/exact_hmm.hpp"
#include "ssmcmc/param_updates.hpp"
#include "ssmcmc/pmcmc.hpp"
#include "ssmcmc/smc.hpp"
#include "ssmcmc/state_updates.hpp"

namespace ssmcmc {

namespace {

constexpr std::uint64_t kInitStream = 0xffff'fffeULL;
constexpr std::uint64_t kPilotStream = 0xffff'fffdULL;

std::size_t count_key(const Config& cfg, const std::string& key, std::size_t fallback,
                      std::size_t min_value = 0) {
  const long long v = cfg.get_int(key, static_cast<long long>(fallback));
  if (v < static_cast<long long>(min_value)) {
    throw ConfigError("config key '" + key + "' must be >= " + std::to_string(min_value));
  }
  return static_cast<std::size_t>(v);
}

ChainOptions chain_options(const Config& cfg, std::vector<std::string> names) {
  ChainOptions opt;
  opt.iterations = count_key(cfg, "algorithm.iterations", 1000, 1);
  if (cfg.has("algorithm.burn_in")) {
    opt.burn_in = count_key(cfg, "algorithm.burn_in", 0);
    if (opt.burn_in >= opt.iterations) {
      throw ConfigError("algorithm.burn_in must be smaller than algorithm.iterations");
    }
  }
  opt.store_paths = cfg.get_bool("algorithm.store_paths", false);
  opt.path_stride = count_key(cfg, "algorithm.path_stride", 1, 1);
  opt.names = std::move(names);
  return opt;
}

void start(ChainTrace& tr, const ChainOptions& opt, std::uint64_t seed) {
  tr.names = opt.names;
  tr.meta.seed = seed;
  tr.meta.burn_in = opt.burn_in == std::numeric_limits<std::size_t>::max()
                        ? default_burn_in(opt.iterations)
                        : opt.burn_in;
  tr.path_stride = opt.path_stride;
}

template <class T>
void maybe_store(ChainTrace& tr, const ChainOptions& opt, const std::vector<T>& path) {
  if (!opt.store_paths) return;
  std::vector<double> row;
  for (std::size_t t = 0; t < path.size(); t += opt.path_stride) {
    row.push_back(static_cast<double>(path[t]));
  }
  tr.paths.push_back(std::move(row));
}

void require_model(const DataSet& data, const std::string& kind, const std::string& algorithm) {
  if (data.model != kind) {
    throw ConfigError("algorithm '" + algorithm + "' needs " + kind + " data, got '" + data.model +
                      "'");
  }
}

Table summarise(const ChainTrace& tr, const std::vector<std::pair<std::string, double>>& extra) {
  Table t{{"statistic", "value"}, {}};
  const std::size_t from = tr.meta.burn_in;
  t.add({"iterations", std::to_string(tr.size())});
  t.add({"burn_in", std::to_string(from)});
  t.add({"acceptance_rate", fmt(acceptance_rate(tr, from))});
  t.add({"max_run_length", std::to_string(max_run_length(tr, from))});
  for (std::size_t j = 0; j < tr.names.size(); ++j) {
    const auto col = tr.column(j, from);
    t.add({"mean_" + tr.names[j], fmt(mean(col))});
    double acf = std::numeric_limits<double>::quiet_NaN();
    if (col.size() >= 3) {
      try {
        acf = lag1_acf(col);
      } catch (const std::domain_error&) {
      }
    }
    t.add({"lag1_acf_" + tr.names[j], fmt(acf)});
  }
  for (const auto& [k, v] : extra) t.add({k, fmt(v)});
  return t;
}

double log_sigma_prior(double sigma, const SvPrior& prior) {
  return -prior.p * std::log(sigma) - prior.s0 / (2.0 * sigma * sigma);
}

// ---------------------------------------------------------------------------

RunResult run_hmm_single_site(const Config& cfg, const DataSet& data, const ModelSpec& spec,
                              std::uint64_t seed) {
  const HmmParams hmm = spec.hmm();
  const ChainOptions opt = chain_options(cfg, {"hamming"});
  const RngStream rng(seed);
  RngStream r_init = rng.split(kInitStream);
  StatePath path = hmm_simulate(hmm, data.size(), r_init).x;
  RunResult out;
  start(out.trace, opt, seed);
  for (std::size_t i = 0; i < opt.iterations; ++i) {
    RngStream r = rng.split(i);
    StatePath next = hmm_single_site_sweep(path, data.y_symbol, hmm, r);
    const bool moved = next != path;
    path = std::move(next);
    out.trace.append({static_cast<double>(hamming(path, data.x_state))},
                     hmm_log_joint(path, data.y_symbol, hmm), moved);
    maybe_store(out.trace, opt, path);
  }
  out.summary = summarise(out.trace, {});
  return out;
}

RunResult run_hmm_fb(const Config& cfg, const DataSet& data, const ModelSpec& spec,
                     std::uint64_t seed) {
  const HmmParams hmm = spec.hmm();
  const HmmParams hat = dna_params(cfg.get_double("algorithm.alpha_hat", spec.alpha),
                                   cfg.get_double("algorithm.beta_hat", spec.beta_sep));
  const FixedThetaPathSampler sampler(hat, data.y_symbol);
  const ChainOptions opt = chain_options(cfg, {"hamming"});
  const RngStream rng(seed);
  RngStream r_init = rng.split(kInitStream);
  StatePath path = sampler.propose(r_init);
  RunResult out;
  start(out.trace, opt, seed);
  for (std::size_t i = 0; i < opt.iterations; ++i) {
    RngStream r = rng.split(i);
    PathUpdate u = sampler.update(path, hmm, data.y_symbol, r);
    path = std::move(u.path);
    out.trace.append({static_cast<double>(hamming(path, data.x_state))},
                     hmm_log_joint(path, data.y_symbol, hmm), u.accepted);
    maybe_store(out.trace, opt, path);
  }
  out.summary = summarise(out.trace, {});
  return out;
}

RunResult run_hmm_gibbs(const Config& cfg, const DataSet& data, const ModelSpec& spec,
                        std::uint64_t seed) {
  HmmParams theta = spec.hmm();
  const int k = theta.num_states();
  const int s = theta.num_symbols();
  const DirichletPrior prior =
      DirichletPrior::uniform(k, s, cfg.get_double("algorithm.dirichlet", 1.0));
  std::vector<std::string> names;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) names.push_back("P_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < s; ++j) names.push_back("E_" + std::to_string(i + 1) + "_" + dna_symbol(j));
  const ChainOptions opt = chain_options(cfg, names);
  const RngStream rng(seed);
  RunResult out;
  start(out.trace, opt, seed);
  for (std::size_t i = 0; i < opt.iterations; ++i) {
    const RngStream it = rng.split(i);
    RngStream r_path = it.split(0);
    RngStream r_theta = it.split(1);
    const StatePath path = backward_sample(forward_filter(theta, data.y_symbol), theta, r_path);
    theta = hmm_sample_conditionals(path, data.y_symbol, prior, theta.initial, r_theta);
    std::vector<double> row;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) row.push_back(theta.transition(a, b));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < s; ++b) row.push_back(theta.emission(a, b));
    out.trace.append(std::move(row), hmm_log_joint(path, data.y_symbol, theta), true);
    maybe_store(out.trace, opt, path);
  }
  out.summary = summarise(out.trace, {});
  return out;
}

// ---------------------------------------------------------------------------

struct SvStateKernel {
  bool block = false;
  std::size_t block_size = 50;
  BlockScheme scheme = BlockScheme::random;
  int refine_iters = 2;
  std::size_t proposals = 0;
  std::size_t accepted = 0;

  static SvStateKernel from_config(const Config& cfg, bool block) {
    SvStateKernel k;
    k.block = block;
    k.block_size = count_key(cfg, "algorithm.block_size", 50, 1);
    k.refine_iters = static_cast<int>(count_key(cfg, "algorithm.refine_iters", 2));
    try {
      k.scheme = parse_block_scheme(cfg.get_string("algorithm.block_scheme", "random"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return k;
  }

  /// One sweep; returns whether any coordinate moved.
  bool sweep(RealPath& x, std::span<const double> y, const SvParams& p, RngStream& rng) {
    if (!block) {
      const std::size_t a = sv_single_site_sweep(x, y, p, rng);
      proposals += x.size();
      accepted += a;
      return a > 0;
    }
    if (block_size > x.size()) {
      throw ConfigError("algorithm.block_size exceeds the data length");
    }
    const BlockSchedule sched = block_schedule(x.size(), scheme, block_size, rng);
    const SweepStats st = sv_block_sweep(x, y, p, sched, refine_iters, rng);
    proposals += st.proposals;
    accepted += st.accepted;
    return st.accepted > 0;
  }

  [[nodiscard]] double rate() const {
    return proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
  }
};

RunResult run_sv_states(const Config& cfg, const DataSet& data, const ModelSpec& spec,
                        std::uint64_t seed, bool block) {
  const SvParams p = spec.sv;
  SvStateKernel kernel = SvStateKernel::from_config(cfg, block);
  const ChainOptions opt = chain_options(cfg, {"mse"});
  const RngStream rng(seed);
  RngStream r_init = rng.split(kInitStream);
  RealPath x = sv_simulate(p, data.size(), r_init).x;
  RunResult out;
  start(out.trace, opt, seed);
  for (std::size_t i = 0; i < opt.iterations; ++i) {
    RngStream r = rng.split(i);
    const bool moved = kernel.sweep(x, data.y_real, p, r);
    out.trace.append({state_mse(x, data.x_real)}, sv_log_joint(x, data.y_real, p), moved);
    maybe_store(out.trace, opt, x);
  }
  out.summary = summarise(out.trace, {{block ? "block_acceptance" : "site_acceptance", kernel.rate()}});
  return out;
}

RunResult run_sv_gibbs(const Config& cfg, const DataSet& data, const ModelSpec& spec,
                       std::uint64_t seed) {
  Parameterisation kind;
  try {
    kind = parse_parameterisation(cfg.get_string("algorithm.parameterisation", "noncentered_beta"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::string state_update = cfg.get_string("algorithm.state_update", "single-site");
  if (state_update != "single-site" && state_update != "block") {
    throw ConfigError("algorithm.state_update must be single-site or block");
  }
  SvStateKernel kernel = SvStateKernel::from_config(cfg, state_update == "block");
  const double sigma_step = cfg.get_double("algorithm.sigma_step", 0.1);
  const SvPrior prior = spec.prior;
  const std::span<const double> y(data.y_real);

  SvParams p = spec.sv;
  const ChainOptions opt = chain_options(cfg, {"beta", "phi", "sigma"});
  const RngStream rng(seed);
  RngStream r_init = rng.split(kInitStream);
  RealPath x = sv_simulate(p, data.size(), r_init).x;
  std::size_t phi_accepted = 0;
  std::size_t sigma_accepted = 0;
  RunResult out;
  start(out.trace, opt, seed);
  for (std::size_t i = 0; i < opt.iterations; ++i) {
    const RngStream it = rng.split(i);
    RngStream r_state = it.split(0);
    RngStream r = it.split(1);
    kernel.sweep(x, y, p, r_state);

    if (kind == Parameterisation::centered_mu) {
      const RealPath xc =
          reparam_transform(p, x, Parameterisation::noncentered_beta, Parameterisation::centered_mu);
      p.beta = std::exp(0.5 * sv_sample_mu_centered(xc, p.phi, p.sigma, r));
      x = reparam_transform(p, xc, Parameterisation::centered_mu, Parameterisation::noncentered_beta);
    } else {
      p.beta = std::sqrt(sv_sample_beta2(x, y, r));
    }
    if (kind == Parameterisation::noncentered_beta_sigma) {
      const RealPath xs = reparam_transform(p, x, Parameterisation::noncentered_beta,
                                            Parameterisation::noncentered_beta_sigma);
      SvParams cand = p;
      cand.sigma = p.sigma * std::exp(sigma_step * r.normal());
      const double log_ratio =
          sv_log_joint_in(kind, xs, y, cand) + log_sigma_prior(cand.sigma, prior) -
          sv_log_joint_in(kind, xs, y, p) - log_sigma_prior(p.sigma, prior);
      if (std::log(r.uniform()) < log_ratio) {
        p.sigma = cand.sigma;
        ++sigma_accepted;
      }
      x = reparam_transform(p, xs, Parameterisation::noncentered_beta_sigma,
                            Parameterisation::noncentered_beta);
    } else {
      p.sigma = std::sqrt(sv_sample_sigma2(x, p.phi, prior, r));
    }
    const PhiUpdate u = sv_update_phi(x, p.sigma, prior, p.phi, r);
    p.phi = u.value;
    phi_accepted += u.accepted;

    out.trace.append({p.beta, p.phi, p.sigma}, sv_log_joint(x, y, p), u.accepted);
    maybe_store(out.trace, opt, x);
  }
  std::vector<std::pair<std::string, double>> extra{
      {"state_acceptance", kernel.rate()},
      {"phi_acceptance", static_cast<double>(phi_accepted) / static_cast<double>(opt.iterations)}};
  if (kind == Parameterisation::noncentered_beta_sigma) {
    extra.emplace_back("sigma_acceptance",
                       static_cast<double>(sigma_accepted) / static_cast<double>(opt.iterations));
  }
  out.summary = summarise(out.trace, extra);
  return out;
}

// ---------------------------------------------------------------------------

RunResult run_sv_pmmh(const Config& cfg, const DataSet& data, const ModelSpec& spec,
                      std::uint64_t seed) {
  const std::size_t M = count_key(cfg, "algorithm.M", 100, 1);
  const double lambda = cfg.get_double("algorithm.lambda", 1.3);
  const std::size_t pilot_iterations = count_key(cfg, "algorithm.pilot_iterations", 1000);
  const std::size_t pilot_M = count_key(cfg, "algorithm.pilot_M", M, 1);
  if (!(lambda > 0.0)) throw ConfigError("algorithm.lambda must be positive");
  const SvPrior prior = spec.prior;
  const std::span<const double> y(data.y_real);
  auto log_prior = [&](const Eigen::VectorXd& th) { return sv_log_prior_theta(th, prior); };
  auto make_model = [](const Eigen::VectorXd& th) { return SvModel(sv_from_theta(th)); };
  const Eigen::VectorXd init = sv_to_theta(spec.sv);
  const RngStream rng(seed);

  Eigen::MatrixXd cov = Eigen::Vector3d(0.01, 0.25, 0.04).asDiagonal();
  if (pilot_iterations > 0) {
    ChainOptions pilot_opt;
    pilot_opt.iterations = std::max<std::size_t>(pilot_iterations, 20);
    pilot_opt.store_paths = false;
    const ChainTrace pilot = pmmh(log_prior, RWProposal(1.0, cov), make_model, y, pilot_M, init,
                                  rng.split(kPilotStream), pilot_opt, detail::to_std);
    std::vector<Eigen::VectorXd> draws;
    for (std::size_t i = pilot.meta.burn_in; i < pilot.size(); ++i) {
      draws.push_back(Eigen::Map<const Eigen::VectorXd>(pilot.theta[i].data(), 3));
    }
    cov = proposal_covariance(draws);
  }
  const ChainOptions opt = chain_options(cfg, {"beta", "phi", "sigma"});
  RunResult out;
  out.trace = pmmh(log_prior, RWProposal(lambda, cov), make_model, y, M, init, rng, opt, sv_report);
  out.summary = summarise(out.trace, {});
  return out;
}

RunResult run_sv_pgibbs(const Config& cfg, const DataSet& data, const ModelSpec& spec,
                        std::uint64_t seed) {
  const std::size_t M = count_key(cfg, "algorithm.M", 100, 2);
  const bool ancestor = cfg.get_bool("algorithm.ancestor_sampling", true);
  const bool update_theta = cfg.get_bool("algorithm.update_theta", true);
  const SvPrior prior = spec.prior;
  const std::span<const double> y(data.y_real);
  const RngStream rng(seed);
  RngStream r_sel = rng.split(kInitStream, 1);
  const RealPath init_path =
      csmc_select_path(bootstrap_filter(SvModel(spec.sv), y, M, rng.split(kInitStream, 0)), r_sel);

  auto theta_step = [&](const SvParams& p, const RealPath& x, RngStream& r) {
    return update_theta ? sv_conditional_theta_step(p, x, y, prior, r) : p;
  };
  auto make_model = [](const SvParams& p) { return SvModel(p); };
  auto report = [](const SvParams& p) { return std::vector<double>{p.beta, p.phi, p.sigma}; };
  ChainOptions opt = chain_options(cfg, {"beta", "phi", "sigma"});
  const bool keep_paths = opt.store_paths;
  const std::size_t stride = opt.path_stride;
  opt.store_paths = true;
  opt.path_stride = 1;
  RunResult out;
  out.trace = particle_gibbs(theta_step, make_model, y, M, spec.sv, init_path, rng, ancestor, opt,
                             report);
  std::vector<std::vector<double>> kept(
      out.trace.paths.begin() + static_cast<std::ptrdiff_t>(out.trace.meta.burn_in),
      out.trace.paths.end());
  std::vector<std::pair<std::string, double>> extra;
  if (kept.size() >= 2) {
    const auto rate = update_rate_per_time(kept);
    const std::size_t t90 = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(rate.size()))) - 1;
    extra = {{"update_rate_x_1", rate.front()},
             {"update_rate_x_" + std::to_string(t90 + 1), rate[t90]},
             {"update_rate_x_" + std::to_string(rate.size()), rate.back()}};
  }
  if (!keep_paths) {
    out.trace.paths.clear();
  } else if (stride > 1) {
    for (auto& row : out.trace.paths) row = detail::strided(row, stride);
    out.trace.path_stride = stride;
  }
  out.summary = summarise(out.trace, extra);
  return out;
}

}  // namespace

ModelSpec ModelSpec::from_config(const Config& cfg) {
  ModelSpec s;
  s.kind = cfg.get_string("model.kind", "sv");
  if (s.kind == "sv") {
    s.n = count_key(cfg, "model.n", 400, 1);
    s.sv.beta = cfg.get_double("model.beta", s.sv.beta);
    s.sv.phi = cfg.get_double("model.phi", s.sv.phi);
    s.sv.sigma = cfg.get_double("model.sigma", s.sv.sigma);
  } else if (s.kind == "hmm") {
    s.n = count_key(cfg, "model.n", 200, 1);
    s.alpha = cfg.get_double("model.alpha", s.alpha);
    s.beta_sep = cfg.get_double("model.beta", s.beta_sep);
  } else {
    throw ConfigError("model.kind must be sv or hmm, got '" + s.kind + "'");
  }
  s.prior.a = cfg.get_double("prior.a", s.prior.a);
  s.prior.b = cfg.get_double("prior.b", s.prior.b);
  s.prior.s0 = cfg.get_double("prior.s0", s.prior.s0);
  s.prior.p = cfg.get_double("prior.p", s.prior.p);
  try {
    if (s.kind == "sv") {
      s.sv.validate();
    } else {
      (void)s.hmm();
    }
    s.prior.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

DataSet simulate_data(const ModelSpec& spec, std::uint64_t seed) {
  RngStream rng = RngStream(seed).split(0);
  DataSet ds;
  ds.model = spec.kind;
  if (spec.kind == "sv") {
    auto sim = sv_simulate(spec.sv, spec.n, rng);
    ds.x_real = std::move(sim.x);
    ds.y_real = std::move(sim.y);
  } else {
    auto sim = hmm_simulate(spec.hmm(), spec.n, rng);
    ds.x_state = std::move(sim.x);
    ds.y_symbol = std::move(sim.y);
  }
  return ds;
}

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"hmm-single-site", "hmm-fb",    "hmm-gibbs",
                                              "sv-single-site",  "sv-block",  "sv-gibbs",
                                              "pmmh",            "pgibbs"};
  return names;
}

RunResult run_algorithm(const Config& cfg, const DataSet& data, std::uint64_t seed) {
  const ModelSpec spec = ModelSpec::from_config(cfg);
  const std::string algo = cfg.require_string("algorithm.kind");
  const bool hmm_algo = algo.rfind("hmm-", 0) == 0;
  const bool known = std::find(algorithm_names().begin(), algorithm_names().end(), algo) !=
                     algorithm_names().end();
  if (!known) {
    std::string valid;
    for (const auto& n : algorithm_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown algorithm '" + algo + "'; valid: " + valid);
  }
  require_model(data, hmm_algo ? "hmm" : "sv", algo);
  if (spec.kind != data.model) {
    throw ConfigError("model.kind '" + spec.kind + "' does not match the data file");
  }
  RunResult r;
  if (algo == "hmm-single-site") r = run_hmm_single_site(cfg, data, spec, seed);
  else if (algo == "hmm-fb") r = run_hmm_fb(cfg, data, spec, seed);
  else if (algo == "hmm-gibbs") r = run_hmm_gibbs(cfg, data, spec, seed);
  else if (algo == "sv-single-site") r = run_sv_states(cfg, data, spec, seed, false);
  else if (algo == "sv-block") r = run_sv_states(cfg, data, spec, seed, true);
  else if (algo == "sv-gibbs") r = run_sv_gibbs(cfg, data, spec, seed);
  else if (algo == "pmmh") r = run_sv_pmmh(cfg, data, spec, seed);
  else r = run_sv_pgibbs(cfg, data, spec, seed);
  r.trace.meta.config_hash = cfg.hash();
  return r;
}

}  // namespace ssmcmc
