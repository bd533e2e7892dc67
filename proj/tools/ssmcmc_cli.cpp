// ssmcmc command-line harness: simulate data, run one sampler, or run a named experiment.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ssmcmc/config.hpp"
#include "ssmcmc/data_io.hpp"
#include "ssmcmc/experiments.hpp"
#include "ssmcmc/runner.hpp"
#include "ssmcmc/smc.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::size_t threads = 1;
  std::vector<std::string> overrides;
};

ssmcmc::Config load_config(const Common& c) {
  ssmcmc::Config cfg = c.config_path.empty() ? ssmcmc::Config{} : ssmcmc::Config::load(c.config_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ssmcmc::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  std::cout << path.string() << '\n';
  return os;
}

int cmd_simulate(const Common& c) {
  const ssmcmc::Config cfg = load_config(c);
  const auto spec = ssmcmc::ModelSpec::from_config(cfg);
  const auto data = ssmcmc::simulate_data(spec, c.seed);
  const auto header = ssmcmc::provenance_header(cfg, c.seed);
  auto os = open_out(c.out_dir, "data.csv");
  if (data.model == "sv") {
    ssmcmc::write_sv_csv(os, data.x_real, data.y_real, header);
  } else {
    ssmcmc::write_hmm_csv(os, data.x_state, data.y_symbol, header);
  }
  auto js = open_out(c.out_dir, "config.json");
  js << cfg.to_json() << '\n';
  return 0;
}

int cmd_run(const Common& c, const std::string& data_path) {
  ssmcmc::Config cfg = load_config(c);
  const std::string path = data_path.empty() ? cfg.require_string("data.path") : data_path;
  if (!std::filesystem::exists(path)) {
    throw ssmcmc::ConfigError("data file '" + path + "' does not exist");
  }
  const auto data = ssmcmc::read_data_file(path);
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = ssmcmc::run_algorithm(cfg, data, c.seed);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto header = ssmcmc::provenance_header(cfg, c.seed);
  {
    auto os = open_out(c.out_dir, "trace.csv");
    ssmcmc::write_trace_csv(result.trace, os, header);
  }
  {
    auto os = open_out(c.out_dir, "summary.csv");
    result.summary.write(os, header);
  }
  std::cerr << "runtime_seconds " << secs << '\n';
  return 0;
}

int cmd_experiment(const Common& c, const std::string& name, long long seeds) {
  ssmcmc::Config cfg = load_config(c);
  if (seeds > 0) {
    const std::string n = std::to_string(seeds);
    for (const char* key : {"fig_hmm_acf.replicates", "fig_sv_acf.replicates",
                            "fig_block.datasets", "table_param.replicates",
                            "pmmh.chain_replicates"}) {
      cfg.set(key, n);
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto files = ssmcmc::run_named_experiment(name, cfg, c.seed, c.threads, c.out_dir);
  for (const auto& f : files) std::cout << f << '\n';
  std::cerr << "runtime_seconds "
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
            << '\n';
  return 0;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "Config file (section.key = value)");
  app->add_option("--seed", c.seed, "Root seed");
  app->add_option("--out", c.out_dir, "Output directory");
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--set", c.overrides, "Config override key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MCMC and particle MCMC for state-space models"};
  app.set_version_flag("--version", SSMCMC_VERSION);
  app.require_subcommand(1);

  Common common;
  std::string data_path;
  std::string experiment;
  long long seeds = 0;

  auto* sim = app.add_subcommand("simulate", "Simulate a data set from model.* settings");
  add_common(sim, common);
  auto* run = app.add_subcommand("run", "Run algorithm.kind on a data file");
  add_common(run, common);
  run->add_option("--data", data_path, "Data CSV (default: data.path from the config)");
  auto* exp = app.add_subcommand("experiment", "Run a named experiment");
  add_common(exp, common);
  exp->add_option("name", experiment, "Experiment name")->required();
  exp->add_option("--seeds", seeds, "Replicates per grid point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(common);
    if (*run) return cmd_run(common, data_path);
    return cmd_experiment(common, experiment, seeds);
  } catch (const ssmcmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ssmcmc::FilterCollapse& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
