#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "ssmcmc/diagnostics.hpp"
#include "ssmcmc/exact_hmm.hpp"
#include "ssmcmc/smc.hpp"
#include "test_util.hpp"

using namespace ssmcmc;

namespace {

double chi2_upper_001(double df) {
  const double z = 3.090232;
  const double c = 2.0 / (9.0 * df);
  return df * std::pow(1.0 - c + z * std::sqrt(c), 3.0);
}

// Mean of exp(log_lik_hat - log p(y)) over independent runs and its standard error.
template <class Run>
std::pair<double, double> ratio_mean(Run run, double exact, int reps) {
  std::vector<double> v(reps);
  for (int i = 0; i < reps; ++i) v[i] = std::exp(run(static_cast<std::uint64_t>(i)) - exact);
  return {mean(v), std::sqrt(variance(v) / reps)};
}

}  // namespace

TEST_CASE("bootstrap filter likelihood estimate is unbiased") {
  RngStream r(1);
  const HmmModel model(dna_params(0.15, 0.2));
  const auto sim = hmm_simulate(model.params, 12, r);
  const std::span<const int> y(sim.y);
  const double exact = forward_filter(model.params, sim.y).log_likelihood();
  for (std::size_t M : {1u, 3u, 10u}) {
    const auto [m, se] = ratio_mean(
        [&](std::uint64_t i) { return bootstrap_filter(model, y, M, r.split(M, i)).log_lik_hat; }, exact,
        40000);
    CHECK(testutil::within_se(m, 1.0, se, 4.0));
  }
}

TEST_CASE("particle filter with a uniform proposal is unbiased") {
  RngStream r(2);
  const HmmModel model(dna_params(0.3, 0.15));
  const auto sim = hmm_simulate(model.params, 8, r);
  const std::span<const int> y(sim.y);
  const ProposalKernel<int> q{
      [](RngStream& rr) { return static_cast<int>(rr.uniform_index(2)); },
      [](const int&, std::size_t, RngStream& rr) { return static_cast<int>(rr.uniform_index(2)); },
      [](const int&) { return std::log(0.5); },
      [](const int&, const int&, std::size_t) { return std::log(0.5); },
  };
  const double exact = forward_filter(model.params, sim.y).log_likelihood();
  const auto [m, se] = ratio_mean(
      [&](std::uint64_t i) { return particle_filter(model, y, 4, q, r.split(i)).log_lik_hat; }, exact,
      40000);
  CHECK(testutil::within_se(m, 1.0, se, 4.0));
}

TEST_CASE("prior kernel reproduces the bootstrap filter") {
  RngStream r(3);
  const SvModel model(SvParams{1.0, 0.95, 0.3});
  const auto sim = sv_simulate(model.params, 30, r);
  const std::span<const double> y(sim.y);
  const auto a = bootstrap_filter(model, y, 20, RngStream(8));
  const auto b = particle_filter(model, y, 20, prior_kernel(model), RngStream(8));
  CHECK(a.particles == b.particles);
  CHECK(a.parents == b.parents);
  CHECK(a.log_lik_hat == doctest::Approx(b.log_lik_hat).epsilon(1e-14));
}

TEST_CASE("M = 1: no resampling choice and the estimate is the path's emission sum") {
  RngStream r(4);
  const SvModel model(SvParams{0.8, 0.9, 0.3});
  const auto sim = sv_simulate(model.params, 25, r);
  const auto ps = bootstrap_filter(model, std::span<const double>(sim.y), 1, r);
  double direct = 0.0;
  for (std::size_t t = 0; t < ps.T; ++t) {
    direct += sv_obs_logdensity(ps.particle(t, 0), sim.y[t], model.params);
    if (t > 0) CHECK(ps.ancestor(t, 0) == 0);
  }
  CHECK(ps.log_lik_hat == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("log_lik_hat decomposes over the stored weights") {
  RngStream r(5);
  const SvModel model(SvParams{1.0, 0.97, 0.2});
  const auto sim = sv_simulate(model.params, 50, r);
  const auto ps = bootstrap_filter(model, std::span<const double>(sim.y), 64, r);
  double total = 0.0;
  for (std::size_t t = 0; t < ps.T; ++t) {
    total += log_sum_exp(ps.weight_row(t)) - std::log(64.0);
    const double ess = effective_sample_size(ps.weight_row(t));
    CHECK(ess >= 1.0 - 1e-12);
    CHECK(ess <= 64.0 + 1e-12);
    // bootstrap weights are the emission densities
    for (std::size_t m = 0; m < ps.M; ++m) {
      CHECK(ps.log_weight(t, m) == sv_obs_logdensity(ps.particle(t, m), sim.y[t], model.params));
    }
  }
  CHECK(ps.log_lik_hat == doctest::Approx(total).epsilon(1e-13));
}

TEST_CASE("trace_path follows stored ancestors") {
  ParticleSystem<double> ps(3, 2);
  ps.particle(0, 0) = 10;
  ps.particle(0, 1) = 11;
  ps.particle(1, 0) = 20;
  ps.particle(1, 1) = 21;
  ps.particle(2, 0) = 30;
  ps.particle(2, 1) = 31;
  ps.ancestor(1, 0) = 1;
  ps.ancestor(1, 1) = 0;
  ps.ancestor(2, 0) = 1;
  ps.ancestor(2, 1) = 1;
  CHECK(trace_path(ps, 0) == std::vector<double>{10, 21, 30});
  CHECK(trace_path(ps, 1) == std::vector<double>{10, 21, 31});
  ps.ancestor(2, 1) = 0;
  CHECK(trace_path(ps, 1) == std::vector<double>{11, 20, 31});
}

TEST_CASE("filter collapse is reported with its time") {
  Eigen::MatrixXd E(2, 2);
  E << 1.0, 0.0, 1.0, 0.0;
  const HmmModel model(make_hmm(Eigen::MatrixXd::Constant(2, 2, 0.5), E));
  const std::vector<int> y{0, 0, 1, 0};
  try {
    (void)bootstrap_filter(model, std::span<const int>(y), 5, RngStream(1));
    FAIL("expected FilterCollapse");
  } catch (const FilterCollapse& e) {
    CHECK(e.time() == 2);
  }
  CHECK_THROWS_AS(bootstrap_filter(model, std::span<const int>(y), 0, RngStream(1)), std::invalid_argument);
}

TEST_CASE("conditional SMC keeps the reference in column 0") {
  RngStream r(6);
  const SvModel model(SvParams{1.0, 0.9, 0.3});
  const auto sim = sv_simulate(model.params, 40, r);
  const std::span<const double> y(sim.y);
  for (bool as : {false, true}) {
    const auto ps = conditional_smc(model, y, 10, sim.x, r.split(as), as);
    for (std::size_t t = 0; t < ps.T; ++t) CHECK(ps.particle(t, 0) == sim.x[t]);
    if (!as) {
      CHECK(trace_path(ps, 0) == sim.x);
    }
  }
  // with one particle the reference is returned unchanged
  RngStream s(7);
  const auto ps1 = conditional_smc(model, y, 1, sim.x, r, true);
  CHECK(csmc_select_path(ps1, s) == sim.x);
  const SimulationOnly<SvModel> hidden{model};
  CHECK_THROWS_AS(conditional_smc(hidden, y, 10, sim.x, r, true), std::logic_error);
  CHECK_NOTHROW(conditional_smc(hidden, y, 10, sim.x, r, false));
  CHECK_THROWS(conditional_smc(model, y, 10, RealPath(5, 0.0), r, false));
}

TEST_CASE("ancestor sampling only redraws the reference's parents") {
  RngStream r(8);
  const HmmModel model(dna_params(0.2, 0.1));
  const auto sim = hmm_simulate(model.params, 20, r);
  const std::span<const int> y(sim.y);
  const auto a = conditional_smc(model, y, 6, sim.x, RngStream(3), false);
  const auto b = conditional_smc(model, y, 6, sim.x, RngStream(3), true);
  bool moved = false;
  for (std::size_t t = 1; t < a.T; ++t) {
    CHECK(a.ancestor(t, 0) == 0);
    moved = moved || b.ancestor(t, 0) != 0;
    for (std::size_t m = 1; m < a.M; ++m) CHECK(a.ancestor(t, m) == b.ancestor(t, m));
  }
  CHECK(moved);
}

TEST_CASE("conditional SMC kernel leaves the path posterior invariant") {
  RngStream r(9);
  const auto h = testutil::random_hmm(2, 3, r);
  const HmmModel model(h);
  const std::size_t n = 4;
  const auto y = testutil::random_symbols(n, 3, r);
  const auto post = testutil::path_posterior(h, y);
  const int iters = 100000;
  for (bool as : {false, true}) {
    std::vector<int> x(n, 0);
    std::vector<double> freq(post.size(), 0.0);
    RngStream sel = r.split(100 + as);
    for (int i = 0; i < iters; ++i) {
      const auto ps = conditional_smc(model, std::span<const int>(y), 3, x, r.split(as, i), as);
      x = csmc_select_path(ps, sel);
      freq[testutil::encode_path(x, 2)] += 1;
    }
    double chi2 = 0.0;
    std::vector<double> emp(post.size());
    for (std::size_t c = 0; c < post.size(); ++c) {
      // draws are serially correlated, hence the loose bound below
      chi2 += (freq[c] - post[c] * iters) * (freq[c] - post[c] * iters) / (post[c] * iters);
      emp[c] = freq[c] / iters;
    }
    CHECK(testutil::tv_distance(emp, post) < 0.02);
    CHECK(chi2 < 3.0 * chi2_upper_001(static_cast<double>(post.size() - 1)));
  }
}

TEST_CASE("estimate_loglik_variance matches replicate runs") {
  RngStream r(10);
  const SvModel model(SvParams{1.0, 0.95, 0.25});
  const auto sim = sv_simulate(model.params, 40, r);
  const std::span<const double> y(sim.y);
  const RngStream base(77);
  std::vector<double> ll;
  for (std::uint64_t k = 0; k < 20; ++k) ll.push_back(bootstrap_filter(model, y, 16, base.split(k)).log_lik_hat);
  CHECK(estimate_loglik_variance(model, y, 16, 20, base) == doctest::Approx(variance(ll)).epsilon(1e-12));
  CHECK(estimate_loglik_variance(model, y, 16, 20, base, 4) == estimate_loglik_variance(model, y, 16, 20, base));
  CHECK(estimate_loglik_variance(model, y, 256, 20, base) < estimate_loglik_variance(model, y, 16, 20, base));
  CHECK_THROWS(estimate_loglik_variance(model, y, 16, 1, base));
}

TEST_CASE("write_particle_csv") {
  RngStream r(11);
  const SvModel model(SvParams{1.0, 0.9, 0.3});
  const auto sim = sv_simulate(model.params, 3, r);
  const auto ps = bootstrap_filter(model, std::span<const double>(sim.y), 2, r);
  std::ostringstream os;
  write_particle_csv(ps, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,m,x,logw,ancestor");
  int rows = 0;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string f[5];
    for (auto& s : f) std::getline(ls, s, ',');
    const std::size_t t = std::stoul(f[0]) - 1, m = std::stoul(f[1]) - 1;
    CHECK(std::stod(f[2]) == ps.particle(t, m));
    CHECK(std::stod(f[3]) == ps.log_weight(t, m));
    CHECK(std::stoul(f[4]) == (t == 0 ? 0 : ps.ancestor(t, m) + 1));
    ++rows;
  }
  CHECK(rows == 6);
}
