#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ssmcmc/diagnostics.hpp"
#include "ssmcmc/models.hpp"
#include "test_util.hpp"

using namespace ssmcmc;

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

TEST_CASE("sv_simulate: vanishing sigma gives the deterministic AR path") {
  RngStream r(1);
  const SvParams p{1.0, 0.9, 1e-12};
  const auto sim = sv_simulate(p, 50, r);
  for (std::size_t t = 0; t < sim.x.size(); ++t) {
    CHECK(std::abs(sim.x[t] - std::pow(0.9, static_cast<double>(t)) * sim.x[0]) < 1e-6);
  }
}

TEST_CASE("sv_simulate: marginal variance") {
  const std::size_t n = 100000;
  {
    RngStream r(2);
    const SvParams p{1.0, 0.0, 0.7};
    const auto sim = sv_simulate(p, n, r);
    const double s2 = p.sigma * p.sigma;
    CHECK(testutil::within_se(variance(sim.x), s2, s2 * std::sqrt(2.0 / n)));
  }
  {
    RngStream r(3);
    const SvParams p{1.0, 0.98, 0.2};
    const auto sim = sv_simulate(p, n, r);
    const double g0 = p.stationary_variance();
    const double phi2 = p.phi * p.phi;
    // large-sample sd of the sample variance of a Gaussian AR(1)
    const double se = g0 * std::sqrt(2.0 * (1.0 + phi2) / (1.0 - phi2) / n);
    CHECK(testutil::within_se(variance(sim.x), g0, se));
  }
}

TEST_CASE("sv densities") {
  const SvParams unit{1.0, 0.0, 1.0};
  CHECK(sv_obs_logdensity(0.0, 0.0, unit) == doctest::Approx(-kHalfLog2Pi).epsilon(1e-15));
  CHECK(sv_transition_logdensity(0.0, 0.0, unit) == doctest::Approx(-kHalfLog2Pi).epsilon(1e-15));

  RngStream r(4);
  for (int rep = 0; rep < 50; ++rep) {
    const double x = r.normal();
    const double y = r.normal();
    const double beta = 0.2 + r.uniform();
    const double phi = -0.9 + 1.8 * r.uniform();
    const double sigma = 0.1 + r.uniform();
    const SvParams p{beta, phi, sigma};
    // doubling beta with x - 2 log 2 leaves beta^2 e^x unchanged
    const SvParams p2{2.0 * beta, phi, sigma};
    CHECK(std::abs(sv_obs_logdensity(x, y, p) - sv_obs_logdensity(x - 2.0 * std::log(2.0), y, p2)) <
          1e-12);
    const double v = beta * beta * std::exp(x);
    const double direct = -0.5 * std::log(2.0 * std::numbers::pi * v) - y * y / (2.0 * v);
    CHECK(std::abs(sv_obs_logdensity(x, y, p) - direct) < 1e-12);

    const double xp = r.normal();
    const double d = x - phi * xp;
    const double direct_tr =
        -0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) - d * d / (2.0 * sigma * sigma);
    CHECK(std::abs(sv_transition_logdensity(xp, x, p) - direct_tr) < 1e-12);
    // symmetric in the sign of x - phi xp
    CHECK(std::abs(sv_transition_logdensity(xp, phi * xp + d, p) -
                   sv_transition_logdensity(xp, phi * xp - d, p)) < 1e-12);

    const double g0 = p.stationary_variance();
    CHECK(std::abs(sv_initial_logdensity(x, p) -
                   (-0.5 * std::log(2.0 * std::numbers::pi * g0) - x * x / (2.0 * g0))) < 1e-12);
  }
  CHECK_THROWS(SvParams{1.0, 1.0, 0.2}.validate());
  CHECK_THROWS(SvParams{0.0, 0.5, 0.2}.validate());
  CHECK_THROWS(SvParams{1.0, 0.5, 0.0}.validate());
}

TEST_CASE("sv_log_joint sums the factorisation") {
  RngStream r(5);
  const SvParams p{0.8, 0.95, 0.3};
  const auto sim = sv_simulate(p, 30, r);
  double direct = sv_initial_logdensity(sim.x[0], p);
  for (std::size_t t = 1; t < 30; ++t) direct += sv_transition_logdensity(sim.x[t - 1], sim.x[t], p);
  for (std::size_t t = 0; t < 30; ++t) direct += sv_obs_logdensity(sim.x[t], sim.y[t], p);
  CHECK(sv_log_joint(sim.x, sim.y, p) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("dna_params") {
  const auto h = dna_params(0.5, 0.1);
  CHECK(h.transition(0, 0) == 0.5);
  CHECK(h.transition(1, 0) == 0.5);
  const auto flat = dna_params(0.1, 1e-12);
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 4; ++s) CHECK(flat.emission(k, s) == doctest::Approx(0.25));
  const auto sep = dna_params(0.3, 0.2);
  const double e1[4] = {0.45, 0.45, 0.05, 0.05};
  for (int s = 0; s < 4; ++s) {
    CHECK(sep.emission(0, s) == doctest::Approx(e1[s]).epsilon(1e-14));
    CHECK(sep.emission(1, s) == doctest::Approx(e1[3 - s]).epsilon(1e-14));
  }
  CHECK(sep.transition(0, 1) == doctest::Approx(0.3));
  CHECK(sep.transition(1, 0) == doctest::Approx(0.3));
  CHECK_THROWS(dna_params(0.0, 0.1));
  CHECK_THROWS(dna_params(0.3, 0.25));
  CHECK_THROWS(dna_params(0.3, 0.0));
}

TEST_CASE("make_hmm validates and defaults to the stationary law") {
  Eigen::MatrixXd P(2, 2);
  P << 0.9, 0.1, 0.2, 0.8;
  Eigen::MatrixXd E(2, 2);
  E << 0.5, 0.5, 0.25, 0.75;
  const auto h = make_hmm(P, E);
  CHECK(h.initial(0) == doctest::Approx(2.0 / 3));
  CHECK(h.initial(1) == doctest::Approx(1.0 / 3));
  Eigen::MatrixXd bad = P;
  bad(0, 0) = 0.95;
  CHECK_THROWS(make_hmm(bad, E));
}

TEST_CASE("hmm_simulate") {
  {
    RngStream r(6);
    Eigen::MatrixXd E = Eigen::MatrixXd::Constant(3, 4, 0.25);
    const auto h = make_hmm(Eigen::MatrixXd::Identity(3, 3), E, Eigen::Vector3d(0.2, 0.3, 0.5));
    const auto sim = hmm_simulate(h, 100, r);
    for (int v : sim.x) CHECK(v == sim.x[0]);
  }
  {
    RngStream r(7);
    const std::size_t n = 100000;
    Eigen::MatrixXd P = Eigen::MatrixXd::Constant(2, 2, 0.5);
    const auto sim = hmm_simulate(make_hmm(P, Eigen::MatrixXd::Constant(2, 4, 0.25)), n, r);
    double ones = 0;
    std::vector<double> sym(4, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      ones += sim.x[t] == 0;
      sym[sim.y[t]] += 1;
    }
    CHECK(testutil::frequency_ok(ones, n, 0.5));
    for (double c : sym) CHECK(testutil::frequency_ok(c, n, 0.25));
  }
}

TEST_CASE("hmm_log_joint matches the direct product") {
  RngStream r(8);
  const auto h = testutil::random_hmm(3, 4, r);
  const auto sim = hmm_simulate(h, 12, r);
  CHECK(hmm_log_joint(sim.x, sim.y, h) ==
        doctest::Approx(std::log(testutil::joint_prob(h, sim.x, sim.y))).epsilon(1e-12));
}

TEST_CASE("model contract") {
  const SvModel sv(SvParams{1.0, 0.9, 0.3});
  CHECK(sv.log_transition(0.1, 0.2) == sv_transition_logdensity(0.1, 0.2, sv.params));
  const HmmModel hm(dna_params(0.2, 0.1));
  CHECK(hm.log_transition(0, 1) == doctest::Approx(std::log(0.2)));
  CHECK(hm.log_emission(0, 0) == doctest::Approx(std::log(0.35)));
  const SimulationOnly<SvModel> hidden{sv};
  CHECK_FALSE(hidden.has_transition_density());
  CHECK_THROWS_AS(hidden.log_transition(0.0, 0.0), std::logic_error);
}

TEST_CASE("dna symbols round trip") {
  for (int c = 0; c < 4; ++c) CHECK(dna_code(dna_symbol(c)) == c);
  CHECK(dna_symbol(0) == 'A');
  CHECK_THROWS(dna_code('X'));
}
