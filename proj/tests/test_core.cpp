#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "ssmcmc/rng.hpp"
#include "ssmcmc/weights.hpp"
#include "test_util.hpp"

using namespace ssmcmc;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("rng: identical paths give identical streams") {
  RngStream a = RngStream(7).split(3, 4);
  RngStream b = RngStream(7).split(3).split(4);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CHECK(RngStream(7).split(3).key() != RngStream(7).split(4).key());
  CHECK(RngStream(7).split(3).key() != RngStream(8).split(3).key());
  // sibling streams should not share draws
  RngStream c = RngStream(7).split(1);
  RngStream d = RngStream(7).split(2);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(c());
  int clashes = 0;
  for (int i = 0; i < 1000; ++i) clashes += seen.count(d());
  CHECK(clashes == 0);
}

TEST_CASE("rng: split does not advance the parent") {
  RngStream a(5);
  RngStream b(5);
  (void)a.split(9);
  CHECK(a() == b());
}

TEST_CASE("rng: uniform in (0,1), normal and chi-squared moments") {
  RngStream r(11);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sc = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    sc += r.chi_squared(5.0);
  }
  CHECK(testutil::within_se(su / n, 0.5, std::sqrt(1.0 / 12 / n)));
  CHECK(testutil::within_se(sn / n, 0.0, std::sqrt(1.0 / n)));
  CHECK(testutil::within_se(sn2 / n, 1.0, std::sqrt(2.0 / n)));
  CHECK(testutil::within_se(sc / n, 5.0, std::sqrt(10.0 / n)));
}

TEST_CASE("rng: uniform_index and categorical frequencies") {
  RngStream r(3);
  const int n = 100000;
  std::vector<double> counts(3, 0.0);
  std::vector<double> probs{0.2, 0.5, 0.3};
  std::vector<double> cat(3, 0.0);
  for (int i = 0; i < n; ++i) {
    counts[r.uniform_index(3)] += 1;
    cat[r.categorical(probs)] += 1;
  }
  for (int k = 0; k < 3; ++k) {
    CHECK(testutil::frequency_ok(counts[k], n, 1.0 / 3));
    CHECK(testutil::frequency_ok(cat[k], n, probs[k]));
  }
}

TEST_CASE("log_sum_exp") {
  CHECK(log_sum_exp(std::vector<double>{0.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(log_sum_exp(std::vector<double>{-1000.0}) == -1000.0);
  CHECK(log_sum_exp(std::vector<double>{-kInf, -kInf}) == -kInf);
  CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK_THROWS(log_sum_exp(std::vector<double>{}));

  RngStream r(1);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> v(20);
    double direct = 0.0;
    for (auto& x : v) {
      x = -5.0 + 10.0 * r.uniform();
      direct += std::exp(x);
    }
    CHECK(std::abs(log_sum_exp(v) - std::log(direct)) < 1e-12);
  }
}

TEST_CASE("normalize_weights") {
  auto p = normalize_weights(std::vector<double>{0, 0, 0, 0});
  for (double v : p) CHECK(v == doctest::Approx(0.25));
  p = normalize_weights(std::vector<double>{0, -kInf});
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
  CHECK_THROWS(normalize_weights(std::vector<double>{-kInf, -kInf}));

  RngStream r(2);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> lw(10);
    double z = 0.0;
    for (auto& x : lw) {
      x = -3.0 + 6.0 * r.uniform();
      z += std::exp(x);
    }
    const auto w = normalize_weights(lw);
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(std::abs(w[i] - std::exp(lw[i]) / z) < 1e-12);
      sum += w[i];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("effective_sample_size") {
  CHECK(effective_sample_size(std::vector<double>(7, -2.0)) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(effective_sample_size(std::vector<double>{0.0, -kInf, -kInf}) == doctest::Approx(1.0));
  CHECK(effective_sample_size(std::vector<double>{std::log(0.5), std::log(0.5), -kInf}) ==
        doctest::Approx(2.0));
  WeightedSample<int> ws({1, 2, 3}, {0.0, 0.0, 0.0});
  CHECK(effective_sample_size(ws) == doctest::Approx(3.0));

  RngStream r(4);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t m = 1 + r.uniform_index(30);
    std::vector<double> lw(m);
    for (auto& x : lw) x = 4.0 * r.normal();
    const double ess = effective_sample_size(lw);
    CHECK(ess >= 1.0 - 1e-12);
    CHECK(ess <= static_cast<double>(m) + 1e-12);
  }
}

TEST_CASE("multinomial_resample") {
  RngStream r(9);
  const auto idx = multinomial_resample(std::vector<double>{-kInf, 0.0, -kInf}, 50, r);
  for (auto i : idx) CHECK(i == 1);

  RngStream a(10), b(10);
  const std::vector<double> lw{0.1, -0.4, 2.0, 0.0};
  CHECK(multinomial_resample(lw, 100, a) == multinomial_resample(lw, 100, b));

  const std::size_t n = 100000;
  RngStream u(12);
  auto counts = std::vector<double>(4, 0.0);
  for (auto i : multinomial_resample(std::vector<double>(4, 0.0), n, u)) counts[i] += 1;
  for (double c : counts) CHECK(testutil::frequency_ok(c, n, 0.25));

  // expected count of index m is count * w_m
  const auto w = normalize_weights(lw);
  RngStream s(13);
  counts.assign(4, 0.0);
  for (auto i : multinomial_resample(lw, n, s)) counts[i] += 1;
  for (std::size_t m = 0; m < 4; ++m) CHECK(testutil::frequency_ok(counts[m], n, w[m]));
}
