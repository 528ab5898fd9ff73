// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lrslab/errors.hpp"
#include "lrslab/rng.hpp"
#include "lrslab/stats.hpp"

using namespace lrs;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("median conventions") {
  CHECK(median(std::vector<double>{1, 2, 3}) == 2);
  CHECK(median(std::vector<double>{1, 2, 3, 4}) == 2);
  CHECK(median(std::vector<double>{0.1, kInf, kInf}) == kInf);
  CHECK(median(std::vector<double>{0.3, 0.1, 0.2}) == 0.2);
  CHECK(median(std::vector<double>{0.1, 0.4}) == 0.1);
  CHECK_THROWS_AS(median(std::vector<double>{}), ValidationError);
}

TEST_CASE("dkw band at n = 100") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = 100 - i;
  const auto b = dkw_median_band(v, 0.05);
  CHECK(std::abs(b.epsilon - std::sqrt(std::log(40.0) / 200.0)) < 1e-12);
  CHECK(b.lower_rank == 37);
  CHECK(b.upper_rank == 64);
  CHECK(b.lower == 37);
  CHECK(b.upper == 64);
  CHECK(b.lower <= median(v));
  CHECK(median(v) <= b.upper);
  CHECK_FALSE(b.degenerate);
}

TEST_CASE("dkw band edge cases") {
  const std::vector<double> same(10, 3.5);
  const auto s = dkw_median_band(same, 0.05);
  CHECK(s.lower == 3.5);
  CHECK(s.upper == 3.5);
  const std::vector<double> small{1, 2, 3, 4};
  const auto d = dkw_median_band(small, 0.05);
  CHECK(d.degenerate);
  CHECK(d.lower == 1);
  CHECK(d.upper == 4);
  std::vector<double> big(1000);
  for (int i = 0; i < 1000; ++i) big[i] = i;
  const auto wide = dkw_median_band(big, 0.05);
  const auto tight = dkw_median_band(big, 0.999);
  CHECK(tight.upper - tight.lower < wide.upper - wide.lower);
  CHECK(tight.lower <= median(big));
  CHECK(tight.upper >= median(big));
  const std::vector<double> inf{1, 2, kInf, kInf, kInf};
  CHECK(dkw_median_band(inf, 0.5).right_unbounded);
  CHECK_THROWS_AS(dkw_median_band(std::vector<double>{1.0}, 0.05), ValidationError);
  CHECK_THROWS_AS(dkw_median_band(small, 0.0), ValidationError);
  CHECK_THROWS_AS(dkw_median_band(small, 1.0), ValidationError);
}

TEST_CASE("permutation invariance") {
  std::vector<double> v{5, 1, 4, 2, 8, 7, 3, 6, 0, 9};
  const auto m = median(v);
  const auto b = dkw_median_band(v, 0.2);
  std::mt19937 rng(3);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(median(v) == m);
    const auto c = dkw_median_band(v, 0.2);
    CHECK(c.lower == b.lower);
    CHECK(c.upper == b.upper);
  }
}

TEST_CASE("dkw coverage of the true median") {
  Engine rng(2024);
  std::exponential_distribution<double> dist(1.0);
  const double truth = std::log(2.0);
  int covered = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(100);
    for (auto& x : v) x = dist(rng);
    const auto b = dkw_median_band(v, 0.05);
    covered += (b.lower <= truth && truth <= b.upper) ? 1 : 0;
  }
  CHECK(covered >= 930);
}

TEST_CASE("ecdf") {
  const auto e = ecdf(std::vector<double>{1, 3, 2});
  REQUIRE(e.size() == 3);
  CHECK(e[0] == std::pair<double, double>{1, 1.0 / 3});
  CHECK(e[1] == std::pair<double, double>{2, 2.0 / 3});
  CHECK(e[2] == std::pair<double, double>{3, 1.0});
  const auto t = ecdf(std::vector<double>{5, 5, 5});
  REQUIRE(t.size() == 1);
  CHECK(t[0] == std::pair<double, double>{5, 1.0});
  const auto mixed = ecdf(std::vector<double>{2, 1, 2, kInf});
  REQUIRE(mixed.size() == 3);
  CHECK(mixed[1].second == 0.75);
  CHECK(mixed.back().second == 1.0);
  for (std::size_t i = 1; i < mixed.size(); ++i) {
    CHECK(mixed[i].first > mixed[i - 1].first);
    CHECK(mixed[i].second > mixed[i - 1].second);
  }
}

TEST_CASE("bootstrap median sd") {
  std::vector<double> v(200);
  Engine rng(5);
  std::normal_distribution<double> n(0, 1);
  for (auto& x : v) x = n(rng);
  const double a = bootstrap_median_sd(v, 200, 1);
  CHECK(a == bootstrap_median_sd(v, 200, 1));
  // asymptotic sd of the normal median: sqrt(pi / 2n)
  CHECK(a == doctest::Approx(std::sqrt(M_PI / 400)).epsilon(0.35));
  const std::vector<double> same(10, 1.0);
  CHECK(bootstrap_median_sd(same, 50, 0) == 0.0);
}
