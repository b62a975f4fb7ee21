#include <doctest.h>

#include <vector>

#include "tbw/alias.hpp"
#include "tbw/num.hpp"

using namespace tbw;

TEST_CASE("single-outcome table always returns index 0") {
  AliasTable table(std::vector<double>{1.0});
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(table.sample(rng) == 0);
}

TEST_CASE("non-normalized input is rejected") {
  CHECK_THROWS_AS(AliasTable(std::vector<double>{0.5, 0.4}), ConfigError);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{}), ConfigError);
  CHECK_THROWS_AS(AliasTable(std::vector<double>{1.5, -0.5}), ConfigError);
}

TEST_CASE("fair coin frequencies concentrate at 1e6 draws") {
  AliasTable table(std::vector<double>{0.5, 0.5});
  Rng rng(99);
  std::size_t ones = 0;
  constexpr int kDraws = 1'000'000;
  for (int i = 0; i < kDraws; ++i) ones += table.sample(rng);
  double freq = static_cast<double>(ones) / kDraws;
  CHECK(freq == doctest::Approx(0.5).epsilon(0.004));  // |freq - 0.5| < 0.002
}

TEST_CASE("chi-square goodness of fit at 1e6 draws") {
  std::vector<double> probs{1.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0};
  AliasTable table(probs);
  Rng rng(1234);
  constexpr int kDraws = 1'000'000;
  std::vector<double> counts(probs.size(), 0.0);
  for (int i = 0; i < kDraws; ++i) counts[table.sample(rng)] += 1.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double expected = probs[i] * kDraws;
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  double p = num::chi_square_sf(chi2, static_cast<double>(probs.size() - 1));
  CHECK(p > 0.001);
}

TEST_CASE("skewed distributions survive construction edge cases") {
  std::vector<double> probs{0.999999, 0.000001};
  AliasTable table(probs);
  Rng rng(5);
  std::size_t rare = 0;
  for (int i = 0; i < 200000; ++i) rare += table.sample(rng);
  CHECK(rare < 20);  // expectation 0.2

  // zero-probability entries are never drawn
  AliasTable with_zero(std::vector<double>{0.0, 1.0});
  for (int i = 0; i < 1000; ++i) CHECK(with_zero.sample(rng) == 1);
}
