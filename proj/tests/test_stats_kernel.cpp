#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "prevalence/stats_kernel.hpp"

using namespace prevalence;

TEST_CASE("wilson interval closed form") {
  SUBCASE("x = 0 pins the lower bound at 0") {
    const auto ci = wilson_interval(0, 100, 1.96);
    CHECK(ci.lower == 0.0);
    // upper = z^2 / (n + z^2)
    CHECK(ci.upper == doctest::Approx(1.96 * 1.96 / (100.0 + 1.96 * 1.96)).epsilon(1e-12));
    CHECK(ci.upper == doctest::Approx(0.0369947).epsilon(1e-5));
  }
  SUBCASE("symmetric about one half") {
    const auto ci = wilson_interval(50, 100, 1.96);
    CHECK(ci.lower == doctest::Approx(0.403830).epsilon(1e-5));
    CHECK(ci.upper == doctest::Approx(0.596170).epsilon(1e-5));
    CHECK(ci.lower + ci.upper == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("invalid counts") {
    CHECK_THROWS_AS(wilson_interval(5, 0, 1.96), std::invalid_argument);
    CHECK_THROWS_AS(wilson_interval(5, 4, 1.96), std::invalid_argument);
  }
}

TEST_CASE("wilson interval properties") {
  // contains p_hat, and width shrinks as n grows with p_hat fixed
  double previous_width = 2.0;
  for (std::uint64_t n : {20, 80, 320, 1280, 5120}) {
    const std::uint64_t x = n / 4;
    const auto ci = wilson_interval(x, n, 1.96);
    CHECK(ci.lower <= ci.p_hat);
    CHECK(ci.p_hat <= ci.upper);
    const double width = ci.upper - ci.lower;
    CHECK(width < previous_width);
    previous_width = width;
  }
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile_two_sided(0.05) == doctest::Approx(1.959964).epsilon(1e-5));
  CHECK(normal_quantile_two_sided(0.01) == doctest::Approx(2.575829).epsilon(1e-5));
}

TEST_CASE("prevalence definitions") {
  const GroupedCounts counts{10, 90, 100};
  CHECK(*compute_prevalence(counts, PrevalenceDefinition::Restricted) == doctest::Approx(0.10));
  CHECK(*compute_prevalence(counts, PrevalenceDefinition::Total) == doctest::Approx(0.05));
  CHECK_FALSE(compute_prevalence({0, 0, 5}, PrevalenceDefinition::Restricted).has_value());
  CHECK(*compute_prevalence({0, 0, 5}, PrevalenceDefinition::Total) == 0.0);
  CHECK_FALSE(compute_prevalence({0, 0, 0}, PrevalenceDefinition::Total).has_value());
}

TEST_CASE("multinomial draw basics") {
  RandomStream stream(123);
  CHECK(multinomial_draw(stream, 0, {0.5, 0.5}) == std::vector<std::uint64_t>{0, 0});
  CHECK(multinomial_draw(stream, 7, {1.0, 0.0, 0.0}) == std::vector<std::uint64_t>{7, 0, 0});
  CHECK_THROWS_AS(multinomial_draw(stream, 3, {0.5, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(multinomial_draw(stream, 3, {-0.1, 1.1}), std::invalid_argument);
}

TEST_CASE("multinomial draw matches analytic mean") {
  const std::vector<double> probs = {0.5, 0.3, 0.2};
  const std::uint64_t trials = 10;
  const int draws = 100000;
  RandomStream stream(99);
  double sums[3] = {0, 0, 0};
  for (int d = 0; d < draws; ++d) {
    RandomStream sub = stream.substream("draw", d);
    const auto counts = multinomial_draw(sub, trials, probs);
    for (int i = 0; i < 3; ++i) sums[i] += static_cast<double>(counts[i]);
  }
  for (int i = 0; i < 3; ++i) {
    const double mean = sums[i] / draws;
    const double expected = static_cast<double>(trials) * probs[i];
    const double se = std::sqrt(trials * probs[i] * (1 - probs[i]) / draws);
    CHECK(std::abs(mean - expected) <= 3.0 * se);
  }
}

TEST_CASE("multinomial chi-square goodness of fit") {
  const std::vector<double> probs = {0.6, 0.3, 0.1};
  const int draws = 100000;
  RandomStream stream(7);
  // single-trial draws give the cell distribution directly
  std::uint64_t cells[3] = {0, 0, 0};
  for (int d = 0; d < draws; ++d) {
    RandomStream sub = stream.substream("gof", d);
    const auto counts = multinomial_draw(sub, 1, probs);
    for (int i = 0; i < 3; ++i) cells[i] += counts[i];
  }
  double stat = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double expected = draws * probs[i];
    stat += (cells[i] - expected) * (cells[i] - expected) / expected;
  }
  CHECK(chi_square_sf(stat, 2.0) > 0.001);
}

TEST_CASE("percentile summary") {
  SUBCASE("constant distribution") {
    const std::vector<double> samples(500, 0.1);
    const auto s = percentile_summary(samples);
    CHECK(s.mean == doctest::Approx(0.1));
    CHECK(s.p2_5 == doctest::Approx(0.1));
    CHECK(s.p97_5 == doctest::Approx(0.1));
    CHECK(s.n_samples == 500);
  }
  SUBCASE("uniform grid") {
    std::vector<double> samples;
    for (int i = 1; i <= 1000; ++i) samples.push_back(i / 1000.0);
    const auto s = percentile_summary(samples);
    CHECK(s.p2_5 == doctest::Approx(0.025975).epsilon(1e-9));  // inclusive interpolation
    CHECK(s.p97_5 == doctest::Approx(0.975025).epsilon(1e-9));
    CHECK(s.median == doctest::Approx(0.5005).epsilon(1e-9));
  }
  SUBCASE("single sample") {
    const auto s = percentile_summary({0.42});
    CHECK(s.mean == 0.42);
    CHECK(s.p2_5 == 0.42);
    CHECK(s.median == 0.42);
    CHECK(s.p97_5 == 0.42);
  }
  SUBCASE("empty input throws") {
    CHECK_THROWS_AS(percentile_summary({}), std::invalid_argument);
  }
  SUBCASE("permutation invariance") {
    std::vector<double> samples;
    std::mt19937 rng(5);
    for (int i = 0; i < 200; ++i) samples.push_back(std::uniform_real_distribution<>(0, 1)(rng));
    const auto before = percentile_summary(samples);
    std::shuffle(samples.begin(), samples.end(), rng);
    const auto after = percentile_summary(samples);
    CHECK(before.mean == doctest::Approx(after.mean).epsilon(1e-12));
    CHECK(before.p2_5 == after.p2_5);
    CHECK(before.median == after.median);
    CHECK(before.p97_5 == after.p97_5);
  }
}

TEST_CASE("random stream substreams") {
  RandomStream base(42);

  SUBCASE("same path reproduces draws") {
    RandomStream a = base.substream("rep", 3);
    RandomStream b = base.substream("rep", 3);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  }
  SUBCASE("different index diverges") {
    RandomStream a = base.substream("rep", 0);
    RandomStream b = base.substream("rep", 1);
    bool differ = false;
    for (int i = 0; i < 10; ++i) differ |= (a.next_u64() != b.next_u64());
    CHECK(differ);
  }
  SUBCASE("draws independent of evaluation order") {
    std::vector<double> forward(16), reverse(16);
    for (int i = 0; i < 16; ++i) {
      RandomStream s = base.substream("cell", i);
      forward[i] = s.next_double();
    }
    for (int i = 15; i >= 0; --i) {
      RandomStream s = base.substream("cell", i);
      reverse[i] = s.next_double();
    }
    CHECK(forward == reverse);
  }
  SUBCASE("uniform_index stays in range") {
    RandomStream s = base.substream("idx");
    for (int i = 0; i < 1000; ++i) CHECK(s.uniform_index(7) < 7);
    CHECK_THROWS_AS(s.uniform_index(0), std::invalid_argument);
  }
}

TEST_CASE("round half to even at one decimal") {
  CHECK(round_pct_1dp(0.25) == doctest::Approx(0.2));
  CHECK(round_pct_1dp(0.75) == doctest::Approx(0.8));
  CHECK(round_pct_1dp(17.54) == doctest::Approx(17.5));
  CHECK(round_pct_1dp(17.56) == doctest::Approx(17.6));
  CHECK(round_pct_1dp(2.0) == doctest::Approx(2.0));
}
