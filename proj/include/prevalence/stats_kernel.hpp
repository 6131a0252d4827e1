#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "prevalence/corpus_model.hpp"

namespace prevalence {

// Counter-style splittable random stream. Substreams derived from distinct
// (label, index) paths are statistically independent, and every draw sequence
// is a pure function of (master_seed, path) regardless of worker count.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t master_seed);

  RandomStream substream(std::string_view label, std::uint64_t index = 0) const;

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double();

  // Uniform in [0, n), unbiased (rejection sampling). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via Box-Muller.
  double next_normal();

  // Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double next_gamma(double shape);

 private:
  RandomStream(std::uint64_t key, int /*tag*/);

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct WilsonInterval {
  double p_hat = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::uint64_t n = 0;
  double z = 0.0;
};

// Closed-form Wilson score interval; throws std::invalid_argument on x > n or n = 0.
WilsonInterval wilson_interval(std::uint64_t x, std::uint64_t n, double z = 1.96);

// z quantile for a two-sided (1 - alpha) interval, e.g. alpha = 0.05 -> 1.959964.
double normal_quantile_two_sided(double alpha);

// Restricted: n_mis / (n_mis + n_legit); Total: n_mis / total.
// nullopt when the denominator is zero.
std::optional<double> compute_prevalence(const GroupedCounts& counts, PrevalenceDefinition def);

// One multinomial draw; counts sum to trials. probs must be nonnegative and
// sum to 1 within 1e-9, else throws std::invalid_argument.
std::vector<std::uint64_t> multinomial_draw(RandomStream& stream, std::uint64_t trials,
                                            const std::vector<double>& probs);

struct PercentileSummary {
  double mean = 0.0;
  double p2_5 = 0.0;
  double p97_5 = 0.0;
  double median = 0.0;
  std::uint64_t n_samples = 0;
};

// Empirical percentiles with linear interpolation between closest ranks
// (inclusive method). Throws std::invalid_argument on empty input.
PercentileSummary percentile_summary(const std::vector<double>& samples);

// Quantile q in [0,1] of a sorted sample, inclusive linear interpolation.
double quantile_sorted(const std::vector<double>& sorted, double q);

// Survival function of the chi-square distribution (upper regularized gamma).
double chi_square_sf(double x, double df);

// Round-half-to-even at one decimal, as rendered in reports.
double round_pct_1dp(double value);

}  // namespace prevalence
