#include "prevalence/stats_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prevalence {

namespace {

// 64-bit finalizer from splitmix64.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed) : key_(mix64(master_seed)) {}

RandomStream::RandomStream(std::uint64_t key, int) : key_(key) {}

RandomStream RandomStream::substream(std::string_view label, std::uint64_t index) const {
  std::uint64_t k = key_;
  k = mix64(k ^ fnv1a(label));
  k = mix64(k ^ (index + 0x9e3779b97f4a7c15ULL));
  return RandomStream(k, 0);
}

std::uint64_t RandomStream::next_u64() { return mix64(key_ ^ mix64(++counter_)); }

double RandomStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return draw % n;
}

double RandomStream::next_normal() {
  double u1;
  do {
    u1 = next_double();
  } while (u1 <= 0.0);
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double RandomStream::next_gamma(double shape) {
  if (shape <= 0.0) throw std::invalid_argument("next_gamma: shape must be positive");
  if (shape < 1.0) {
    // boost to shape+1 and scale back
    const double u = std::max(next_double(), 1e-300);
    return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = next_normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

WilsonInterval wilson_interval(std::uint64_t x, std::uint64_t n, double z) {
  if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
  if (x > n) throw std::invalid_argument("wilson_interval: x exceeds n");
  if (z <= 0.0) throw std::invalid_argument("wilson_interval: z must be positive");

  const double nd = static_cast<double>(n);
  const double p_hat = static_cast<double>(x) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = p_hat + z2 / (2.0 * nd);
  const double spread = z * std::sqrt(p_hat * (1.0 - p_hat) / nd + z2 / (4.0 * nd * nd));

  WilsonInterval result;
  result.p_hat = p_hat;
  result.lower = std::clamp((center - spread) / denom, 0.0, 1.0);
  result.upper = std::clamp((center + spread) / denom, 0.0, 1.0);
  result.n = n;
  result.z = z;
  return result;
}

double normal_quantile_two_sided(double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw std::invalid_argument("alpha must be in (0, 1)");
  }
  // Acklam's rational approximation of the inverse normal CDF, refined with
  // one Halley step; absolute error well below 1e-12.
  const double p = 1.0 - alpha / 2.0;
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

std::optional<double> compute_prevalence(const GroupedCounts& counts, PrevalenceDefinition def) {
  const std::uint64_t denom = def == PrevalenceDefinition::Restricted
                                  ? counts.n_mis + counts.n_legit
                                  : counts.total();
  if (denom == 0) return std::nullopt;
  return static_cast<double>(counts.n_mis) / static_cast<double>(denom);
}

std::vector<std::uint64_t> multinomial_draw(RandomStream& stream, std::uint64_t trials,
                                            const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("multinomial_draw: empty probs");
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw std::invalid_argument("multinomial_draw: negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("multinomial_draw: probabilities do not sum to 1");
  }

  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  std::vector<std::uint64_t> counts(probs.size(), 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const double u = stream.next_double();
    std::size_t cell = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    if (cell == cdf.size()) cell = cdf.size() - 1;
    // skip zero-probability cells the search may land on
    while (probs[cell] == 0.0 && cell + 1 < probs.size()) ++cell;
    ++counts[cell];
  }
  return counts;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PercentileSummary percentile_summary(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("percentile_summary: empty samples");
  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end());

  double sum = 0.0;
  for (double v : sorted) sum += v;

  PercentileSummary s;
  s.mean = sum / static_cast<double>(sorted.size());
  s.p2_5 = quantile_sorted(sorted, 0.025);
  s.median = quantile_sorted(sorted, 0.5);
  s.p97_5 = quantile_sorted(sorted, 0.975);
  s.n_samples = sorted.size();
  return s;
}

namespace {

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) {
    // series for P(a,x)
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    const double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    return 1.0 - p;
  }
  // continued fraction for Q(a,x), modified Lentz
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi_square_sf(double x, double df) { return gamma_q(df / 2.0, x / 2.0); }

double round_pct_1dp(double value) {
  const double scaled = value * 10.0;
  const double floor_v = std::floor(scaled);
  const double frac = scaled - floor_v;
  double rounded;
  if (frac > 0.5) {
    rounded = floor_v + 1.0;
  } else if (frac < 0.5) {
    rounded = floor_v;
  } else {
    rounded = (std::fmod(floor_v, 2.0) == 0.0) ? floor_v : floor_v + 1.0;
  }
  return rounded / 10.0;
}

}  // namespace prevalence
