#include "prevalence/validation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "prevalence/joint.hpp"

namespace prevalence {

namespace {

void check_prob_vector(const std::array<double, 3>& v, const char* what) {
  double sum = 0.0;
  for (double p : v) {
    if (p < 0.0 || !std::isfinite(p)) throw std::invalid_argument(std::string(what) + ": negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(what) + ": does not sum to 1");
  }
}

LabelCategory representative(LabelGroup g) {
  switch (g) {
    case LabelGroup::MisDisinfo:
      return LabelCategory::MisDisinformation;
    case LabelGroup::Legit:
      return LabelCategory::CredibleInformative;
    case LabelGroup::AllTheRest:
      return LabelCategory::Irrelevant;
  }
  throw std::logic_error("bad group");
}

LabelGroup draw_group(RandomStream& stream, const std::array<double, 3>& probs) {
  const double u = stream.next_double();
  if (u < probs[0]) return LabelGroup::MisDisinfo;
  if (u < probs[0] + probs[1]) return LabelGroup::Legit;
  return LabelGroup::AllTheRest;
}

// ln of the multinomial coefficient n! / (a! b! c!)
double log_multinomial_coeff(std::uint64_t n, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(a) + 1.0) -
         std::lgamma(static_cast<double>(b) + 1.0) - std::lgamma(static_cast<double>(c) + 1.0);
}

double trinomial_pmf(std::uint64_t n, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                     double p0, double p1, double p2) {
  double log_p = log_multinomial_coeff(n, a, b, c);
  if (a > 0) {
    if (p0 == 0.0) return 0.0;
    log_p += static_cast<double>(a) * std::log(p0);
  }
  if (b > 0) {
    if (p1 == 0.0) return 0.0;
    log_p += static_cast<double>(b) * std::log(p1);
  }
  if (c > 0) {
    if (p2 == 0.0) return 0.0;
    log_p += static_cast<double>(c) * std::log(p2);
  }
  return std::exp(log_p);
}

// Accumulates (value, probability) pairs, merging values that coincide.
class PmfBuilder {
 public:
  void add(double value, double probability) {
    if (probability <= 0.0) return;
    keyed_[static_cast<long long>(std::llround(value * 1e12))] += probability;
  }

  std::vector<std::pair<double, double>> finish() const {
    std::vector<std::pair<double, double>> pmf;
    pmf.reserve(keyed_.size());
    for (const auto& [key, prob] : keyed_) {
      pmf.emplace_back(static_cast<double>(key) * 1e-12, prob);
    }
    return pmf;
  }

 private:
  std::map<long long, double> keyed_;
};

}  // namespace

void SynthSpec::validate() const {
  if (n_posts == 0) throw std::invalid_argument("n_posts must be positive");
  check_prob_vector(true_group_probs, "true_group_probs");
  for (const auto& row : junior_confusion) check_prob_vector(row, "junior_confusion row");
  if (double_coded_fraction < 0.0 || double_coded_fraction > 1.0) {
    throw std::invalid_argument("double_coded_fraction out of [0,1]");
  }
  if (keyword_model.concentration <= 0.0) {
    throw std::invalid_argument("keyword concentration must be positive");
  }
  if (view_model.log_sd < 0.0) throw std::invalid_argument("view log_sd must be nonnegative");
}

double SynthSpec::true_prevalence(PrevalenceDefinition def) const {
  const double denom = def == PrevalenceDefinition::Restricted
                           ? true_group_probs[0] + true_group_probs[1]
                           : 1.0;
  if (denom == 0.0) return 0.0;
  return true_group_probs[0] / denom;
}

SynthSpec SynthSpec::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SynthSpec spec;
  spec.n_posts = j.at("n_posts").get<std::uint64_t>();
  for (int i = 0; i < 3; ++i) spec.true_group_probs[i] = j.at("true_group_probs").at(i);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) spec.junior_confusion[i][k] = j.at("junior_confusion").at(i).at(k);
  }
  spec.double_coded_fraction = j.at("double_coded_fraction");
  if (j.contains("keyword_model")) {
    spec.keyword_model.n_keywords = j["keyword_model"].value("n_keywords", std::uint64_t{1});
    spec.keyword_model.concentration = j["keyword_model"].value("concentration", 1.0);
  }
  if (j.contains("view_model")) {
    spec.view_model.log_mean = j["view_model"].value("log_mean", 6.0);
    spec.view_model.log_sd = j["view_model"].value("log_sd", 2.0);
    spec.view_model.view_weighted = j["view_model"].value("view_weighted", false);
  }
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.validate();
  return spec;
}

SynthSpec SynthSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

SynthCorpus generate_corpus(const SynthSpec& spec, RandomStream stream) {
  spec.validate();

  // per-group keyword distributions (symmetric Dirichlet)
  const std::uint64_t n_kw = spec.keyword_model.n_keywords;
  std::array<std::vector<double>, 3> keyword_probs;
  if (n_kw > 0) {
    for (int g = 0; g < 3; ++g) {
      RandomStream kw_stream = stream.substream("kwdist", g);
      std::vector<double> weights(n_kw);
      double sum = 0.0;
      for (auto& w : weights) {
        w = kw_stream.next_gamma(spec.keyword_model.concentration);
        sum += w;
      }
      for (auto& w : weights) w = sum > 0.0 ? w / sum : 1.0 / static_cast<double>(n_kw);
      keyword_probs[g] = std::move(weights);
    }
  }

  struct Candidate {
    AnnotatedPost post;
    LabelGroup truth;
  };

  const std::uint64_t n_candidates =
      spec.view_model.view_weighted ? 2 * spec.n_posts : spec.n_posts;
  std::vector<Candidate> candidates;
  candidates.reserve(n_candidates);

  for (std::uint64_t i = 0; i < n_candidates; ++i) {
    RandomStream post_stream = stream.substream("post", i);
    Candidate c;
    c.truth = draw_group(post_stream, spec.true_group_probs);
    const LabelGroup junior_group =
        draw_group(post_stream, spec.junior_confusion[static_cast<int>(c.truth)]);

    c.post.post_id = "synth-" + std::to_string(i);
    c.post.platform = Platform::TikTok;
    c.post.language = "synth";
    c.post.junior_label = representative(junior_group);
    if (post_stream.next_double() < spec.double_coded_fraction) {
      c.post.senior_label = representative(c.truth);
      c.post.agreed_label = representative(c.truth);
    }
    if (n_kw > 0) {
      const auto& probs = keyword_probs[static_cast<int>(c.truth)];
      double u = post_stream.next_double();
      std::size_t idx = 0;
      while (idx + 1 < probs.size() && u >= probs[idx]) {
        u -= probs[idx];
        ++idx;
      }
      c.post.keyword = "kw" + std::to_string(idx);
    }
    const double log_views =
        spec.view_model.log_mean + spec.view_model.log_sd * post_stream.next_normal();
    c.post.views = static_cast<std::uint64_t>(std::min(std::exp(log_views), 1e15));
    candidates.push_back(std::move(c));
  }

  if (spec.view_model.view_weighted) {
    // Efraimidis-Spirakis weighted sampling without replacement
    RandomStream pick_stream = stream.substream("viewpick");
    std::vector<std::pair<double, std::size_t>> keys(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double w = static_cast<double>(candidates[i].post.views) + 1.0;
      const double u = std::max(pick_stream.next_double(), 1e-300);
      keys[i] = {std::log(u) / w, i};
    }
    std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Candidate> picked;
    picked.reserve(spec.n_posts);
    for (std::uint64_t i = 0; i < spec.n_posts; ++i) {
      picked.push_back(std::move(candidates[keys[i].second]));
    }
    candidates = std::move(picked);
  }

  SynthCorpus out;
  out.corpus.provenance.source = "<synthetic>";
  out.corpus.provenance.rows_read = candidates.size();
  out.corpus.posts.reserve(candidates.size());
  out.true_groups.reserve(candidates.size());
  for (auto& c : candidates) {
    out.corpus.posts.push_back(std::move(c.post));
    out.true_groups.push_back(c.truth);
  }
  return out;
}

double ExactDistribution::mean() const {
  const double defined_mass = 1.0 - p_undefined;
  if (defined_mass <= 0.0) return 0.0;
  double acc = 0.0;
  for (const auto& [v, p] : pmf) acc += v * p;
  return acc / defined_mass;
}

double ExactDistribution::variance() const {
  const double defined_mass = 1.0 - p_undefined;
  if (defined_mass <= 0.0) return 0.0;
  double acc = 0.0;
  const double m = mean();
  for (const auto& [v, p] : pmf) acc += (v - m) * (v - m) * p;
  return acc / defined_mass;
}

ExactDistribution enumerate_multinomial_exact(const GroupedCounts& n_remainder,
                                              const ReferenceMatrix& matrix,
                                              PrevalenceDefinition def,
                                              const GroupedCounts& n_double) {
  if (n_remainder.total() > kEnumerationTrialBound) {
    throw std::invalid_argument("enumerate_multinomial_exact: too many trials");
  }

  struct RowOutcome {
    std::uint64_t col[3];
    double prob;
  };
  std::array<std::vector<RowOutcome>, 3> row_outcomes;
  const std::uint64_t row_trials[3] = {n_remainder.n_mis, n_remainder.n_legit, n_remainder.n_rest};
  for (int i = 0; i < 3; ++i) {
    const std::uint64_t n = row_trials[i];
    for (std::uint64_t a = 0; a <= n; ++a) {
      for (std::uint64_t b = 0; b + a <= n; ++b) {
        const std::uint64_t c = n - a - b;
        const double p = trinomial_pmf(n, a, b, c, matrix.probs[i][0], matrix.probs[i][1],
                                       matrix.probs[i][2]);
        if (p > 0.0) row_outcomes[i].push_back({{a, b, c}, p});
      }
    }
  }

  PmfBuilder builder;
  double p_undefined = 0.0;
  for (const auto& r0 : row_outcomes[0]) {
    for (const auto& r1 : row_outcomes[1]) {
      for (const auto& r2 : row_outcomes[2]) {
        const double prob = r0.prob * r1.prob * r2.prob;
        GroupedCounts corrected = n_double;
        corrected.n_mis += r0.col[0] + r1.col[0] + r2.col[0];
        corrected.n_legit += r0.col[1] + r1.col[1] + r2.col[1];
        corrected.n_rest += r0.col[2] + r1.col[2] + r2.col[2];
        if (const auto p = compute_prevalence(corrected, def)) {
          builder.add(*p, prob);
        } else {
          p_undefined += prob;
        }
      }
    }
  }

  ExactDistribution dist;
  dist.pmf = builder.finish();
  dist.p_undefined = p_undefined;
  return dist;
}

ExactDistribution enumerate_bootstrap_exact(const KeywordPool& pool, PrevalenceDefinition def) {
  const std::size_t k = pool.keyword_count();
  if (k == 0) throw std::invalid_argument("empty pool");
  if (k > 3) throw std::invalid_argument("enumerate_bootstrap_exact: K > 3");
  for (const auto& posts : pool.posts_by_keyword) {
    if (posts.size() > 3) {
      throw std::invalid_argument("enumerate_bootstrap_exact: more than 3 posts per keyword");
    }
  }

  const double draw_prob = std::pow(1.0 / static_cast<double>(k), static_cast<double>(k));
  std::uint64_t n_sequences = 1;
  for (std::size_t i = 0; i < k; ++i) n_sequences *= k;

  PmfBuilder builder;
  double p_undefined = 0.0;

  for (std::uint64_t seq = 0; seq < n_sequences; ++seq) {
    // decode the ordered keyword draw
    std::vector<std::uint64_t> multiplicity(k, 0);
    std::uint64_t code = seq;
    for (std::size_t d = 0; d < k; ++d) {
      ++multiplicity[code % k];
      code /= k;
    }

    // realized pool reduced to effective-group counts
    GroupedCounts pool_counts;
    for (std::size_t i = 0; i < k; ++i) {
      for (const PostStratum st : pool.posts_by_keyword[i]) {
        pool_counts.add(stratum_effective_group(st), multiplicity[i]);
      }
    }
    const std::uint64_t n = pool_counts.total();
    if (n == 0) continue;  // redrawn by the guard, carries no mass

    const double p0 = static_cast<double>(pool_counts.n_mis) / static_cast<double>(n);
    const double p1 = static_cast<double>(pool_counts.n_legit) / static_cast<double>(n);
    const double p2 = static_cast<double>(pool_counts.n_rest) / static_cast<double>(n);

    // exact same-size resample distribution, conditional on a defined
    // prevalence (mirrors the retry-until-defined behaviour)
    PmfBuilder conditional;
    double defined_mass = 0.0;
    for (std::uint64_t a = 0; a <= n; ++a) {
      for (std::uint64_t b = 0; b + a <= n; ++b) {
        const std::uint64_t c = n - a - b;
        const double prob = trinomial_pmf(n, a, b, c, p0, p1, p2);
        if (prob <= 0.0) continue;
        const GroupedCounts counts{a, b, c};
        if (const auto p = compute_prevalence(counts, def)) {
          conditional.add(*p, prob);
          defined_mass += prob;
        }
      }
    }
    if (defined_mass <= 0.0) {
      p_undefined += draw_prob;
      continue;
    }
    for (const auto& [value, prob] : conditional.finish()) {
      builder.add(value, draw_prob * prob / defined_mass);
    }
  }

  ExactDistribution dist;
  dist.pmf = builder.finish();
  dist.p_undefined = p_undefined;
  return dist;
}

std::string to_string(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::Baseline:
      return "baseline";
    case EstimatorMethod::Annotation:
      return "annotation";
    case EstimatorMethod::Retrieval:
      return "retrieval";
    case EstimatorMethod::Joint:
      return "joint";
  }
  return "?";
}

CoverageReport coverage_experiment(const SynthSpec& spec, std::uint64_t trials,
                                   EstimatorMethod method, RandomStream stream,
                                   const CoverageParams& params) {
  if (trials < 1) throw std::invalid_argument("trials must be positive");

  CoverageReport report;
  report.trials = trials;
  report.true_prevalence = spec.true_prevalence(params.def);
  const double z = normal_quantile_two_sided(params.alpha);

  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    RandomStream trial_stream = stream.substream("trial", trial);
    const SynthCorpus synth = generate_corpus(spec, trial_stream.substream("gen"));
    const std::vector<AnnotatedPost>& posts = synth.corpus.posts;

    double lower = 0.0;
    double upper = 0.0;
    switch (method) {
      case EstimatorMethod::Baseline: {
        GroupedCounts counts;
        for (const auto& post : posts) counts.add(group_label(effective_label(post)));
        const std::uint64_t denom = params.def == PrevalenceDefinition::Restricted
                                        ? counts.n_mis + counts.n_legit
                                        : counts.total();
        if (denom == 0) continue;
        const auto ci = wilson_interval(counts.n_mis, denom, z);
        lower = ci.lower;
        upper = ci.upper;
        break;
      }
      case EstimatorMethod::Annotation: {
        const auto matrix = build_reference_matrix(posts);
        const auto sim = simulate_annotation(posts, matrix, params.s,
                                             trial_stream.substream("est"), params.def);
        if (sim.samples.empty()) continue;
        lower = sim.summary.p2_5;
        upper = sim.summary.p97_5;
        break;
      }
      case EstimatorMethod::Retrieval: {
        const auto pool = keyword_pool(posts);
        const auto boot = bootstrap_retrieval(pool, params.b_kw, params.b_post,
                                              trial_stream.substream("est"), params.def);
        if (boot.samples.empty()) continue;
        lower = boot.summary.p2_5;
        upper = boot.summary.p97_5;
        break;
      }
      case EstimatorMethod::Joint: {
        const auto joint = estimate_joint(posts, params.b_kw, params.b_post, params.s,
                                          trial_stream.substream("est"), params.def);
        if (joint.samples.empty()) continue;
        lower = joint.summary.p2_5;
        upper = joint.summary.p97_5;
        break;
      }
    }
    if (lower <= report.true_prevalence && report.true_prevalence <= upper) {
      ++report.covered;
    }
  }

  report.coverage = static_cast<double>(report.covered) / static_cast<double>(report.trials);
  report.coverage_ci = wilson_interval(report.covered, report.trials, 1.96);
  return report;
}

}  // namespace prevalence
