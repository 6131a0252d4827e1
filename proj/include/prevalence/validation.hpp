#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "prevalence/annotation.hpp"
#include "prevalence/corpus_model.hpp"
#include "prevalence/ingest.hpp"
#include "prevalence/retrieval.hpp"
#include "prevalence/stats_kernel.hpp"

namespace prevalence {

// Generative description of a synthetic corpus with known ground truth.
struct SynthSpec {
  std::uint64_t n_posts = 0;
  std::array<double, 3> true_group_probs{};
  std::array<std::array<double, 3>, 3> junior_confusion{};  // true group -> junior group
  double double_coded_fraction = 0.2;
  struct KeywordModel {
    std::uint64_t n_keywords = 1;
    double concentration = 1.0;  // symmetric Dirichlet; small = concentrated
  } keyword_model;
  struct ViewModel {
    double log_mean = 6.0;
    double log_sd = 2.0;
    bool view_weighted = false;  // draw the corpus as a view-weighted subsample
  } view_model;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument on a bad spec

  double true_prevalence(PrevalenceDefinition def) const;

  static SynthSpec from_json_file(const std::string& path);
  static SynthSpec from_json_text(const std::string& text);
};

// Corpus plus the latent truth sidecar; estimators only ever see the corpus.
struct SynthCorpus {
  Corpus corpus;
  std::vector<LabelGroup> true_groups;  // parallel to corpus.posts
};

SynthCorpus generate_corpus(const SynthSpec& spec, RandomStream stream);

// Exact finite distribution over prevalence values, with the probability mass
// of undefined outcomes kept aside. Moments are conditional on defined.
struct ExactDistribution {
  std::vector<std::pair<double, double>> pmf;  // (value, probability), sorted by value
  double p_undefined = 0.0;

  double mean() const;
  double variance() const;
};

inline constexpr std::uint64_t kEnumerationTrialBound = 12;

// Exhaustive enumeration of the row-wise multinomial correction draw.
// Throws std::invalid_argument when total trials exceed the bound.
ExactDistribution enumerate_multinomial_exact(const GroupedCounts& n_remainder,
                                              const ReferenceMatrix& matrix,
                                              PrevalenceDefinition def,
                                              const GroupedCounts& n_double);

// Exact replicate-prevalence moments of the two-level bootstrap: all K^K
// keyword draws, and per realized pool the exact same-size multinomial
// resample. Bounds: K <= 3, <= 3 posts per keyword.
ExactDistribution enumerate_bootstrap_exact(const KeywordPool& pool, PrevalenceDefinition def);

enum class EstimatorMethod { Baseline, Annotation, Retrieval, Joint };

std::string to_string(EstimatorMethod m);

struct CoverageParams {
  std::uint64_t s = 200;       // annotation simulation runs
  std::uint64_t b_kw = 100;    // keyword bootstrap replicates
  std::uint64_t b_post = 100;  // post bootstrap replicates
  double alpha = 0.05;
  PrevalenceDefinition def = PrevalenceDefinition::Restricted;
};

struct CoverageReport {
  std::uint64_t trials = 0;
  std::uint64_t covered = 0;
  double coverage = 0.0;
  WilsonInterval coverage_ci{};  // Wilson interval on the coverage itself
  double true_prevalence = 0.0;
};

CoverageReport coverage_experiment(const SynthSpec& spec, std::uint64_t trials,
                                   EstimatorMethod method, RandomStream stream,
                                   const CoverageParams& params = {});

}  // namespace prevalence
