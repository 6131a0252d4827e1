#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prevalence/corpus_model.hpp"
#include "prevalence/stats_kernel.hpp"

namespace prevalence {

// Compact per-post encoding used by the resampling loops. Strata 0..2 are
// double-coded posts by agreed group, 3..5 are junior-only posts by junior
// group.
using PostStratum = std::uint8_t;

PostStratum post_stratum(const AnnotatedPost& post);

inline LabelGroup stratum_effective_group(PostStratum s) {
  return static_cast<LabelGroup>(s < 3 ? s : s - 3);
}

inline bool stratum_double_coded(PostStratum s) { return s < 3; }

// Posts grouped by keyword token; posts without a keyword sit under the
// reserved sentinel. Every keyword has at least one post.
struct KeywordPool {
  std::vector<std::string> keywords;                       // sorted, unique
  std::vector<std::vector<PostStratum>> posts_by_keyword;  // parallel to keywords

  std::size_t keyword_count() const { return keywords.size(); }
  std::size_t post_count() const;
};

KeywordPool keyword_pool(std::span<const AnnotatedPost> unit_posts);

struct BootstrapResult {
  std::vector<double> samples;
  PercentileSummary summary{};
  std::uint64_t n_undefined = 0;
  std::uint64_t n_exhausted_retries = 0;
  std::uint64_t b_kw = 0;
  std::uint64_t b_post = 0;
};

inline constexpr int kUndefinedRetryBudget = 100;

// One keyword-level replicate: draws K keywords with replacement and builds
// the realized post pool with keyword multiplicities. Redraws while empty.
std::vector<PostStratum> draw_keyword_replicate_pool(const KeywordPool& pool,
                                                     RandomStream& stream);

// Two-level keyword/post bootstrap: per keyword replicate, K keywords are
// drawn with replacement and the realized post pool is built with keyword
// multiplicities; per post replicate, a same-size resample of the pool is
// drawn and its prevalence recorded. Restricted-denominator-zero resamples
// are redrawn up to the retry budget, then counted as undefined.
BootstrapResult bootstrap_retrieval(const KeywordPool& pool, std::uint64_t b_kw,
                                    std::uint64_t b_post, RandomStream stream,
                                    PrevalenceDefinition def);

}  // namespace prevalence
