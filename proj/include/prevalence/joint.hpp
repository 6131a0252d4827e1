#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prevalence/annotation.hpp"
#include "prevalence/corpus_model.hpp"
#include "prevalence/retrieval.hpp"
#include "prevalence/stats_kernel.hpp"

namespace prevalence {

struct JointResult {
  std::vector<double> samples;  // flattened over the b_kw x b_post x s grid
  PercentileSummary summary{};
  std::uint64_t n_undefined = 0;
  std::uint64_t b_kw = 0;
  std::uint64_t b_post = 0;
  std::uint64_t s = 0;
  ReferenceMatrix matrix;  // the unit-level matrix used by every run
  bool identity_fallback = false;
};

// Composition of the keyword/post bootstrap with the multinomial annotation
// simulation: the reference matrix is built once per unit; each (b, t)
// resample is split into double-coded and junior-only parts (with
// multiplicity) and the annotation simulation runs s times per resample.
JointResult estimate_joint(std::span<const AnnotatedPost> unit_posts, std::uint64_t b_kw,
                           std::uint64_t b_post, std::uint64_t s, RandomStream stream,
                           PrevalenceDefinition def);

}  // namespace prevalence
