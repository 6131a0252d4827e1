#include "prevalence/joint.hpp"

#include <stdexcept>

namespace prevalence {

JointResult estimate_joint(std::span<const AnnotatedPost> unit_posts, std::uint64_t b_kw,
                           std::uint64_t b_post, std::uint64_t s, RandomStream stream,
                           PrevalenceDefinition def) {
  if (b_kw == 0 || b_post == 0 || s == 0) {
    throw std::invalid_argument("iteration counts must be positive");
  }
  if (unit_posts.empty()) throw std::invalid_argument("empty unit");

  JointResult result;
  result.b_kw = b_kw;
  result.b_post = b_post;
  result.s = s;

  bool any_double_coded = false;
  for (const auto& post : unit_posts) {
    if (post.double_coded()) {
      any_double_coded = true;
      break;
    }
  }
  result.matrix = build_reference_matrix(unit_posts);
  result.identity_fallback = !any_double_coded;

  const KeywordPool pool = keyword_pool(unit_posts);
  result.samples.reserve(b_kw * b_post * s);

  for (std::uint64_t b = 0; b < b_kw; ++b) {
    RandomStream kw_stream = stream.substream("kw", b);
    const std::vector<PostStratum> realized = draw_keyword_replicate_pool(pool, kw_stream);
    const std::uint64_t pool_size = realized.size();

    for (std::uint64_t t = 0; t < b_post; ++t) {
      RandomStream post_stream = kw_stream.substream("post", t);

      // resample, split into double-coded / junior-only with multiplicity
      GroupedCounts n_double;
      GroupedCounts n_remainder;
      for (std::uint64_t draw = 0; draw < pool_size; ++draw) {
        const PostStratum st = realized[post_stream.uniform_index(pool_size)];
        if (stratum_double_coded(st)) {
          n_double.add(static_cast<LabelGroup>(st));
        } else {
          n_remainder.add(static_cast<LabelGroup>(st - 3));
        }
      }

      for (std::uint64_t sim = 0; sim < s; ++sim) {
        RandomStream sim_stream = post_stream.substream("sim", sim);
        const CorrectedDraw draw =
            draw_corrected_counts(sim_stream, n_double, n_remainder, result.matrix);
        if (const auto p = compute_prevalence(draw.corrected, def)) {
          result.samples.push_back(*p);
        } else {
          ++result.n_undefined;
        }
      }
    }
  }

  if (!result.samples.empty()) {
    result.summary = percentile_summary(result.samples);
  }
  return result;
}

}  // namespace prevalence
