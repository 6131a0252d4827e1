#include "prevalence/retrieval.hpp"

#include <algorithm>
#include <map>

namespace prevalence {

PostStratum post_stratum(const AnnotatedPost& post) {
  if (post.double_coded()) {
    return static_cast<PostStratum>(group_label(*post.agreed_label));
  }
  return static_cast<PostStratum>(3 + static_cast<int>(group_label(post.junior_label)));
}

std::size_t KeywordPool::post_count() const {
  std::size_t n = 0;
  for (const auto& posts : posts_by_keyword) n += posts.size();
  return n;
}

KeywordPool keyword_pool(std::span<const AnnotatedPost> unit_posts) {
  std::map<std::string, std::vector<PostStratum>> by_keyword;
  for (const auto& post : unit_posts) {
    by_keyword[post.keyword].push_back(post_stratum(post));
  }
  KeywordPool pool;
  pool.keywords.reserve(by_keyword.size());
  pool.posts_by_keyword.reserve(by_keyword.size());
  for (auto& [keyword, posts] : by_keyword) {
    pool.keywords.push_back(keyword);
    pool.posts_by_keyword.push_back(std::move(posts));
  }
  return pool;
}

std::vector<PostStratum> draw_keyword_replicate_pool(const KeywordPool& pool,
                                                     RandomStream& stream) {
  const std::size_t k = pool.keyword_count();
  std::vector<std::uint64_t> multiplicity(k);
  std::vector<PostStratum> realized;
  do {
    std::fill(multiplicity.begin(), multiplicity.end(), 0);
    for (std::size_t draw = 0; draw < k; ++draw) {
      ++multiplicity[stream.uniform_index(k)];
    }
    realized.clear();
    for (std::size_t i = 0; i < k; ++i) {
      for (std::uint64_t m = 0; m < multiplicity[i]; ++m) {
        realized.insert(realized.end(), pool.posts_by_keyword[i].begin(),
                        pool.posts_by_keyword[i].end());
      }
    }
  } while (realized.empty());
  return realized;
}

BootstrapResult bootstrap_retrieval(const KeywordPool& pool, std::uint64_t b_kw,
                                    std::uint64_t b_post, RandomStream stream,
                                    PrevalenceDefinition def) {
  if (b_kw == 0 || b_post == 0) throw std::invalid_argument("bootstrap sizes must be positive");
  if (pool.keyword_count() == 0) throw std::invalid_argument("empty keyword pool");

  BootstrapResult result;
  result.b_kw = b_kw;
  result.b_post = b_post;
  result.samples.reserve(b_kw * b_post);

  for (std::uint64_t b = 0; b < b_kw; ++b) {
    RandomStream kw_stream = stream.substream("kw", b);
    const std::vector<PostStratum> realized = draw_keyword_replicate_pool(pool, kw_stream);
    const std::uint64_t pool_size = realized.size();

    for (std::uint64_t t = 0; t < b_post; ++t) {
      RandomStream post_stream = kw_stream.substream("post", t);
      bool recorded = false;
      for (int attempt = 0; attempt < kUndefinedRetryBudget; ++attempt) {
        GroupedCounts counts;
        for (std::uint64_t draw = 0; draw < pool_size; ++draw) {
          counts.add(stratum_effective_group(realized[post_stream.uniform_index(pool_size)]));
        }
        if (const auto p = compute_prevalence(counts, def)) {
          result.samples.push_back(*p);
          recorded = true;
          break;
        }
      }
      if (!recorded) {
        ++result.n_undefined;
        ++result.n_exhausted_retries;
      }
    }
  }

  if (!result.samples.empty()) {
    result.summary = percentile_summary(result.samples);
  }
  return result;
}

}  // namespace prevalence
