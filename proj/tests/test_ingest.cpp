#include <doctest.h>

#include <set>

#include "prevalence/ingest.hpp"

using namespace prevalence;

namespace {

const char* kHeader =
    "post_id,platform,language,keyword,views,junior_label,senior_label,agreed_label\n";

AnnotatedPost make_post(std::string id, LabelCategory junior,
                        std::optional<LabelCategory> senior = std::nullopt,
                        std::optional<LabelCategory> agreed = std::nullopt) {
  AnnotatedPost p;
  p.post_id = std::move(id);
  p.platform = Platform::TikTok;
  p.language = "fr";
  p.junior_label = junior;
  p.senior_label = senior;
  p.agreed_label = agreed;
  return p;
}

}  // namespace

TEST_CASE("parse happy path") {
  const std::string csv = std::string(kHeader) +
                          "a,TikTok,fr,vaccine,10,MisDisinformation,,\n"
                          "b,YouTube,pl,,0,CredibleInformative,Unverifiable,Unverifiable\n"
                          "c,LinkedIn,sk,climate,5,Irrelevant,,\n";
  const ParseResult result = parse_corpus_text(csv);
  REQUIRE(result.errors.empty());
  REQUIRE(result.rows.size() == 3);
  CHECK(result.rows[0].keyword == "vaccine");
  CHECK(result.rows[1].keyword == kEmptyKeywordSentinel);
  CHECK(result.rows[1].double_coded());
  CHECK_FALSE(result.rows[0].double_coded());
}

TEST_CASE("missing column is a schema error") {
  const std::string csv = "post_id,platform,language,keyword,views,senior_label,agreed_label\n";
  const ParseResult result = parse_corpus_text(csv);
  REQUIRE(result.errors.size() == 1);
  CHECK(result.errors[0].kind == RowError::Kind::MissingColumn);
  CHECK(result.rows.empty());
}

TEST_CASE("row-level validation") {
  const std::string csv = std::string(kHeader) +
                          "a,TikTok,fr,k,-3,MisDisinformation,,\n"       // bad views
                          "b,TikTok,fr,k,1,NotALabel,,\n"                 // bad label
                          "b2,Friendster,fr,k,1,MisDisinformation,,\n"    // bad platform
                          "c,TikTok,fr,k,1,MisDisinformation,,\n"
                          "c,TikTok,fr,k,1,MisDisinformation,,\n"         // duplicate id
                          "d,TikTok,fr,k,1,Borderline,,MisDisinformation\n";  // agreed w/o senior
  const ParseResult result = parse_corpus_text(csv);
  CHECK(result.rows.size() == 1);
  std::multiset<RowError::Kind> kinds;
  for (const auto& e : result.errors) kinds.insert(e.kind);
  CHECK(kinds.count(RowError::Kind::BadViews) == 1);
  CHECK(kinds.count(RowError::Kind::BadLabel) == 1);
  CHECK(kinds.count(RowError::Kind::BadPlatform) == 1);
  CHECK(kinds.count(RowError::Kind::DuplicatePostId) == 1);
  CHECK(kinds.count(RowError::Kind::MalformedDoubleCoding) == 1);
}

TEST_CASE("quoted keyword with comma") {
  const std::string csv =
      std::string(kHeader) + "a,TikTok,fr,\"climate, change\",1,MisDisinformation,,\n";
  const ParseResult result = parse_corpus_text(csv);
  REQUIRE(result.errors.empty());
  CHECK(result.rows[0].keyword == "climate, change");
}

TEST_CASE("preprocess removal rules") {
  std::vector<AnnotatedPost> rows;
  rows.push_back(make_post("r1", LabelCategory::Deleted, LabelCategory::Deleted,
                           LabelCategory::Deleted));  // R1
  rows.push_back(make_post("r2", LabelCategory::CredibleInformative, LabelCategory::Deleted,
                           LabelCategory::Deleted));  // R2
  rows.push_back(make_post("keep1", LabelCategory::Deleted));  // junior-only Deleted retained
  rows.push_back(make_post("keep2", LabelCategory::MisDisinformation));

  const Corpus corpus = preprocess(rows, "test");
  CHECK(corpus.posts.size() == 2);
  CHECK(corpus.provenance.rows_read == 4);
  CHECK(corpus.provenance.dropped_r1 == 1);
  CHECK(corpus.provenance.dropped_r2 == 1);
  CHECK(corpus.posts[0].post_id == "keep1");
}

TEST_CASE("preprocess accounting and idempotence") {
  std::vector<AnnotatedPost> rows;
  for (int i = 0; i < 30; ++i) {
    const auto junior = static_cast<LabelCategory>(i % kNumLabelCategories);
    if (i % 3 == 0) {
      const auto senior = static_cast<LabelCategory>((i / 3) % kNumLabelCategories);
      rows.push_back(make_post("p" + std::to_string(i), junior, senior, senior));
    } else {
      rows.push_back(make_post("p" + std::to_string(i), junior));
    }
  }
  const Corpus once = preprocess(rows, "test");
  CHECK(once.posts.size() + once.provenance.dropped_r1 + once.provenance.dropped_r2 ==
        once.provenance.rows_read);

  const Corpus twice = preprocess(once.posts, "test");
  CHECK(twice.provenance.dropped_r1 == 0);
  CHECK(twice.provenance.dropped_r2 == 0);
  CHECK(twice.posts.size() == once.posts.size());
}

TEST_CASE("slice_by_unit filters and partitions") {
  std::vector<AnnotatedPost> rows;
  const Platform platforms[] = {Platform::TikTok, Platform::YouTube, Platform::Facebook};
  const char* languages[] = {"fr", "pl", "sk"};
  int id = 0;
  for (const auto p : platforms) {
    for (const auto* lang : languages) {
      for (int i = 0; i < 3; ++i) {
        auto post = make_post("s" + std::to_string(id++), LabelCategory::Irrelevant);
        post.platform = p;
        post.language = lang;
        rows.push_back(std::move(post));
      }
    }
  }
  const Corpus corpus = preprocess(rows, "test");

  const auto fr = slice_by_unit(corpus, AnalysisUnit::for_language("fr"));
  CHECK(fr.posts.size() == 9);
  CHECK_FALSE(fr.empty_warning);

  const auto tt_sk =
      slice_by_unit(corpus, AnalysisUnit::for_platform_language(Platform::TikTok, "sk"));
  CHECK(tt_sk.posts.size() == 3);

  const auto linkedin = slice_by_unit(corpus, AnalysisUnit::for_platform(Platform::LinkedIn));
  CHECK(linkedin.posts.empty());
  CHECK(linkedin.empty_warning);

  // each unit family partitions the corpus
  for (const auto kind : {AnalysisUnit::Kind::Language, AnalysisUnit::Kind::Platform,
                          AnalysisUnit::Kind::PlatformLanguage}) {
    std::size_t total = 0;
    std::set<std::string> seen_ids;
    for (const auto& unit : enumerate_units(corpus, kind)) {
      const auto slice = slice_by_unit(corpus, unit);
      total += slice.posts.size();
      for (const auto& post : slice.posts) {
        CHECK(seen_ids.insert(post.post_id).second);
      }
    }
    CHECK(total == corpus.posts.size());
  }
}
