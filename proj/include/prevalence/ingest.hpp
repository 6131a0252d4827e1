#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "prevalence/corpus_model.hpp"

namespace prevalence {

struct RowError {
  enum class Kind {
    MissingColumn,
    BadLabel,
    BadPlatform,
    BadViews,
    DuplicatePostId,
    MalformedDoubleCoding,  // agreed label present without a senior label
    BadRow,
  };
  Kind kind{};
  std::size_t row = 0;  // 1-based data row number, 0 for file-level errors
  std::string detail;
};

std::string to_string(RowError::Kind kind);

struct ParseResult {
  std::vector<AnnotatedPost> rows;
  std::vector<RowError> errors;
};

struct Provenance {
  std::string source;
  std::size_t rows_read = 0;
  std::size_t dropped_r1 = 0;  // Deleted by both annotators
  std::size_t dropped_r2 = 0;  // Deleted by Senior only
};

struct Corpus {
  std::vector<AnnotatedPost> posts;
  Provenance provenance;
};

// Expected header: post_id,platform,language,keyword,views,junior_label,senior_label,agreed_label
// Throws std::runtime_error if the file cannot be opened; schema problems are
// reported as a MissingColumn error with no rows.
ParseResult parse_corpus(const std::string& path);

ParseResult parse_corpus_text(const std::string& text, const std::string& source_name = "<memory>");

// Applies the removal rules: R1 drops posts Deleted by both annotators, R2
// drops posts Deleted by the Senior only. Drops are accounted in provenance.
Corpus preprocess(std::vector<AnnotatedPost> rows, std::string source = {});

struct UnitSlice {
  std::vector<AnnotatedPost> posts;
  bool empty_warning = false;
};

UnitSlice slice_by_unit(const Corpus& corpus, const AnalysisUnit& unit);

// Distinct unit keys present in the corpus, sorted canonically.
std::vector<AnalysisUnit> enumerate_units(const Corpus& corpus, AnalysisUnit::Kind kind);

}  // namespace prevalence
