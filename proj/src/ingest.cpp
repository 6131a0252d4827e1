#include "prevalence/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace prevalence {

namespace {

// Minimal RFC-4180 style CSV: quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

const std::vector<std::string> kExpectedHeader = {
    "post_id", "platform", "language", "keyword",
    "views",   "junior_label", "senior_label", "agreed_label"};

}  // namespace

std::string to_string(RowError::Kind kind) {
  switch (kind) {
    case RowError::Kind::MissingColumn:
      return "MissingColumn";
    case RowError::Kind::BadLabel:
      return "BadLabel";
    case RowError::Kind::BadPlatform:
      return "BadPlatform";
    case RowError::Kind::BadViews:
      return "BadViews";
    case RowError::Kind::DuplicatePostId:
      return "DuplicatePostId";
    case RowError::Kind::MalformedDoubleCoding:
      return "MalformedDoubleCoding";
    case RowError::Kind::BadRow:
      return "BadRow";
  }
  return "?";
}

ParseResult parse_corpus_text(const std::string& text, const std::string& source_name) {
  ParseResult result;
  std::istringstream in(text);
  std::string line;

  if (!std::getline(in, line)) {
    result.errors.push_back({RowError::Kind::MissingColumn, 0, source_name + ": empty file"});
    return result;
  }
  const auto header = split_csv_line(line);
  for (const auto& column : kExpectedHeader) {
    if (std::find(header.begin(), header.end(), column) == header.end()) {
      result.errors.push_back(
          {RowError::Kind::MissingColumn, 0, "missing column: " + column});
    }
  }
  if (!result.errors.empty()) return result;

  std::vector<std::size_t> index(kExpectedHeader.size());
  for (std::size_t i = 0; i < kExpectedHeader.size(); ++i) {
    index[i] = std::find(header.begin(), header.end(), kExpectedHeader[i]) - header.begin();
  }

  std::unordered_set<std::string> seen_ids;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < header.size()) {
      result.errors.push_back({RowError::Kind::BadRow, row_no, "too few fields"});
      continue;
    }

    AnnotatedPost post;
    post.post_id = fields[index[0]];
    if (post.post_id.empty()) {
      result.errors.push_back({RowError::Kind::BadRow, row_no, "empty post_id"});
      continue;
    }
    if (!seen_ids.insert(post.post_id).second) {
      result.errors.push_back({RowError::Kind::DuplicatePostId, row_no, post.post_id});
      continue;
    }

    const auto platform = parse_platform(fields[index[1]]);
    if (!platform) {
      result.errors.push_back({RowError::Kind::BadPlatform, row_no, fields[index[1]]});
      continue;
    }
    post.platform = *platform;
    post.language = fields[index[2]];

    const std::string& keyword = fields[index[3]];
    post.keyword = keyword.empty() ? std::string(kEmptyKeywordSentinel) : keyword;

    const std::string& views_str = fields[index[4]];
    std::uint64_t views = 0;
    auto [ptr, ec] = std::from_chars(views_str.data(), views_str.data() + views_str.size(), views);
    if (ec != std::errc{} || ptr != views_str.data() + views_str.size()) {
      result.errors.push_back({RowError::Kind::BadViews, row_no, views_str});
      continue;
    }
    post.views = views;

    const auto junior = parse_label_category(fields[index[5]]);
    if (!junior) {
      result.errors.push_back(
          {RowError::Kind::BadLabel, row_no, "junior_label: " + fields[index[5]]});
      continue;
    }
    post.junior_label = *junior;

    const std::string& senior_str = fields[index[6]];
    if (!senior_str.empty()) {
      const auto senior = parse_label_category(senior_str);
      if (!senior) {
        result.errors.push_back({RowError::Kind::BadLabel, row_no, "senior_label: " + senior_str});
        continue;
      }
      post.senior_label = senior;
    }

    const std::string& agreed_str = fields[index[7]];
    if (!agreed_str.empty()) {
      const auto agreed = parse_label_category(agreed_str);
      if (!agreed) {
        result.errors.push_back({RowError::Kind::BadLabel, row_no, "agreed_label: " + agreed_str});
        continue;
      }
      post.agreed_label = agreed;
    }

    // double-coded posts carry both second-round labels
    if (post.agreed_label.has_value() && !post.senior_label.has_value()) {
      result.errors.push_back({RowError::Kind::MalformedDoubleCoding, row_no, post.post_id});
      continue;
    }

    result.rows.push_back(std::move(post));
  }
  return result;
}

ParseResult parse_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_corpus_text(buffer.str(), path);
}

Corpus preprocess(std::vector<AnnotatedPost> rows, std::string source) {
  Corpus corpus;
  corpus.provenance.source = std::move(source);
  corpus.provenance.rows_read = rows.size();
  corpus.posts.reserve(rows.size());

  for (auto& post : rows) {
    const bool senior_deleted =
        post.senior_label.has_value() && *post.senior_label == LabelCategory::Deleted;
    if (senior_deleted && post.junior_label == LabelCategory::Deleted) {
      ++corpus.provenance.dropped_r1;
      continue;
    }
    if (senior_deleted) {
      ++corpus.provenance.dropped_r2;
      continue;
    }
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

UnitSlice slice_by_unit(const Corpus& corpus, const AnalysisUnit& unit) {
  UnitSlice slice;
  for (const auto& post : corpus.posts) {
    if (unit.matches(post)) slice.posts.push_back(post);
  }
  slice.empty_warning = slice.posts.empty();
  return slice;
}

std::vector<AnalysisUnit> enumerate_units(const Corpus& corpus, AnalysisUnit::Kind kind) {
  std::set<std::string> languages;
  std::set<Platform> platforms;
  std::set<std::pair<Platform, std::string>> pairs;
  for (const auto& post : corpus.posts) {
    languages.insert(post.language);
    platforms.insert(post.platform);
    pairs.insert({post.platform, post.language});
  }

  std::vector<AnalysisUnit> units;
  switch (kind) {
    case AnalysisUnit::Kind::Language:
      for (const auto& tag : languages) units.push_back(AnalysisUnit::for_language(tag));
      break;
    case AnalysisUnit::Kind::Platform:
      for (const auto p : platforms) units.push_back(AnalysisUnit::for_platform(p));
      break;
    case AnalysisUnit::Kind::PlatformLanguage:
      for (const auto& [p, tag] : pairs) {
        units.push_back(AnalysisUnit::for_platform_language(p, tag));
      }
      break;
  }
  std::sort(units.begin(), units.end(),
            [](const AnalysisUnit& a, const AnalysisUnit& b) { return a.key() < b.key(); });
  return units;
}

}  // namespace prevalence
