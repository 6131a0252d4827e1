#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prevalence {

// The nine annotation categories used by the fact-checking campaign.
enum class LabelCategory : std::uint8_t {
  MisDisinformation,
  CredibleInformative,
  Borderline,
  Abusive,
  Unverifiable,
  Irrelevant,
  OtherLanguage,
  Deleted,
  DontKnow,
};

inline constexpr int kNumLabelCategories = 9;

// Three-way grouping used by all prevalence arithmetic.
enum class LabelGroup : std::uint8_t {
  MisDisinfo = 0,
  Legit = 1,
  AllTheRest = 2,
};

inline constexpr int kNumLabelGroups = 3;

enum class Platform : std::uint8_t {
  Facebook,
  Instagram,
  LinkedIn,
  TikTok,
  XTwitter,
  YouTube,
};

inline constexpr int kNumPlatforms = 6;

// Reserved keyword token for posts retrieved without keyword matching.
inline constexpr std::string_view kEmptyKeywordSentinel = "__EMPTY__";

std::string to_string(LabelCategory c);
std::string to_string(LabelGroup g);
std::string to_string(Platform p);

// Case-insensitive, trimmed. Returns nullopt for unknown tokens.
std::optional<LabelCategory> parse_label_category(std::string_view s);
std::optional<Platform> parse_platform(std::string_view s);

constexpr LabelGroup group_label(LabelCategory label) {
  switch (label) {
    case LabelCategory::MisDisinformation:
      return LabelGroup::MisDisinfo;
    case LabelCategory::CredibleInformative:
    case LabelCategory::Unverifiable:
      return LabelGroup::Legit;
    default:
      return LabelGroup::AllTheRest;
  }
}

struct AnnotatedPost {
  std::string post_id;
  Platform platform{};
  std::string language;
  std::string keyword{kEmptyKeywordSentinel};
  std::uint64_t views = 0;
  LabelCategory junior_label{};
  std::optional<LabelCategory> senior_label;
  std::optional<LabelCategory> agreed_label;

  bool double_coded() const { return agreed_label.has_value(); }
};

// Agreed label when present, junior label otherwise.
inline LabelCategory effective_label(const AnnotatedPost& post) {
  return post.agreed_label.value_or(post.junior_label);
}

struct GroupedCounts {
  std::uint64_t n_mis = 0;
  std::uint64_t n_legit = 0;
  std::uint64_t n_rest = 0;

  std::uint64_t total() const { return n_mis + n_legit + n_rest; }

  std::uint64_t& operator[](LabelGroup g) {
    switch (g) {
      case LabelGroup::MisDisinfo:
        return n_mis;
      case LabelGroup::Legit:
        return n_legit;
      case LabelGroup::AllTheRest:
        return n_rest;
    }
    throw std::logic_error("bad LabelGroup");
  }

  std::uint64_t operator[](LabelGroup g) const {
    return const_cast<GroupedCounts&>(*this)[g];
  }

  void add(LabelGroup g, std::uint64_t multiplicity = 1) { (*this)[g] += multiplicity; }

  GroupedCounts& operator+=(const GroupedCounts& other) {
    n_mis += other.n_mis;
    n_legit += other.n_legit;
    n_rest += other.n_rest;
    return *this;
  }

  bool operator==(const GroupedCounts&) const = default;
};

GroupedCounts count_groups(const std::vector<std::pair<LabelCategory, std::uint64_t>>& labels);

enum class PrevalenceDefinition : std::uint8_t {
  Restricted,  // n_mis / (n_mis + n_legit)
  Total,       // n_mis / (n_mis + n_legit + n_rest)
};

std::string to_string(PrevalenceDefinition def);

// Aggregation slice over which prevalence is estimated.
struct AnalysisUnit {
  enum class Kind : std::uint8_t { Language, Platform, PlatformLanguage };

  Kind kind{};
  std::optional<Platform> platform;
  std::string language;  // empty for Platform units

  static AnalysisUnit for_language(std::string tag) {
    return {Kind::Language, std::nullopt, std::move(tag)};
  }
  static AnalysisUnit for_platform(Platform p) { return {Kind::Platform, p, {}}; }
  static AnalysisUnit for_platform_language(Platform p, std::string tag) {
    return {Kind::PlatformLanguage, p, std::move(tag)};
  }

  bool matches(const AnnotatedPost& post) const;

  // Canonical stable rendering, used as the report key.
  std::string key() const;
  std::string kind_name() const;

  bool operator==(const AnalysisUnit&) const = default;
};

}  // namespace prevalence
