#include "prevalence/corpus_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace prevalence {

namespace {

std::string normalize(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(begin, end - begin + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  // fold separators so "mis/disinformation", "mis_disinformation" etc. compare equal
  std::erase_if(out, [](char c) { return c == ' ' || c == '_' || c == '-' || c == '/'; });
  return out;
}

}  // namespace

std::string to_string(LabelCategory c) {
  switch (c) {
    case LabelCategory::MisDisinformation:
      return "MisDisinformation";
    case LabelCategory::CredibleInformative:
      return "CredibleInformative";
    case LabelCategory::Borderline:
      return "Borderline";
    case LabelCategory::Abusive:
      return "Abusive";
    case LabelCategory::Unverifiable:
      return "Unverifiable";
    case LabelCategory::Irrelevant:
      return "Irrelevant";
    case LabelCategory::OtherLanguage:
      return "OtherLanguage";
    case LabelCategory::Deleted:
      return "Deleted";
    case LabelCategory::DontKnow:
      return "DontKnow";
  }
  return "?";
}

std::string to_string(LabelGroup g) {
  switch (g) {
    case LabelGroup::MisDisinfo:
      return "MisDisinfo";
    case LabelGroup::Legit:
      return "Legit";
    case LabelGroup::AllTheRest:
      return "AllTheRest";
  }
  return "?";
}

std::string to_string(Platform p) {
  switch (p) {
    case Platform::Facebook:
      return "Facebook";
    case Platform::Instagram:
      return "Instagram";
    case Platform::LinkedIn:
      return "LinkedIn";
    case Platform::TikTok:
      return "TikTok";
    case Platform::XTwitter:
      return "XTwitter";
    case Platform::YouTube:
      return "YouTube";
  }
  return "?";
}

std::string to_string(PrevalenceDefinition def) {
  return def == PrevalenceDefinition::Restricted ? "restricted" : "total";
}

std::optional<LabelCategory> parse_label_category(std::string_view s) {
  static const std::array<std::pair<std::string_view, LabelCategory>, 9> table{{
      {"misdisinformation", LabelCategory::MisDisinformation},
      {"credibleinformative", LabelCategory::CredibleInformative},
      {"borderline", LabelCategory::Borderline},
      {"abusive", LabelCategory::Abusive},
      {"unverifiable", LabelCategory::Unverifiable},
      {"irrelevant", LabelCategory::Irrelevant},
      {"otherlanguage", LabelCategory::OtherLanguage},
      {"deleted", LabelCategory::Deleted},
      {"dontknow", LabelCategory::DontKnow},
  }};
  const std::string key = normalize(s);
  for (const auto& [name, value] : table) {
    if (key == name) return value;
  }
  // long forms seen in exports
  if (key == "credibleandinformative") return LabelCategory::CredibleInformative;
  if (key == "idontknow") return LabelCategory::DontKnow;
  return std::nullopt;
}

std::optional<Platform> parse_platform(std::string_view s) {
  const std::string key = normalize(s);
  if (key == "facebook") return Platform::Facebook;
  if (key == "instagram") return Platform::Instagram;
  if (key == "linkedin") return Platform::LinkedIn;
  if (key == "tiktok") return Platform::TikTok;
  if (key == "xtwitter" || key == "x" || key == "twitter") return Platform::XTwitter;
  if (key == "youtube") return Platform::YouTube;
  return std::nullopt;
}

GroupedCounts count_groups(const std::vector<std::pair<LabelCategory, std::uint64_t>>& labels) {
  GroupedCounts counts;
  for (const auto& [label, multiplicity] : labels) {
    counts.add(group_label(label), multiplicity);
  }
  return counts;
}

bool AnalysisUnit::matches(const AnnotatedPost& post) const {
  switch (kind) {
    case Kind::Language:
      return post.language == language;
    case Kind::Platform:
      return post.platform == *platform;
    case Kind::PlatformLanguage:
      return post.platform == *platform && post.language == language;
  }
  return false;
}

std::string AnalysisUnit::key() const {
  switch (kind) {
    case Kind::Language:
      return language;
    case Kind::Platform:
      return to_string(*platform);
    case Kind::PlatformLanguage:
      return to_string(*platform) + ":" + language;
  }
  return "?";
}

std::string AnalysisUnit::kind_name() const {
  switch (kind) {
    case Kind::Language:
      return "language";
    case Kind::Platform:
      return "platform";
    case Kind::PlatformLanguage:
      return "platform-language";
  }
  return "?";
}

}  // namespace prevalence
