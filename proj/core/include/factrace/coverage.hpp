#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factrace/corpus_index.hpp"

namespace factrace {

struct TokenProfile {
  LanguageCode lang;
  std::map<std::string, std::uint64_t> counts;  // all > 0
};

// CSV `lang,token,count`; one profile per language, languages sorted.
std::vector<TokenProfile> load_token_profiles(const std::filesystem::path& path);

// Tokens ranked by count in their language (ties by token bytes), kept when
// count(l) / Σ_l' count(l') >= dominance, top k survivors per language.
// Throws InsufficientProfiles (< 2) or InsufficientTokens (< k survivors).
std::map<LanguageCode, std::vector<std::string>> select_language_specific_tokens(
    const std::vector<TokenProfile>& profiles, std::size_t k = 4, double dominance = 0.9);

struct TokenPair {
  std::string token_a;
  std::string token_b;
  std::uint64_t doc_count = 0;
};

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

struct LanguageCoverage {
  std::vector<TokenPair> pairs;  // C(k,2), (i<j) in selection order
  BoxStats stats;
};

// Quartiles by linear interpolation between order statistics.
BoxStats box_stats(std::vector<double> values);

// Every unordered pair of distinct selected tokens, valued by its document
// co-occurrence count over `shards`.
std::map<LanguageCode, LanguageCoverage> pair_coverage(
    const std::map<LanguageCode, std::vector<std::string>>& tokens_per_lang,
    const std::vector<std::filesystem::path>& shards, const CountOptions& options = {});

// `lang,token_a,token_b,doc_count`
std::string coverage_csv(const std::map<LanguageCode, LanguageCoverage>& coverage);
nlohmann::json coverage_stats_json(const std::map<LanguageCode, LanguageCoverage>& coverage);

}  // namespace factrace
