#include "factrace/coverage.hpp"

#include <algorithm>
#include <cmath>

#include "factrace/error.hpp"
#include "factrace/io.hpp"
#include "factrace/text.hpp"

namespace factrace {

std::vector<TokenProfile> load_token_profiles(const std::filesystem::path& path) {
  auto csv = io::read_csv(path);
  auto lang_col = csv.column("lang");
  auto token_col = csv.column("token");
  auto count_col = csv.column("count");
  std::map<LanguageCode, TokenProfile> by_lang;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    auto parsed = io::parse_uint(row[count_col]);
    if (!parsed) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ": bad count on row " + std::to_string(r + 2),
                  {{"path", path.string()}, {"record", r + 2}});
    }
    const std::uint64_t count = *parsed;
    if (count == 0) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ": zero count on row " + std::to_string(r + 2),
                  {{"path", path.string()}, {"record", r + 2}});
    }
    auto token = text::nfc(row[token_col]);
    if (token.empty()) {
      throw Error(ErrorCode::EmptyField, path.string() + ": empty token on row " + std::to_string(r + 2),
                  {{"path", path.string()}, {"record", r + 2}});
    }
    auto& p = by_lang[row[lang_col]];
    p.lang = row[lang_col];
    p.counts[token] += count;
  }
  std::vector<TokenProfile> out;
  for (auto& [_, p] : by_lang) out.push_back(std::move(p));
  return out;
}

std::map<LanguageCode, std::vector<std::string>> select_language_specific_tokens(
    const std::vector<TokenProfile>& profiles, std::size_t k, double dominance) {
  if (profiles.size() < 2) {
    throw Error(ErrorCode::InsufficientProfiles, "token selection needs at least two languages",
                {{"profiles", profiles.size()}});
  }
  std::map<std::string, std::uint64_t> totals;
  for (const auto& p : profiles) {
    for (const auto& [tok, n] : p.counts) totals[tok] += n;
  }

  std::map<LanguageCode, std::vector<std::string>> out;
  for (const auto& p : profiles) {
    std::vector<std::pair<std::string, std::uint64_t>> survivors;
    for (const auto& [tok, n] : p.counts) {
      double ratio = static_cast<double>(n) / static_cast<double>(totals.at(tok));
      if (ratio >= dominance) survivors.emplace_back(tok, n);
    }
    std::sort(survivors.begin(), survivors.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (survivors.size() < k) {
      throw Error(ErrorCode::InsufficientTokens,
                  p.lang + " has " + std::to_string(survivors.size()) +
                      " language-specific tokens, need " + std::to_string(k),
                  {{"lang", p.lang}, {"survivors", survivors.size()}, {"k", k}});
    }
    auto& chosen = out[p.lang];
    for (std::size_t i = 0; i < k; ++i) chosen.push_back(survivors[i].first);
  }
  return out;
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    double pos = q * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = static_cast<std::size_t>(std::ceil(pos));
    double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
  };
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  return s;
}

std::map<LanguageCode, LanguageCoverage> pair_coverage(
    const std::map<LanguageCode, std::vector<std::string>>& tokens_per_lang,
    const std::vector<std::filesystem::path>& shards, const CountOptions& options) {
  std::vector<CooccurrenceQuery> queries;
  std::map<LanguageCode, std::vector<std::pair<std::string, std::string>>> pairs;
  for (const auto& [lang, tokens] : tokens_per_lang) {
    if (tokens.size() < 2) {
      throw Error(ErrorCode::InsufficientTokens, lang + " needs at least two tokens for pairs",
                  {{"lang", lang}, {"tokens", tokens.size()}});
    }
    auto& list = pairs[lang];
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      for (std::size_t j = i + 1; j < tokens.size(); ++j) {
        if (tokens[i] == tokens[j]) continue;
        queries.push_back({{lang, static_cast<FactId>(list.size())}, tokens[i], tokens[j]});
        list.emplace_back(tokens[i], tokens[j]);
      }
    }
  }
  auto table = count_cooccurrences(shards, queries, options);

  std::map<LanguageCode, LanguageCoverage> out;
  for (const auto& [lang, list] : pairs) {
    auto& cov = out[lang];
    std::vector<double> values;
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto n = table.at({lang, static_cast<FactId>(i)});
      cov.pairs.push_back({list[i].first, list[i].second, n});
      values.push_back(static_cast<double>(n));
    }
    cov.stats = box_stats(std::move(values));
  }
  return out;
}

std::string coverage_csv(const std::map<LanguageCode, LanguageCoverage>& coverage) {
  std::string out = "lang,token_a,token_b,doc_count\n";
  for (const auto& [lang, cov] : coverage) {
    for (const auto& p : cov.pairs) {
      out += io::csv_row({lang, p.token_a, p.token_b, std::to_string(p.doc_count)});
    }
  }
  return out;
}

nlohmann::json coverage_stats_json(const std::map<LanguageCode, LanguageCoverage>& coverage) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [lang, cov] : coverage) {
    j[lang] = {{"pairs", cov.pairs.size()},
               {"min", cov.stats.min},
               {"q1", cov.stats.q1},
               {"median", cov.stats.median},
               {"q3", cov.stats.q3},
               {"max", cov.stats.max}};
  }
  return j;
}

}  // namespace factrace
