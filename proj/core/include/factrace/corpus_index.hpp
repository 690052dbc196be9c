#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factrace/aho_corasick.hpp"
#include "factrace/fact_store.hpp"

namespace factrace {

struct Document {
  std::string doc_id;
  std::string text;
};

struct QueryId {
  LanguageCode lang;
  FactId fact_id = 0;

  friend auto operator<=>(const QueryId&, const QueryId&) = default;
  friend bool operator==(const QueryId&, const QueryId&) = default;
};

struct CooccurrenceQuery {
  QueryId id;
  std::string subject;
  std::string object;
};

// Normalization applied identically to patterns and document text.
inline constexpr const char* kNormalizationSettings = "nfc;case-sensitive;substring";

class PatternAutomaton {
 public:
  // Throws EmptyQuerySet or EmptyField. Strings are NFC-normalized here.
  explicit PatternAutomaton(const std::vector<CooccurrenceQuery>& queries);

  const std::vector<std::string>& patterns() const noexcept { return patterns_; }
  const std::vector<CooccurrenceQuery>& queries() const noexcept { return queries_; }
  std::size_t pattern_count() const noexcept { return patterns_.size(); }

  // Query indices referencing pattern p as subject or object (deduplicated).
  const std::vector<std::uint32_t>& referencing_queries(std::uint32_t p) const {
    return referencing_[p];
  }
  std::uint32_t subject_pattern(std::uint32_t query) const { return subject_pattern_[query]; }
  std::uint32_t object_pattern(std::uint32_t query) const { return object_pattern_[query]; }

  // Distinct pattern ids present in already-normalized text.
  std::vector<std::uint32_t> hits(std::string_view normalized_text) const {
    return automaton_.distinct_matches(normalized_text);
  }

  // Adds 1 to counts[q] for every query whose subject and object both occur.
  // `stamp` is scratch space of pattern_count() entries; `epoch` must be
  // unique per document and nonzero.
  void count_document(std::string_view normalized_text, std::vector<std::uint64_t>& counts,
                      std::vector<std::uint64_t>& stamp, std::uint64_t epoch,
                      std::vector<std::uint32_t>& scratch_hits) const;

 private:
  std::vector<CooccurrenceQuery> queries_;
  std::vector<std::string> patterns_;
  std::vector<std::vector<std::uint32_t>> referencing_;
  std::vector<std::vector<std::uint32_t>> as_subject_;
  std::vector<std::uint32_t> subject_pattern_;
  std::vector<std::uint32_t> object_pattern_;
  AhoCorasick automaton_;
};

PatternAutomaton compile_patterns(const std::vector<CooccurrenceQuery>& queries);

class FrequencyTable {
 public:
  FrequencyTable() = default;

  std::map<QueryId, std::uint64_t> counts;
  std::uint64_t total_documents = 0;
  std::uint64_t skipped_records = 0;
  std::string normalization = kNormalizationSettings;
  std::vector<std::string> shards;

  // SHA-256 over normalization settings and the sorted shard list.
  std::string fingerprint() const;

  std::uint64_t at(const QueryId& id) const;

  // `lang,fact_id,frequency`, rows ordered by (lang, fact_id). With `lang`
  // set, only that language's rows are written.
  std::string to_csv(const std::optional<LanguageCode>& lang = std::nullopt) const;
  nlohmann::json to_json() const;
  static FrequencyTable from_json(const nlohmann::json& j);
  // CSV without metadata; totals stay zero.
  static FrequencyTable from_csv(const std::filesystem::path& path);
};

struct CountOptions {
  unsigned jobs = 1;
  // Skip (and tally) malformed JSONL records instead of failing.
  bool skip_malformed = false;
};

// Document-level co-occurrence counts. Each document contributes at most 1 to
// each query. Results are independent of shard order and `jobs`.
FrequencyTable count_cooccurrences(const std::vector<std::filesystem::path>& shards,
                                   const std::vector<CooccurrenceQuery>& queries,
                                   const CountOptions& options = {});

// Same counting over in-memory documents (no shard bookkeeping).
FrequencyTable count_documents(const std::vector<Document>& docs,
                               const std::vector<CooccurrenceQuery>& queries);

// Entry-wise sum. Throws QuerySetMismatch or FingerprintMismatch.
FrequencyTable merge_tables(const FrequencyTable& a, const FrequencyTable& b);

// One query per (language, fact) of the set.
std::vector<CooccurrenceQuery> fact_queries(const MultilingualFactSet& ms);

}  // namespace factrace
