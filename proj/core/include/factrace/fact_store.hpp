#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace factrace {

using FactId = std::uint32_t;
using LanguageCode = std::string;

struct Fact {
  FactId fact_id = 0;
  std::string relation;
  std::string subject;
  std::string object;
  // Fully expanded query text; always contains `subject`.
  std::string prompt;

  friend bool operator==(const Fact&, const Fact&) = default;
};

// Index-aligned fact lists, one per language. Immutable once constructed.
//
// A freshly loaded set is parallel: every language carries the same fact_id
// set and fact i has the same relation everywhere. Sets produced by
// exclude_identical() keep original fact_ids but may drop facts per
// language, so they are no longer parallel.
class MultilingualFactSet {
 public:
  MultilingualFactSet() = default;

  // Validates field and relation invariants. With require_parallel, also the
  // parallel-index invariant (IndexMismatch / RelationMismatch).
  MultilingualFactSet(std::vector<LanguageCode> languages,
                      std::map<LanguageCode, std::vector<Fact>> facts,
                      bool require_parallel = true);

  const std::vector<LanguageCode>& languages() const noexcept { return languages_; }
  const std::set<std::string>& relations() const noexcept { return relations_; }

  // Facts for one language, ordered by fact_id. Throws UnknownLanguage.
  const std::vector<Fact>& facts(const LanguageCode& lang) const;
  const Fact* find(const LanguageCode& lang, FactId id) const;
  bool has_language(const LanguageCode& lang) const { return facts_.contains(lang); }

  // Sorted union of fact_ids across languages.
  std::vector<FactId> fact_ids() const;
  bool is_parallel() const;
  bool empty() const noexcept { return languages_.empty(); }

  friend bool operator==(const MultilingualFactSet& a, const MultilingualFactSet& b) {
    return a.languages_ == b.languages_ && a.facts_ == b.facts_;
  }

 private:
  std::vector<LanguageCode> languages_;
  std::map<LanguageCode, std::vector<Fact>> facts_;
  std::map<LanguageCode, std::unordered_map<FactId, std::size_t>> positions_;
  std::set<std::string> relations_;
};

struct ExclusionReport {
  std::map<LanguageCode, std::vector<FactId>> kept;
  std::map<LanguageCode, std::size_t> removed;
  std::map<LanguageCode, std::size_t> total;

  nlohmann::json to_json() const;
};

// Reads `<lang>.jsonl` files from `dir`. When `languages` is empty every
// *.jsonl file is loaded, languages sorted by code.
MultilingualFactSet load_facts(const std::filesystem::path& dir,
                               const std::vector<LanguageCode>& languages = {});

// Inverse of load_facts for validated sets.
void save_facts(const MultilingualFactSet& ms, const std::filesystem::path& dir);

// Removes fact i from language l when some other language l' carries the same
// fact i with identical subject AND object strings. Comparison is same-index.
std::pair<MultilingualFactSet, ExclusionReport> exclude_identical(const MultilingualFactSet& ms);

using IdenticalObjectFlags = std::map<LanguageCode, std::map<FactId, bool>>;

// flag(i, l) is true iff object(i, l) == object(i, ref_lang). Facts missing
// from ref_lang are flagged false.
IdenticalObjectFlags identical_object_flags(const MultilingualFactSet& ms,
                                            const LanguageCode& ref_lang);

// Relation counts for `lang` (first language when omitted).
std::map<std::string, std::size_t> relation_histogram(
    const MultilingualFactSet& ms, const std::optional<LanguageCode>& lang = std::nullopt);

}  // namespace factrace
