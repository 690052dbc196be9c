#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "factrace/bitvector.hpp"
#include "factrace/fact_store.hpp"

namespace factrace {

using Step = std::uint64_t;

struct PredictionRecord {
  FactId fact_id = 0;
  LanguageCode lang;
  Step step = 0;
  std::string generation;
};

// JSONL `{fact_id, lang, step, generation}`. Throws DuplicatePrediction when
// a (fact_id, lang, step) key repeats.
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

// Complete-generation matching: the NFC-normalized object must occur as a
// substring of the NFC-normalized generation. First-token matching would
// accept "Antwerp" for "Antananarivo"; this does not.
bool judge_correct(std::string_view generation, std::string_view expected_object);

enum class MissingPolicy { Error, Incorrect };

class CorrectnessMatrix {
 public:
  CorrectnessMatrix() = default;
  explicit CorrectnessMatrix(std::vector<FactId> fact_ids);

  // Fact universe, ascending; bit k of every vector refers to fact_ids()[k].
  const std::vector<FactId>& fact_ids() const noexcept { return fact_ids_; }
  std::size_t position(FactId id) const;  // throws UnknownId
  bool contains(FactId id) const { return index_.contains(id); }

  void set_row(const LanguageCode& lang, Step step, BitVector bits);
  const BitVector& row(const LanguageCode& lang, Step step) const;  // throws UnknownKey
  bool has_row(const LanguageCode& lang, Step step) const { return rows_.contains({lang, step}); }

  std::vector<LanguageCode> languages() const;
  std::vector<Step> steps() const;

  // Predictions that were absent from the grid and counted as incorrect.
  std::size_t missing_count = 0;

 private:
  std::vector<FactId> fact_ids_;
  std::map<FactId, std::size_t> index_;
  std::map<std::pair<LanguageCode, Step>, BitVector> rows_;
};

// Builds one bit per (lang, step, fact) via judge_correct against that
// language's object. Requires a parallel fact set.
CorrectnessMatrix build_correctness(const std::vector<PredictionRecord>& records,
                                    const MultilingualFactSet& facts, const std::vector<Step>& steps,
                                    MissingPolicy policy = MissingPolicy::Error);

double accuracy(const CorrectnessMatrix& cm, const LanguageCode& lang, Step step);

// Jaccard overlap of correct sets; nullopt when both sets are empty.
std::optional<double> consistency(const CorrectnessMatrix& cm, const LanguageCode& a,
                                  const LanguageCode& b, Step step);

struct ConsistencyMatrix {
  Step step = 0;
  std::vector<LanguageCode> languages;
  // Symmetric; values[i][j] for languages[i], languages[j].
  std::vector<std::vector<std::optional<double>>> values;

  std::optional<double> at(const LanguageCode& a, const LanguageCode& b) const;
  nlohmann::json to_json() const;
};

ConsistencyMatrix consistency_matrix(const CorrectnessMatrix& cm, Step step);

using LanguageGroups = std::map<std::string, std::vector<LanguageCode>>;
using Series = std::vector<std::optional<double>>;

// Per step, mean CO over unordered within-group pairs, skipping undefined
// pairs. Throws GroupTooSmall for groups with fewer than two languages.
std::map<std::string, Series> group_consistency_series(const CorrectnessMatrix& cm,
                                                       const LanguageGroups& groups,
                                                       const std::vector<Step>& steps);

struct RelationMetrics {
  double acc = 0.0;
  std::optional<double> co_ref;
};
using RelationKey = std::tuple<LanguageCode, std::string, Step>;

// ACC and CO-vs-ref restricted to each relation's facts. `relations` empty
// means all; a requested relation absent from the set throws UnknownRelation.
std::map<RelationKey, RelationMetrics> per_relation_metrics(
    const CorrectnessMatrix& cm, const MultilingualFactSet& facts, const LanguageCode& ref_lang,
    const std::vector<Step>& steps, const std::vector<std::string>& relations = {});

// Accuracy restricted to `subset`, one value per step.
std::vector<double> subset_accuracy_series(const CorrectnessMatrix& cm,
                                           const std::vector<FactId>& subset,
                                           const LanguageCode& lang, const std::vector<Step>& steps);

struct RecallCount {
  std::size_t recalled = 0;
  std::size_t eligible = 0;
  friend bool operator==(const RecallCount&, const RecallCount&) = default;
};

// eligible: flagged identical-object facts correct in ref_lang at `step`;
// recalled: eligible facts also correct in the language. Keyed by
// (lang, relation); every relation appears for every language.
std::map<std::pair<LanguageCode, std::string>, RecallCount> identical_object_recall(
    const CorrectnessMatrix& cm, const IdenticalObjectFlags& flags,
    const MultilingualFactSet& facts, const LanguageCode& ref_lang, Step step);

}  // namespace factrace
