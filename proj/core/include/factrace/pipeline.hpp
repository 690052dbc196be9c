#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factrace/corpus_index.hpp"
#include "factrace/fact_store.hpp"
#include "factrace/freq_classifier.hpp"
#include "factrace/probe_eval.hpp"

namespace factrace::pipeline {

namespace fs = std::filesystem;

// Shared configuration for every subcommand. Loaded from JSON, then
// overridden by command-line flags.
struct RunConfig {
  fs::path facts_dir;
  std::vector<LanguageCode> languages;  // empty: every <lang>.jsonl in facts_dir
  std::vector<std::string> corpus_shards;  // glob patterns
  fs::path predictions;
  fs::path embeddings_dir;
  fs::path token_profiles;
  fs::path labeled_dir;  // optional `<lang>.csv` with fact_id,freq,correct
  LanguageCode ref_lang = "eng_Latn";
  std::vector<Step> steps;  // empty: every step present in predictions
  fs::path output_dir = "factrace-out";
  std::uint64_t seed = 0;
  std::size_t bootstrap_runs = 5000;
  double bootstrap_fraction = 0.9;
  unsigned bins = 20;
  double dominance = 0.9;
  std::size_t coverage_k = 4;
  bool exclude_identical = false;
  MissingPolicy on_missing = MissingPolicy::Error;
  bool skip_malformed = false;
  unsigned jobs = 1;
  LanguageGroups groups;  // empty: one group per shared script suffix, plus "all"

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const fs::path& path);
  nlohmann::json to_json() const;
};

// Throws InvalidConfig / IoError when a path the command needs is missing.
void require_path(const fs::path& p, const char* what);

// Resolves every shard glob; throws NoShards naming the glob when one
// matches nothing.
std::vector<fs::path> resolve_shards(const RunConfig& cfg);

// Default script groups: languages sharing a `_Xxxx` suffix, plus "all".
LanguageGroups default_groups(const std::vector<LanguageCode>& languages);

// Subcommands. Each writes its artifacts atomically into cfg.output_dir.
void cmd_index(const RunConfig& cfg);
void cmd_facts(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_classify(const RunConfig& cfg);
void cmd_sweep(const RunConfig& cfg);
void cmd_bootstrap(const RunConfig& cfg);
void cmd_correlate(const RunConfig& cfg);
void cmd_similarity(const RunConfig& cfg);
void cmd_coverage(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

// Per-language labeled datasets at the final configured step: frequencies
// from the index artifact (or labeled_dir) joined with correctness.
std::map<LanguageCode, LabeledDataset> labeled_datasets(const RunConfig& cfg);

// Restricts each language's dataset to the facts kept by exclude_identical.
std::map<LanguageCode, LabeledDataset> restrict_to_kept(
    const std::map<LanguageCode, LabeledDataset>& data, const ExclusionReport& report);

}  // namespace factrace::pipeline
