#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "factrace/corpus_index.hpp"
#include "factrace/fact_store.hpp"
#include "factrace/freq_classifier.hpp"
#include "factrace/probe_eval.hpp"

namespace fixtures {

namespace fs = std::filesystem;

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
};

// 12 facts over eng_Latn, fra_Latn, rus_Cyrl. Facts 0, 8, 9 are identical
// between eng and fra; fact 10 between eng and rus. Expected kept counts:
// eng 8, fra 9, rus 11.
factrace::MultilingualFactSet exclusion_facts();
inline const std::map<std::string, std::size_t> kExpectedKept = {
    {"eng_Latn", 8}, {"fra_Latn", 9}, {"rus_Cyrl", 11}};

// Parallel synthetic fact set: `n` facts per language over 3 relations.
factrace::MultilingualFactSet synthetic_facts(const std::vector<std::string>& langs, std::size_t n,
                                              std::uint64_t seed);

// Random labeled data; frequencies in [0, max_freq], correctness loosely
// increasing with frequency.
factrace::LabeledDataset random_dataset(std::mt19937_64& rng, std::size_t n, std::uint64_t max_freq);

// Mixed-script random documents that plant subject/object strings.
std::vector<factrace::Document> random_documents(std::mt19937_64& rng, std::size_t n,
                                                 const std::vector<factrace::CooccurrenceQuery>& queries);

// Writes `docs` split round-robin into `shards` JSONL files (the last one
// gzip-compressed when `gzip_last`). Returns the written paths.
std::vector<fs::path> write_shards(const fs::path& dir, const std::vector<factrace::Document>& docs,
                                   std::size_t shards, bool gzip_last = true);

void write_text(const fs::path& path, const std::string& body);

// Complete on-disk workspace for the whole pipeline:
//   facts/, corpus/shard_*.jsonl[.gz], predictions.jsonl, embeddings/,
//   token_profiles.csv, config.json (absolute paths, output in out/).
struct PipelineFixture {
  fs::path root;
  fs::path config;
  fs::path output;
  std::vector<factrace::Step> steps;
};
PipelineFixture write_pipeline_fixture(const fs::path& root, std::uint64_t seed = 7);

}  // namespace fixtures
