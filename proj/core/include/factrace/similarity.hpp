#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "factrace/fact_store.hpp"
#include "factrace/probe_eval.hpp"

namespace factrace {

// Sidecar descriptor for a `<lang>_<step>.f32` tensor: little-endian float32,
// layout [layer][prompt][dim], row-major. Row p holds the last-token
// embedding of fact_id_order[p].
struct EmbeddingManifest {
  LanguageCode lang;
  Step step = 0;
  std::size_t layers = 0;
  std::size_t prompts = 0;
  std::size_t dim = 0;
  // Relative paths resolve against the sidecar's directory.
  std::string data_path;
  std::vector<FactId> fact_id_order;

  std::uint64_t expected_bytes() const noexcept {
    return static_cast<std::uint64_t>(layers) * prompts * dim * sizeof(float);
  }
  nlohmann::json to_json() const;
  static EmbeddingManifest from_json(const nlohmann::json& j);
};

class EmbeddingTensor {
 public:
  EmbeddingTensor() = default;
  // Validates fact_id_order uniqueness, layer/dim positivity, and data size.
  EmbeddingTensor(EmbeddingManifest manifest, std::vector<float> data);

  const EmbeddingManifest& manifest() const noexcept { return manifest_; }
  std::span<const float> data() const noexcept { return data_; }
  bool has_fact(FactId id) const { return row_of_.contains(id); }
  std::span<const float> vector(std::size_t layer, FactId id) const;

 private:
  EmbeddingManifest manifest_;
  std::vector<float> data_;
  std::unordered_map<FactId, std::size_t> row_of_;
};

// Reads the sidecar JSON and its tensor; throws InvalidManifest on size or
// layout violations.
EmbeddingTensor load_embeddings(const std::filesystem::path& sidecar);
// Writes `<dir>/<lang>_<step>.f32` and `.json`; data_path is set relative.
void save_embeddings(const std::filesystem::path& dir, const EmbeddingTensor& tensor);
std::filesystem::path sidecar_path(const std::filesystem::path& dir, const LanguageCode& lang,
                                   Step step);

// ⟨u,v⟩ / (‖u‖‖v‖) accumulated in double, clamped to [-1, 1].
// Throws DimensionMismatch, ZeroVector, NonFiniteInput.
double cosine(std::span<const float> u, std::span<const float> v);

struct PairSimilarity {
  std::optional<double> mean;  // nullopt when no pair contributed
  std::size_t pairs = 0;       // facts contributing
  std::size_t skipped = 0;     // facts dropped for a zero vector
};

// Mean over facts in `subset` and all layers of cosine(lang[l][i], ref[l][i]).
// A fact with a zero vector in any layer is skipped and tallied.
PairSimilarity mean_pair_similarity(const EmbeddingTensor& lang, const EmbeddingTensor& ref,
                                    const std::vector<FactId>& subset);

struct SimilarityPoint {
  Step step = 0;
  PairSimilarity value;
};

struct SimilaritySeries {
  std::string group;  // "SCLFP", "UWLFP" or "all"
  std::vector<SimilarityPoint> points;
};

struct StepEmbeddings {
  Step step = 0;
  const EmbeddingTensor* lang = nullptr;
  const EmbeddingTensor* ref = nullptr;
};

// Three series (SCLFP, UWLFP, all). Ids flagged identical-object are dropped
// before averaging; an empty group yields a null point.
std::vector<SimilaritySeries> similarity_trajectories(
    const std::vector<StepEmbeddings>& steps, const std::vector<FactId>& sclfp_ids,
    const std::vector<FactId>& uwlfp_ids, const std::vector<FactId>& all_ids,
    const std::map<FactId, bool>& identical_object);

// `group,step,mean_sim,pairs,skipped`
std::string similarity_csv(const std::vector<SimilaritySeries>& series);

}  // namespace factrace
