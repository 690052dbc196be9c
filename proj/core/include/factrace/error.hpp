#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace factrace {

enum class ErrorCode {
  // fact_store
  MissingLanguageFile,
  IndexMismatch,
  RelationMismatch,
  EmptyField,
  InvalidPrompt,
  DuplicateFactId,
  UnknownLanguage,
  // corpus_index
  EmptyQuerySet,
  ShardReadError,
  MalformedRecord,
  DuplicateDocument,
  QuerySetMismatch,
  FingerprintMismatch,
  // probe_eval
  MissingPrediction,
  DuplicatePrediction,
  UnknownKey,
  UnknownRelation,
  GroupTooSmall,
  EmptySubset,
  // freq_classifier
  EmptyDataset,
  InvalidFraction,
  UnknownId,
  // freq_correlation
  InvalidBinCount,
  DegenerateInput,
  // similarity_dynamics
  DimensionMismatch,
  ZeroVector,
  NonFiniteInput,
  StepMismatch,
  LayerCountMismatch,
  InvalidManifest,
  // coverage_estimator
  InsufficientTokens,
  InsufficientProfiles,
  // cli
  InvalidConfig,
  NoShards,
  MissingArtifact,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries a stable code plus
// structured details, so the CLI can emit machine-readable diagnostics.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json details = nlohmann::json::object());

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

  // {"error": <code>, "message": ..., "details": {...}}
  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace factrace
