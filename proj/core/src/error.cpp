#include "factrace/error.hpp"

namespace factrace {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingLanguageFile: return "MissingLanguageFile";
    case ErrorCode::IndexMismatch: return "IndexMismatch";
    case ErrorCode::RelationMismatch: return "RelationMismatch";
    case ErrorCode::EmptyField: return "EmptyField";
    case ErrorCode::InvalidPrompt: return "InvalidPrompt";
    case ErrorCode::DuplicateFactId: return "DuplicateFactId";
    case ErrorCode::UnknownLanguage: return "UnknownLanguage";
    case ErrorCode::EmptyQuerySet: return "EmptyQuerySet";
    case ErrorCode::ShardReadError: return "ShardReadError";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DuplicateDocument: return "DuplicateDocument";
    case ErrorCode::QuerySetMismatch: return "QuerySetMismatch";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::MissingPrediction: return "MissingPrediction";
    case ErrorCode::DuplicatePrediction: return "DuplicatePrediction";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::InvalidBinCount: return "InvalidBinCount";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::StepMismatch: return "StepMismatch";
    case ErrorCode::LayerCountMismatch: return "LayerCountMismatch";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::InsufficientTokens: return "InsufficientTokens";
    case ErrorCode::InsufficientProfiles: return "InsufficientProfiles";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NoShards: return "NoShards";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, nlohmann::json details)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      details_(std::move(details)) {}

nlohmann::json Error::to_json() const {
  nlohmann::json j;
  j["error"] = std::string(to_string(code_));
  j["message"] = what();
  j["details"] = details_;
  return j;
}

}  // namespace factrace
