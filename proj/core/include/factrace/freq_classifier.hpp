#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factrace/fact_store.hpp"

namespace factrace {

using Frequency = std::uint64_t;

struct LabeledFrequency {
  FactId fact_id = 0;
  Frequency freq = 0;
  bool correct = false;
};

using LabeledDataset = std::vector<LabeledFrequency>;

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  double accuracy() const noexcept {
    auto n = total();
    return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct ClassifierResult {
  Frequency threshold = 0;
  double accuracy = 0.0;
  Confusion confusion;
  // False negatives (freq < t*, correct): surprisingly correct low-frequency
  // predictions. Ascending.
  std::vector<FactId> sclfp_ids;
  // True negatives (freq < t*, incorrect). Ascending.
  std::vector<FactId> uwlfp_ids;

  nlohmann::json to_json() const;
};

// Predicts recall iff f >= t.
constexpr bool classify(Frequency f, Frequency t) noexcept { return f >= t; }

Confusion confusion_at(const LabeledDataset& data, Frequency t);

// Accuracy-maximizing threshold over all non-negative integers, smallest t
// among maximizers. Accuracy only changes when t crosses f_i + 1, so the
// candidates {0} ∪ {f_i + 1} cover every equivalence class by its smallest
// member. O(N log N).
ClassifierResult optimal_threshold(const LabeledDataset& data);

struct SweepPoint {
  Frequency threshold = 0;
  double accuracy = 0.0;
};

// Thresholds round(t* · (1 - span + step·k)) for k = 0..2·span/step,
// deduplicated after rounding (half rounds up). Default ±20% in 1% steps.
std::vector<SweepPoint> sensitivity_sweep(const LabeledDataset& data, Frequency t_star,
                                          unsigned span_percent = 20, unsigned step_percent = 1);

struct StatSummary {
  double mean = 0.0;
  double lower = 0.0;  // 2.5th percentile, nearest rank
  double upper = 0.0;  // 97.5th percentile, nearest rank
  friend bool operator==(const StatSummary&, const StatSummary&) = default;
};

struct BootstrapSummary {
  StatSummary threshold;
  StatSummary accuracy;
  StatSummary fp;
  StatSummary fn;
  std::size_t runs = 0;
  double sample_fraction = 0.0;
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;

  nlohmann::json to_json() const;
  friend bool operator==(const BootstrapSummary&, const BootstrapSummary&) = default;
};

struct BootstrapRun {
  Frequency threshold = 0;
  double accuracy = 0.0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// Subsample size floor(N · fraction), guarded against float under-shoot.
std::size_t subsample_size(std::size_t n, double fraction);

// One run: draw the subsample without replacement from the run's substream
// (partial Fisher-Yates), refit, evaluate on the full dataset.
BootstrapRun bootstrap_run(const LabeledDataset& data, double sample_fraction, std::uint64_t seed,
                           std::uint64_t run_index);

// Runs are independent and may be spread over `jobs` threads; results are
// reduced in run order, so the summary does not depend on scheduling.
BootstrapSummary bootstrap(const LabeledDataset& data, std::size_t runs = 5000,
                           double sample_fraction = 0.9, std::uint64_t seed = 0, unsigned jobs = 1);

// Nearest-rank percentile on an ascending-sorted sample, p in (0, 100].
double nearest_rank(const std::vector<double>& sorted, double p);

// Relation counts over the SCLFP ids of `result`; throws UnknownId.
std::map<std::string, std::size_t> sclfp_relation_distribution(const ClassifierResult& result,
                                                               const MultilingualFactSet& facts,
                                                               const LanguageCode& lang);

struct SetOverlap {
  std::optional<double> jaccard;
  std::optional<double> containment_in_a;
};

SetOverlap set_overlap(const std::vector<FactId>& a, const std::vector<FactId>& b);

}  // namespace factrace
