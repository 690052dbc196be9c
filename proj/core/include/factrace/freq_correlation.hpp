#pragma once

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "factrace/freq_classifier.hpp"

namespace factrace {

inline constexpr unsigned kDefaultBins = 20;

struct CurveBin {
  double lo = 0.0;  // log10 frequency
  double hi = 0.0;
  double center = 0.0;
  std::size_t count = 0;
  std::optional<double> p_correct;  // nullopt for empty bins
};

// Equal-width bins over log10 of the positive frequencies. Bins are
// left-closed; the last bin is closed on both ends. Zero frequencies are kept
// out of the log axis and reported in their own bucket.
struct BinnedCurve {
  std::vector<double> edges;
  std::vector<CurveBin> bins;
  std::size_t zero_count = 0;
  std::optional<double> zero_p_correct;

  // `bin_lo,bin_hi,count,p_correct`
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

BinnedCurve bin_curve(const LabeledDataset& data, unsigned bins = kDefaultBins);

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t bins_used = 0;
};

// Pearson r over paired samples; throws DegenerateInput for n < 3 or a
// constant series. Two-sided p-value from Student's t with n-2 dof.
Correlation pearson(std::span<const double> x, std::span<const double> y);

// Pearson r between bin centers and per-bin p_correct over occupied bins.
Correlation pearson_log_recall(const BinnedCurve& curve);

}  // namespace factrace
