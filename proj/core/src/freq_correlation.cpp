#include "factrace/freq_correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "factrace/error.hpp"
#include "factrace/io.hpp"

namespace factrace {

std::string BinnedCurve::to_csv() const {
  std::string out = "bin_lo,bin_hi,count,p_correct\n";
  for (const auto& b : bins) {
    out += io::csv_row({io::format_double(b.lo), io::format_double(b.hi), std::to_string(b.count),
                        io::format_optional(b.p_correct)});
  }
  return out;
}

nlohmann::json BinnedCurve::to_json() const {
  nlohmann::json jb = nlohmann::json::array();
  for (const auto& b : bins) {
    jb.push_back({{"lo", b.lo},
                  {"hi", b.hi},
                  {"center", b.center},
                  {"count", b.count},
                  {"p_correct", b.p_correct ? nlohmann::json(*b.p_correct) : nlohmann::json(nullptr)}});
  }
  return {{"bins", jb},
          {"zero_bucket",
           {{"count", zero_count},
            {"p_correct", zero_p_correct ? nlohmann::json(*zero_p_correct) : nlohmann::json(nullptr)}}}};
}

BinnedCurve bin_curve(const LabeledDataset& data, unsigned bins) {
  if (bins < 1) throw Error(ErrorCode::InvalidBinCount, "bin count must be positive", {{"bins", bins}});

  BinnedCurve curve;
  std::size_t zero_correct = 0;
  Frequency min_pos = std::numeric_limits<Frequency>::max();
  Frequency max_pos = 0;
  for (const auto& d : data) {
    if (d.freq == 0) {
      ++curve.zero_count;
      zero_correct += d.correct ? 1 : 0;
    } else {
      min_pos = std::min(min_pos, d.freq);
      max_pos = std::max(max_pos, d.freq);
    }
  }
  if (curve.zero_count > 0) {
    curve.zero_p_correct = static_cast<double>(zero_correct) / static_cast<double>(curve.zero_count);
  }
  if (max_pos == 0) return curve;

  double lo = std::log10(static_cast<double>(min_pos));
  double hi = std::log10(static_cast<double>(max_pos));
  if (hi <= lo) {
    // Single distinct frequency: give the range unit width around it.
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  curve.edges.resize(bins + 1);
  for (unsigned k = 0; k < bins; ++k) curve.edges[k] = lo + width * k;
  curve.edges[bins] = hi;

  std::vector<std::size_t> counts(bins, 0);
  std::vector<std::size_t> correct(bins, 0);
  for (const auto& d : data) {
    if (d.freq == 0) continue;
    double x = std::log10(static_cast<double>(d.freq));
    auto it = std::upper_bound(curve.edges.begin(), curve.edges.end(), x);
    auto k = static_cast<std::ptrdiff_t>(it - curve.edges.begin()) - 1;
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++counts[k];
    correct[k] += d.correct ? 1 : 0;
  }
  for (unsigned k = 0; k < bins; ++k) {
    CurveBin b;
    b.lo = curve.edges[k];
    b.hi = curve.edges[k + 1];
    b.center = 0.5 * (b.lo + b.hi);
    b.count = counts[k];
    if (counts[k] > 0) {
      b.p_correct = static_cast<double>(correct[k]) / static_cast<double>(counts[k]);
    }
    curve.bins.push_back(b);
  }
  return curve;
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "pearson needs equal-length series");
  }
  const std::size_t n = x.size();
  if (n < 3) {
    throw Error(ErrorCode::DegenerateInput, "pearson needs at least three points", {{"n", n}});
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::DegenerateInput, "pearson undefined for a constant series");
  }
  Correlation c;
  c.bins_used = n;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(n - 2);
  if (std::abs(c.r) >= 1.0) {
    c.p_value = 0.0;
  } else {
    double t = c.r * std::sqrt(dof / (1.0 - c.r * c.r));
    boost::math::students_t dist(dof);
    c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return c;
}

Correlation pearson_log_recall(const BinnedCurve& curve) {
  std::vector<double> x, y;
  for (const auto& b : curve.bins) {
    if (b.count == 0 || !b.p_correct) continue;
    x.push_back(b.center);
    y.push_back(*b.p_correct);
  }
  return pearson(x, y);
}

}  // namespace factrace
