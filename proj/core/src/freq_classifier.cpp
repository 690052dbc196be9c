#include "factrace/freq_classifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include "factrace/error.hpp"
#include "factrace/rng.hpp"

namespace factrace {

nlohmann::json ClassifierResult::to_json() const {
  return {{"threshold", threshold},
          {"accuracy", accuracy},
          {"tp", confusion.tp},
          {"fp", confusion.fp},
          {"tn", confusion.tn},
          {"fn", confusion.fn},
          {"total", confusion.total()},
          {"sclfp_ids", sclfp_ids},
          {"uwlfp_ids", uwlfp_ids}};
}

Confusion confusion_at(const LabeledDataset& data, Frequency t) {
  Confusion c;
  for (const auto& d : data) {
    bool predicted = classify(d.freq, t);
    if (predicted && d.correct) {
      ++c.tp;
    } else if (predicted) {
      ++c.fp;
    } else if (d.correct) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

namespace {

ClassifierResult result_at(const LabeledDataset& data, Frequency t) {
  ClassifierResult r;
  r.threshold = t;
  r.confusion = confusion_at(data, t);
  r.accuracy = r.confusion.accuracy();
  for (const auto& d : data) {
    if (classify(d.freq, t)) continue;
    (d.correct ? r.sclfp_ids : r.uwlfp_ids).push_back(d.fact_id);
  }
  std::sort(r.sclfp_ids.begin(), r.sclfp_ids.end());
  std::sort(r.uwlfp_ids.begin(), r.uwlfp_ids.end());
  return r;
}

Frequency best_threshold(std::vector<std::pair<Frequency, bool>> points) {
  std::sort(points.begin(), points.end());
  std::size_t positives = 0;
  for (const auto& p : points) positives += p.second ? 1 : 0;

  // t = 0: everything predicted positive.
  Frequency best_t = 0;
  std::size_t best_correct = positives;
  std::size_t pos_below = 0;
  std::size_t neg_below = 0;
  std::size_t i = 0;
  while (i < points.size()) {
    Frequency f = points[i].first;
    while (i < points.size() && points[i].first == f) {
      (points[i].second ? pos_below : neg_below) += 1;
      ++i;
    }
    // t = f + 1 moves every point with freq <= f to the negative side.
    std::size_t correct = (positives - pos_below) + neg_below;
    if (correct > best_correct) {
      best_correct = correct;
      best_t = f + 1;
    }
  }
  return best_t;
}

}  // namespace

ClassifierResult optimal_threshold(const LabeledDataset& data) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "threshold fit needs at least one point");
  std::vector<std::pair<Frequency, bool>> points;
  points.reserve(data.size());
  for (const auto& d : data) points.emplace_back(d.freq, d.correct);
  return result_at(data, best_threshold(std::move(points)));
}

std::vector<SweepPoint> sensitivity_sweep(const LabeledDataset& data, Frequency t_star,
                                          unsigned span_percent, unsigned step_percent) {
  std::vector<SweepPoint> out;
  if (step_percent == 0) step_percent = 1;
  std::set<Frequency> seen;
  const unsigned lo = span_percent > 100 ? 0 : 100 - span_percent;
  const unsigned hi = 100 + span_percent;
  for (unsigned pct = lo; pct <= hi; pct += step_percent) {
    // round-half-up of t* · pct / 100 in exact integer arithmetic
    Frequency t = (t_star * pct * 2 + 100) / 200;
    if (!seen.insert(t).second) continue;
    out.push_back({t, confusion_at(data, t).accuracy()});
  }
  return out;
}

nlohmann::json BootstrapSummary::to_json() const {
  auto stat = [](const StatSummary& s) {
    return nlohmann::json{{"mean", s.mean}, {"p2_5", s.lower}, {"p97_5", s.upper}};
  };
  return {{"threshold", stat(threshold)},
          {"accuracy", stat(accuracy)},
          {"fp", stat(fp)},
          {"fn", stat(fn)},
          {"runs", runs},
          {"sample_fraction", sample_fraction},
          {"sample_size", sample_size},
          {"seed", seed},
          {"percentile_method", "nearest-rank"},
          {"prng", "xoshiro256** seeded by splitmix64(seed ^ mix64(run))"}};
}

std::size_t subsample_size(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidFraction, "sample fraction must lie in (0, 1]",
                {{"sample_fraction", fraction}});
  }
  auto m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
  m = std::min(m, n);
  if (m == 0) {
    throw Error(ErrorCode::InvalidFraction, "sample fraction selects no points",
                {{"sample_fraction", fraction}, {"n", n}});
  }
  return m;
}

BootstrapRun bootstrap_run(const LabeledDataset& data, double sample_fraction, std::uint64_t seed,
                           std::uint64_t run_index) {
  const std::size_t n = data.size();
  const std::size_t m = subsample_size(n, sample_fraction);
  auto rng = Xoshiro256StarStar::substream(seed, run_index);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::pair<Frequency, bool>> sample;
  sample.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto j = i + static_cast<std::size_t>(rng.bounded(n - i));
    std::swap(order[i], order[j]);
    sample.emplace_back(data[order[i]].freq, data[order[i]].correct);
  }
  Frequency t = best_threshold(std::move(sample));
  auto c = confusion_at(data, t);
  return {t, c.accuracy(), c.fp, c.fn};
}

double nearest_rank(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

namespace {

StatSummary summarize(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  StatSummary s;
  if (!values.empty()) {
    // Offsets from the minimum, so a constant sample averages to itself exactly.
    const double base = values.front();
    double offset = 0.0;
    for (double v : values) offset += v - base;
    s.mean = base + offset / static_cast<double>(values.size());
  }
  s.lower = nearest_rank(values, 2.5);
  s.upper = nearest_rank(values, 97.5);
  return s;
}

}  // namespace

BootstrapSummary bootstrap(const LabeledDataset& data, std::size_t runs, double sample_fraction,
                           std::uint64_t seed, unsigned jobs) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "bootstrap needs data");
  if (data.size() < 2) {
    throw Error(ErrorCode::EmptyDataset, "bootstrap needs at least two points", {{"n", data.size()}});
  }
  if (runs == 0) throw Error(ErrorCode::InvalidConfig, "bootstrap needs at least one run");
  const std::size_t m = subsample_size(data.size(), sample_fraction);

  std::vector<BootstrapRun> results(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t r = next.fetch_add(1);
      if (r >= runs) return;
      results[r] = bootstrap_run(data, sample_fraction, seed, r);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(runs)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  std::vector<double> thresholds, accuracies, fps, fns;
  for (const auto& r : results) {
    thresholds.push_back(static_cast<double>(r.threshold));
    accuracies.push_back(r.accuracy);
    fps.push_back(static_cast<double>(r.fp));
    fns.push_back(static_cast<double>(r.fn));
  }
  BootstrapSummary s;
  s.threshold = summarize(std::move(thresholds));
  s.accuracy = summarize(std::move(accuracies));
  s.fp = summarize(std::move(fps));
  s.fn = summarize(std::move(fns));
  s.runs = runs;
  s.sample_fraction = sample_fraction;
  s.seed = seed;
  s.sample_size = m;
  return s;
}

std::map<std::string, std::size_t> sclfp_relation_distribution(const ClassifierResult& result,
                                                               const MultilingualFactSet& facts,
                                                               const LanguageCode& lang) {
  std::map<std::string, std::size_t> out;
  for (auto id : result.sclfp_ids) {
    const Fact* f = facts.find(lang, id);
    if (f == nullptr) {
      throw Error(ErrorCode::UnknownId, "SCLFP fact " + std::to_string(id) + " not found in " + lang,
                  {{"fact_id", id}, {"lang", lang}});
    }
    ++out[f->relation];
  }
  return out;
}

SetOverlap set_overlap(const std::vector<FactId>& a, const std::vector<FactId>& b) {
  std::set<FactId> sa(a.begin(), a.end());
  std::set<FactId> sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (auto x : sa) inter += sb.contains(x) ? 1 : 0;
  std::size_t uni = sa.size() + sb.size() - inter;
  SetOverlap o;
  if (uni > 0) o.jaccard = static_cast<double>(inter) / static_cast<double>(uni);
  if (!sa.empty()) o.containment_in_a = static_cast<double>(inter) / static_cast<double>(sa.size());
  return o;
}

}  // namespace factrace
