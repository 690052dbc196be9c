#include "factrace/probe_eval.hpp"

#include <algorithm>
#include <set>

#include "factrace/error.hpp"
#include "factrace/io.hpp"
#include "factrace/text.hpp"

namespace factrace {

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::vector<PredictionRecord> records;
  std::set<std::tuple<FactId, LanguageCode, Step>> seen;
  io::LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (text::trim(line).empty()) continue;
    PredictionRecord r;
    try {
      auto j = nlohmann::json::parse(line);
      r.fact_id = j.at("fact_id").get<FactId>();
      r.lang = j.at("lang").get<std::string>();
      r.step = j.at("step").get<Step>();
      r.generation = j.at("generation").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedRecord,
                  path.string() + ":" + std::to_string(reader.line_number()) + ": " + e.what(),
                  {{"path", path.string()}, {"record", reader.line_number()}});
    }
    if (!seen.emplace(r.fact_id, r.lang, r.step).second) {
      throw Error(ErrorCode::DuplicatePrediction,
                  "duplicate prediction for fact " + std::to_string(r.fact_id) + " " + r.lang +
                      " step " + std::to_string(r.step),
                  {{"fact_id", r.fact_id}, {"lang", r.lang}, {"step", r.step},
                   {"record", reader.line_number()}});
    }
    records.push_back(std::move(r));
  }
  return records;
}

bool judge_correct(std::string_view generation, std::string_view expected_object) {
  std::string object = text::nfc(expected_object);
  if (object.empty()) return false;
  return text::nfc(generation).find(object) != std::string::npos;
}

CorrectnessMatrix::CorrectnessMatrix(std::vector<FactId> fact_ids) : fact_ids_(std::move(fact_ids)) {
  std::sort(fact_ids_.begin(), fact_ids_.end());
  fact_ids_.erase(std::unique(fact_ids_.begin(), fact_ids_.end()), fact_ids_.end());
  for (std::size_t i = 0; i < fact_ids_.size(); ++i) index_[fact_ids_[i]] = i;
}

std::size_t CorrectnessMatrix::position(FactId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorCode::UnknownId, "fact " + std::to_string(id) + " not in correctness universe",
                {{"fact_id", id}});
  }
  return it->second;
}

void CorrectnessMatrix::set_row(const LanguageCode& lang, Step step, BitVector bits) {
  if (bits.size() != fact_ids_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "correctness row length differs from fact count");
  }
  rows_[{lang, step}] = std::move(bits);
}

const BitVector& CorrectnessMatrix::row(const LanguageCode& lang, Step step) const {
  auto it = rows_.find({lang, step});
  if (it == rows_.end()) {
    throw Error(ErrorCode::UnknownKey,
                "no correctness row for " + lang + " at step " + std::to_string(step),
                {{"lang", lang}, {"step", step}});
  }
  return it->second;
}

std::vector<LanguageCode> CorrectnessMatrix::languages() const {
  std::set<LanguageCode> langs;
  for (const auto& [key, _] : rows_) langs.insert(key.first);
  return {langs.begin(), langs.end()};
}

std::vector<Step> CorrectnessMatrix::steps() const {
  std::set<Step> steps;
  for (const auto& [key, _] : rows_) steps.insert(key.second);
  return {steps.begin(), steps.end()};
}

CorrectnessMatrix build_correctness(const std::vector<PredictionRecord>& records,
                                    const MultilingualFactSet& facts, const std::vector<Step>& steps,
                                    MissingPolicy policy) {
  if (!facts.is_parallel()) {
    throw Error(ErrorCode::IndexMismatch, "correctness requires a parallel fact set");
  }
  std::map<std::tuple<LanguageCode, Step, FactId>, const std::string*> lookup;
  for (const auto& r : records) lookup[{r.lang, r.step, r.fact_id}] = &r.generation;

  CorrectnessMatrix cm(facts.fact_ids());
  nlohmann::json missing = nlohmann::json::array();
  std::size_t missing_count = 0;
  for (const auto& lang : facts.languages()) {
    const auto& list = facts.facts(lang);
    for (Step step : steps) {
      BitVector bits(cm.fact_ids().size());
      for (const auto& f : list) {
        auto it = lookup.find({lang, step, f.fact_id});
        if (it == lookup.end()) {
          ++missing_count;
          missing.push_back({{"lang", lang}, {"step", step}, {"fact_id", f.fact_id}});
          continue;
        }
        bits.set(cm.position(f.fact_id), judge_correct(*it->second, f.object));
      }
      cm.set_row(lang, step, std::move(bits));
    }
  }
  if (missing_count > 0 && policy == MissingPolicy::Error) {
    throw Error(ErrorCode::MissingPrediction,
                std::to_string(missing_count) + " predictions missing from the evaluation grid",
                {{"missing", missing}});
  }
  cm.missing_count = missing_count;
  return cm;
}

double accuracy(const CorrectnessMatrix& cm, const LanguageCode& lang, Step step) {
  const auto& bits = cm.row(lang, step);
  if (bits.size() == 0) return 0.0;
  return static_cast<double>(bits.count()) / static_cast<double>(bits.size());
}

std::optional<double> consistency(const CorrectnessMatrix& cm, const LanguageCode& a,
                                  const LanguageCode& b, Step step) {
  const auto& x = cm.row(a, step);
  const auto& y = cm.row(b, step);
  std::size_t uni = union_count(x, y);
  if (uni == 0) return std::nullopt;
  return static_cast<double>(intersection_count(x, y)) / static_cast<double>(uni);
}

std::optional<double> ConsistencyMatrix::at(const LanguageCode& a, const LanguageCode& b) const {
  auto ia = std::find(languages.begin(), languages.end(), a);
  auto ib = std::find(languages.begin(), languages.end(), b);
  if (ia == languages.end() || ib == languages.end()) {
    throw Error(ErrorCode::UnknownKey, "language pair not in consistency matrix",
                {{"lang", a}, {"other_lang", b}});
  }
  return values[ia - languages.begin()][ib - languages.begin()];
}

nlohmann::json ConsistencyMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : values) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& v : row) r.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    rows.push_back(std::move(r));
  }
  return {{"step", step}, {"languages", languages}, {"values", rows}};
}

ConsistencyMatrix consistency_matrix(const CorrectnessMatrix& cm, Step step) {
  ConsistencyMatrix m;
  m.step = step;
  for (const auto& lang : cm.languages()) {
    if (cm.has_row(lang, step)) m.languages.push_back(lang);
  }
  const auto n = m.languages.size();
  m.values.assign(n, std::vector<std::optional<double>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      auto v = consistency(cm, m.languages[i], m.languages[j], step);
      m.values[i][j] = v;
      m.values[j][i] = v;
    }
  }
  return m;
}

std::map<std::string, Series> group_consistency_series(const CorrectnessMatrix& cm,
                                                       const LanguageGroups& groups,
                                                       const std::vector<Step>& steps) {
  std::map<std::string, Series> out;
  for (const auto& [name, langs] : groups) {
    if (langs.size() < 2) {
      throw Error(ErrorCode::GroupTooSmall, "group '" + name + "' needs at least two languages",
                  {{"group", name}, {"size", langs.size()}});
    }
    auto& series = out[name];
    for (Step step : steps) {
      double sum = 0.0;
      std::size_t defined = 0;
      for (std::size_t i = 0; i < langs.size(); ++i) {
        for (std::size_t j = i + 1; j < langs.size(); ++j) {
          if (auto v = consistency(cm, langs[i], langs[j], step)) {
            sum += *v;
            ++defined;
          }
        }
      }
      series.push_back(defined > 0 ? std::optional<double>(sum / static_cast<double>(defined))
                                   : std::nullopt);
    }
  }
  return out;
}

std::map<RelationKey, RelationMetrics> per_relation_metrics(
    const CorrectnessMatrix& cm, const MultilingualFactSet& facts, const LanguageCode& ref_lang,
    const std::vector<Step>& steps, const std::vector<std::string>& relations) {
  std::vector<std::string> wanted = relations;
  if (wanted.empty()) {
    wanted.assign(facts.relations().begin(), facts.relations().end());
  }
  for (const auto& r : wanted) {
    if (!facts.relations().contains(r)) {
      throw Error(ErrorCode::UnknownRelation, "unknown relation " + r, {{"relation", r}});
    }
  }
  if (!facts.has_language(ref_lang)) {
    throw Error(ErrorCode::UnknownLanguage, "reference language " + ref_lang + " not in fact set",
                {{"lang", ref_lang}});
  }

  // Relation labels agree across languages, so one mask per relation serves all.
  std::map<std::string, BitVector> masks;
  for (const auto& r : wanted) masks.emplace(r, BitVector(cm.fact_ids().size()));
  for (const auto& f : facts.facts(ref_lang)) {
    auto it = masks.find(f.relation);
    if (it != masks.end()) it->second.set(cm.position(f.fact_id));
  }

  std::map<RelationKey, RelationMetrics> out;
  for (const auto& lang : facts.languages()) {
    for (Step step : steps) {
      const auto& bits = cm.row(lang, step);
      const auto& ref_bits = cm.row(ref_lang, step);
      for (const auto& [rel, mask] : masks) {
        auto in_rel = bits & mask;
        auto ref_in_rel = ref_bits & mask;
        RelationMetrics m;
        auto total = mask.count();
        m.acc = total == 0 ? 0.0 : static_cast<double>(in_rel.count()) / static_cast<double>(total);
        auto uni = union_count(in_rel, ref_in_rel);
        if (uni > 0) {
          m.co_ref = static_cast<double>(intersection_count(in_rel, ref_in_rel)) /
                     static_cast<double>(uni);
        }
        out[{lang, rel, step}] = m;
      }
    }
  }
  return out;
}

std::vector<double> subset_accuracy_series(const CorrectnessMatrix& cm,
                                           const std::vector<FactId>& subset,
                                           const LanguageCode& lang, const std::vector<Step>& steps) {
  if (subset.empty()) {
    throw Error(ErrorCode::EmptySubset, "subset accuracy needs at least one fact", {{"lang", lang}});
  }
  std::vector<std::size_t> positions;
  for (auto id : subset) positions.push_back(cm.position(id));
  std::vector<double> series;
  for (Step step : steps) {
    const auto& bits = cm.row(lang, step);
    std::size_t hits = 0;
    for (auto p : positions) hits += bits.test(p) ? 1 : 0;
    series.push_back(static_cast<double>(hits) / static_cast<double>(positions.size()));
  }
  return series;
}

std::map<std::pair<LanguageCode, std::string>, RecallCount> identical_object_recall(
    const CorrectnessMatrix& cm, const IdenticalObjectFlags& flags,
    const MultilingualFactSet& facts, const LanguageCode& ref_lang, Step step) {
  std::map<std::pair<LanguageCode, std::string>, RecallCount> out;
  const auto& ref_bits = cm.row(ref_lang, step);
  for (const auto& lang : facts.languages()) {
    for (const auto& rel : facts.relations()) out[{lang, rel}];
    auto fit = flags.find(lang);
    if (fit == flags.end()) continue;
    const auto& bits = cm.row(lang, step);
    for (const auto& f : facts.facts(lang)) {
      auto flag = fit->second.find(f.fact_id);
      if (flag == fit->second.end() || !flag->second) continue;
      auto pos = cm.position(f.fact_id);
      if (!ref_bits.test(pos)) continue;
      auto& cell = out[{lang, f.relation}];
      ++cell.eligible;
      if (bits.test(pos)) ++cell.recalled;
    }
  }
  return out;
}

}  // namespace factrace
