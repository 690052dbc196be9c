#include "factrace/pipeline.hpp"

#include <limits>
#include <algorithm>
#include <charconv>
#include <set>

#include "factrace/coverage.hpp"
#include "factrace/error.hpp"
#include "factrace/freq_correlation.hpp"
#include "factrace/io.hpp"
#include "factrace/similarity.hpp"
#include "factrace/version.hpp"

namespace factrace::pipeline {

namespace {

constexpr const char* kFrequencies = "frequencies.json";
constexpr const char* kAccCo = "acc_co.csv";
constexpr const char* kClassifierSummary = "classifier_summary.csv";

std::string policy_name(MissingPolicy p) {
  return p == MissingPolicy::Error ? "error" : "incorrect";
}

MissingPolicy parse_policy(const std::string& s) {
  if (s == "error") return MissingPolicy::Error;
  if (s == "incorrect") return MissingPolicy::Incorrect;
  throw Error(ErrorCode::InvalidConfig, "on_missing must be 'error' or 'incorrect'", {{"value", s}});
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void read_path(const nlohmann::json& j, const char* key, fs::path& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<std::string>();
}

void check_steps(const std::vector<Step>& steps) {
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i] <= steps[i - 1]) {
      throw Error(ErrorCode::InvalidConfig, "steps must be strictly increasing", {{"steps", steps}});
    }
  }
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    read_path(j, "facts_dir", c.facts_dir);
    read_opt(j, "languages", c.languages);
    if (j.contains("corpus_shards")) {
      const auto& s = j.at("corpus_shards");
      if (s.is_string()) {
        c.corpus_shards = {s.get<std::string>()};
      } else if (!s.is_null()) {
        c.corpus_shards = s.get<std::vector<std::string>>();
      }
    }
    read_path(j, "predictions", c.predictions);
    read_path(j, "embeddings_dir", c.embeddings_dir);
    read_path(j, "token_profiles", c.token_profiles);
    read_path(j, "labeled_dir", c.labeled_dir);
    read_opt(j, "ref_lang", c.ref_lang);
    read_opt(j, "steps", c.steps);
    read_path(j, "output_dir", c.output_dir);
    read_opt(j, "seed", c.seed);
    read_opt(j, "bootstrap_runs", c.bootstrap_runs);
    read_opt(j, "bootstrap_fraction", c.bootstrap_fraction);
    read_opt(j, "bins", c.bins);
    read_opt(j, "dominance", c.dominance);
    read_opt(j, "coverage_k", c.coverage_k);
    read_opt(j, "exclude_identical", c.exclude_identical);
    if (j.contains("on_missing")) c.on_missing = parse_policy(j.at("on_missing").get<std::string>());
    read_opt(j, "skip_malformed", c.skip_malformed);
    read_opt(j, "jobs", c.jobs);
    read_opt(j, "groups", c.groups);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
  check_steps(c.steps);
  return c;
}

RunConfig RunConfig::from_file(const fs::path& path) {
  require_path(path, "config file");
  return from_json(io::read_json(path));
}

nlohmann::json RunConfig::to_json() const {
  return {{"facts_dir", facts_dir.string()},
          {"languages", languages},
          {"corpus_shards", corpus_shards},
          {"predictions", predictions.string()},
          {"embeddings_dir", embeddings_dir.string()},
          {"token_profiles", token_profiles.string()},
          {"labeled_dir", labeled_dir.string()},
          {"ref_lang", ref_lang},
          {"steps", steps},
          {"output_dir", output_dir.string()},
          {"seed", seed},
          {"bootstrap_runs", bootstrap_runs},
          {"bootstrap_fraction", bootstrap_fraction},
          {"bins", bins},
          {"dominance", dominance},
          {"coverage_k", coverage_k},
          {"exclude_identical", exclude_identical},
          {"on_missing", policy_name(on_missing)},
          {"skip_malformed", skip_malformed},
          {"jobs", jobs},
          {"groups", groups}};
}

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) {
    throw Error(ErrorCode::InvalidConfig, std::string(what) + " not configured", {{"field", what}});
  }
  std::error_code ec;
  if (!fs::exists(p, ec)) {
    throw Error(ErrorCode::IoError, std::string(what) + " not found: " + p.string(),
                {{"field", what}, {"path", p.string()}});
  }
}

std::vector<fs::path> resolve_shards(const RunConfig& cfg) {
  if (cfg.corpus_shards.empty()) {
    throw Error(ErrorCode::NoShards, "no corpus shard glob configured", {{"glob", nullptr}});
  }
  std::set<fs::path> all;
  for (const auto& pattern : cfg.corpus_shards) {
    auto matched = io::expand_glob(pattern);
    if (matched.empty()) {
      throw Error(ErrorCode::NoShards, "corpus glob '" + pattern + "' matched no shards",
                  {{"glob", pattern}});
    }
    all.insert(matched.begin(), matched.end());
  }
  return {all.begin(), all.end()};
}

LanguageGroups default_groups(const std::vector<LanguageCode>& languages) {
  LanguageGroups by_script;
  for (const auto& lang : languages) {
    auto pos = lang.rfind('_');
    if (pos == std::string::npos || pos + 1 >= lang.size()) continue;
    by_script[lang.substr(pos + 1)].push_back(lang);
  }
  LanguageGroups out;
  for (auto& [script, langs] : by_script) {
    if (langs.size() >= 2) out[script] = std::move(langs);
  }
  if (languages.size() >= 2) out["all"] = languages;
  return out;
}

namespace {

MultilingualFactSet load_fact_set(const RunConfig& cfg) {
  require_path(cfg.facts_dir, "facts_dir");
  return load_facts(cfg.facts_dir, cfg.languages);
}

std::vector<Step> resolve_steps(const RunConfig& cfg, const std::vector<PredictionRecord>& records) {
  if (!cfg.steps.empty()) return cfg.steps;
  std::set<Step> steps;
  for (const auto& r : records) steps.insert(r.step);
  if (steps.empty()) {
    throw Error(ErrorCode::InvalidConfig, "no checkpoint steps configured or found in predictions");
  }
  return {steps.begin(), steps.end()};
}

struct EvalInputs {
  MultilingualFactSet facts;
  std::vector<Step> steps;
  CorrectnessMatrix cm;
};

EvalInputs load_eval_inputs(const RunConfig& cfg) {
  EvalInputs in;
  in.facts = load_fact_set(cfg);
  require_path(cfg.predictions, "predictions");
  auto records = load_predictions(cfg.predictions);
  in.steps = resolve_steps(cfg, records);
  in.cm = build_correctness(records, in.facts, in.steps, cfg.on_missing);
  return in;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) { return cfg.output_dir / name; }

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::map<LanguageCode, LabeledDataset> load_labeled_dir(const fs::path& dir) {
  std::map<LanguageCode, LabeledDataset> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    auto csv = io::read_csv(entry.path());
    auto id_col = csv.column("fact_id");
    auto freq_col = csv.column("freq");
    auto correct_col = csv.column("correct");
    auto& data = out[entry.path().stem().string()];
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
      const auto& row = csv.rows[r];
      try {
        const auto& c = row[correct_col];
        bool correct = c == "1" || c == "true" || c == "True";
        if (!correct && !(c == "0" || c == "false" || c == "False")) throw std::invalid_argument(c);
        auto fid = io::parse_uint(row.at(id_col));
        auto freq = io::parse_uint(row.at(freq_col));
        if (!fid || !freq || *fid > std::numeric_limits<FactId>::max()) throw std::invalid_argument("row");
        data.push_back({static_cast<FactId>(*fid), *freq, correct});
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedRecord,
                    entry.path().string() + ": bad row " + std::to_string(r + 2),
                    {{"path", entry.path().string()}, {"record", r + 2}});
      }
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::MissingArtifact, "no <lang>.csv labeled tables in " + dir.string(),
                {{"path", dir.string()}});
  }
  return out;
}

FrequencyTable load_frequency_artifact(const RunConfig& cfg) {
  auto path = out_path(cfg, kFrequencies);
  if (!fs::exists(path)) {
    throw Error(ErrorCode::MissingArtifact, "frequency table " + path.string() + " missing; run `index`",
                {{"path", path.string()}});
  }
  return FrequencyTable::from_json(io::read_json(path));
}

// Datasets plus the fact set when one is configured.
struct ClassifierInputs {
  std::optional<MultilingualFactSet> facts;
  std::map<LanguageCode, LabeledDataset> data;
};

ClassifierInputs classifier_inputs(const RunConfig& cfg) {
  ClassifierInputs in;
  if (!cfg.labeled_dir.empty()) {
    require_path(cfg.labeled_dir, "labeled_dir");
    in.data = load_labeled_dir(cfg.labeled_dir);
    if (!cfg.facts_dir.empty()) in.facts = load_fact_set(cfg);
    return in;
  }
  in.data = labeled_datasets(cfg);
  in.facts = load_fact_set(cfg);
  return in;
}

std::map<LanguageCode, LabeledDataset> selected_datasets(const RunConfig& cfg, ClassifierInputs& in) {
  if (!cfg.exclude_identical) return in.data;
  if (!in.facts) {
    throw Error(ErrorCode::InvalidConfig, "--exclude-identical requires facts_dir");
  }
  return restrict_to_kept(in.data, exclude_identical(*in.facts).second);
}

std::string summary_row(const LanguageCode& lang, const ClassifierResult& r) {
  return io::csv_row({lang, std::to_string(r.threshold), io::format_double(r.accuracy),
                      std::to_string(r.confusion.fp), std::to_string(r.confusion.fn),
                      std::to_string(r.confusion.tp), std::to_string(r.confusion.tn),
                      std::to_string(r.confusion.total())});
}

constexpr const char* kSummaryHeader = "lang,threshold,accuracy,fp,fn,tp,tn,total\n";

nlohmann::json classifier_json(const LanguageCode& lang, const ClassifierResult& r,
                               const std::optional<MultilingualFactSet>& facts) {
  nlohmann::json j = {{"lang", lang}, {"result", r.to_json()}};
  if (facts && facts->has_language(lang)) {
    j["sclfp_relations"] = sclfp_relation_distribution(r, *facts, lang);
  }
  return j;
}

}  // namespace

std::map<LanguageCode, LabeledDataset> labeled_datasets(const RunConfig& cfg) {
  auto in = load_eval_inputs(cfg);
  auto table = load_frequency_artifact(cfg);
  const Step last = in.steps.back();
  std::map<LanguageCode, LabeledDataset> out;
  for (const auto& lang : in.facts.languages()) {
    const auto& bits = in.cm.row(lang, last);
    auto& data = out[lang];
    for (const auto& f : in.facts.facts(lang)) {
      data.push_back({f.fact_id, table.at({lang, f.fact_id}), bits.test(in.cm.position(f.fact_id))});
    }
  }
  return out;
}

std::map<LanguageCode, LabeledDataset> restrict_to_kept(
    const std::map<LanguageCode, LabeledDataset>& data, const ExclusionReport& report) {
  std::map<LanguageCode, LabeledDataset> out;
  for (const auto& [lang, rows] : data) {
    auto it = report.kept.find(lang);
    if (it == report.kept.end()) {
      out[lang] = rows;
      continue;
    }
    std::set<FactId> kept(it->second.begin(), it->second.end());
    auto& dst = out[lang];
    for (const auto& row : rows) {
      if (kept.contains(row.fact_id)) dst.push_back(row);
    }
  }
  return out;
}

void cmd_index(const RunConfig& cfg) {
  auto facts = load_fact_set(cfg);
  auto shards = resolve_shards(cfg);
  auto table = count_cooccurrences(shards, fact_queries(facts), {cfg.jobs, cfg.skip_malformed});
  for (const auto& lang : facts.languages()) {
    io::write_file_atomic(out_path(cfg, "freq_" + lang + ".csv"), table.to_csv(lang));
  }
  io::write_json_atomic(out_path(cfg, kFrequencies), table.to_json());
}

void cmd_facts(const RunConfig& cfg) {
  auto facts = load_fact_set(cfg);
  nlohmann::json summary = {{"languages", facts.languages()},
                            {"relations", facts.relations()},
                            {"facts_per_language", nlohmann::json::object()},
                            {"relation_histogram", nlohmann::json::object()}};
  for (const auto& lang : facts.languages()) {
    summary["facts_per_language"][lang] = facts.facts(lang).size();
    summary["relation_histogram"][lang] = relation_histogram(facts, lang);
  }
  io::write_json_atomic(out_path(cfg, "facts_summary.json"), summary);

  auto [kept, report] = exclude_identical(facts);
  io::write_json_atomic(out_path(cfg, "exclusion_report.json"), report.to_json());

  if (facts.has_language(cfg.ref_lang)) {
    nlohmann::json flags_json = nlohmann::json::object();
    for (const auto& [lang, flags] : identical_object_flags(facts, cfg.ref_lang)) {
      std::vector<FactId> ids;
      for (const auto& [id, flag] : flags) {
        if (flag) ids.push_back(id);
      }
      flags_json[lang] = ids;
    }
    io::write_json_atomic(out_path(cfg, "identical_object_flags.json"),
                          {{"ref_lang", cfg.ref_lang}, {"identical_object_ids", flags_json}});
  }
}

void cmd_eval(const RunConfig& cfg) {
  auto in = load_eval_inputs(cfg);
  const auto& langs = in.facts.languages();
  const bool have_ref = in.facts.has_language(cfg.ref_lang);
  if (!have_ref) {
    throw Error(ErrorCode::UnknownLanguage, "reference language " + cfg.ref_lang + " not in fact set",
                {{"lang", cfg.ref_lang}});
  }

  std::string acc_co = "lang,step,acc,co_ref\n";
  for (const auto& lang : langs) {
    for (Step step : in.steps) {
      acc_co += io::csv_row({lang, std::to_string(step), io::format_double(accuracy(in.cm, lang, step)),
                             io::format_optional(consistency(in.cm, lang, cfg.ref_lang, step))});
    }
  }
  io::write_file_atomic(out_path(cfg, kAccCo), acc_co);

  for (Step step : in.steps) {
    io::write_json_atomic(out_path(cfg, "consistency_matrix_" + std::to_string(step) + ".json"),
                          consistency_matrix(in.cm, step).to_json());
  }

  std::string per_rel = "lang,relation,step,acc,co_ref\n";
  for (const auto& [key, m] : per_relation_metrics(in.cm, in.facts, cfg.ref_lang, in.steps)) {
    const auto& [lang, rel, step] = key;
    per_rel += io::csv_row({lang, rel, std::to_string(step), io::format_double(m.acc),
                            io::format_optional(m.co_ref)});
  }
  io::write_file_atomic(out_path(cfg, "per_relation.csv"), per_rel);

  auto groups = cfg.groups.empty() ? default_groups(langs) : cfg.groups;
  std::string group_co = "group,step,mean_co\n";
  if (!groups.empty()) {
    for (const auto& [name, series] : group_consistency_series(in.cm, groups, in.steps)) {
      for (std::size_t i = 0; i < in.steps.size(); ++i) {
        group_co += io::csv_row({name, std::to_string(in.steps[i]), io::format_optional(series[i])});
      }
    }
  }
  io::write_file_atomic(out_path(cfg, "group_co.csv"), group_co);

  auto flags = identical_object_flags(in.facts, cfg.ref_lang);
  std::string recall = "lang,relation,step,recalled,eligible\n";
  for (Step step : in.steps) {
    for (const auto& [key, cell] : identical_object_recall(in.cm, flags, in.facts, cfg.ref_lang, step)) {
      recall += io::csv_row({key.first, key.second, std::to_string(step), std::to_string(cell.recalled),
                             std::to_string(cell.eligible)});
    }
  }
  io::write_file_atomic(out_path(cfg, "identical_object_recall.csv"), recall);

  io::write_json_atomic(out_path(cfg, "eval_summary.json"),
                        {{"languages", langs},
                         {"steps", in.steps},
                         {"facts", in.cm.fact_ids().size()},
                         {"on_missing", policy_name(cfg.on_missing)},
                         {"missing_predictions", in.cm.missing_count},
                         {"groups", groups}});
}

void cmd_classify(const RunConfig& cfg) {
  auto in = classifier_inputs(cfg);

  std::map<LanguageCode, ClassifierResult> full;
  std::string summary = kSummaryHeader;
  for (const auto& [lang, data] : in.data) {
    auto r = optimal_threshold(data);
    io::write_json_atomic(out_path(cfg, "classifier_" + lang + ".json"), classifier_json(lang, r, in.facts));
    summary += summary_row(lang, r);
    full.emplace(lang, std::move(r));
  }
  io::write_file_atomic(out_path(cfg, kClassifierSummary), summary);

  // SCLFP / UWLFP accuracy over checkpoints needs the prediction grid.
  if (cfg.labeled_dir.empty()) {
    auto eval = load_eval_inputs(cfg);
    std::string dyn = "lang,step,sclfp_acc,uwlfp_acc\n";
    for (const auto& [lang, r] : full) {
      std::vector<double> sclfp, uwlfp;
      if (!r.sclfp_ids.empty()) sclfp = subset_accuracy_series(eval.cm, r.sclfp_ids, lang, eval.steps);
      if (!r.uwlfp_ids.empty()) uwlfp = subset_accuracy_series(eval.cm, r.uwlfp_ids, lang, eval.steps);
      for (std::size_t i = 0; i < eval.steps.size(); ++i) {
        dyn += io::csv_row({lang, std::to_string(eval.steps[i]),
                            sclfp.empty() ? "" : io::format_double(sclfp[i]),
                            uwlfp.empty() ? "" : io::format_double(uwlfp[i])});
      }
    }
    io::write_file_atomic(out_path(cfg, "sclfp_dynamics.csv"), dyn);
  }

  if (!cfg.exclude_identical) return;
  if (!in.facts) throw Error(ErrorCode::InvalidConfig, "--exclude-identical requires facts_dir");
  auto [kept_set, report] = exclude_identical(*in.facts);
  auto reduced = restrict_to_kept(in.data, report);
  io::write_json_atomic(out_path(cfg, "exclusion_report.json"), report.to_json());

  std::string excluded_summary = kSummaryHeader;
  nlohmann::json overlap = nlohmann::json::object();
  double jaccard_sum = 0.0, containment_sum = 0.0;
  std::size_t jaccard_n = 0, containment_n = 0;
  for (const auto& [lang, data] : reduced) {
    if (data.empty()) continue;
    auto r = optimal_threshold(data);
    io::write_json_atomic(out_path(cfg, "classifier_excluded_" + lang + ".json"),
                          classifier_json(lang, r, in.facts));
    excluded_summary += summary_row(lang, r);
    auto o = set_overlap(full.at(lang).sclfp_ids, r.sclfp_ids);
    overlap[lang] = {{"jaccard", optional_json(o.jaccard)},
                     {"containment_in_full", optional_json(o.containment_in_a)},
                     {"full_sclfp", full.at(lang).sclfp_ids.size()},
                     {"excluded_sclfp", r.sclfp_ids.size()}};
    if (o.jaccard) {
      jaccard_sum += *o.jaccard;
      ++jaccard_n;
    }
    if (o.containment_in_a) {
      containment_sum += *o.containment_in_a;
      ++containment_n;
    }
  }
  io::write_file_atomic(out_path(cfg, "classifier_excluded_summary.csv"), excluded_summary);
  io::write_json_atomic(
      out_path(cfg, "sclfp_overlap.json"),
      {{"per_language", overlap},
       {"mean_jaccard", jaccard_n ? nlohmann::json(jaccard_sum / jaccard_n) : nlohmann::json(nullptr)},
       {"mean_containment_in_full",
        containment_n ? nlohmann::json(containment_sum / containment_n) : nlohmann::json(nullptr)}});
}

void cmd_sweep(const RunConfig& cfg) {
  auto in = classifier_inputs(cfg);
  auto data = selected_datasets(cfg, in);
  nlohmann::json index = nlohmann::json::object();
  for (const auto& [lang, d] : data) {
    if (d.empty()) continue;
    auto r = optimal_threshold(d);
    std::string csv = "threshold,accuracy\n";
    for (const auto& p : sensitivity_sweep(d, r.threshold)) {
      csv += io::csv_row({std::to_string(p.threshold), io::format_double(p.accuracy)});
    }
    io::write_file_atomic(out_path(cfg, "sweep_" + lang + ".csv"), csv);
    index[lang] = {{"threshold", r.threshold}, {"accuracy", r.accuracy}};
  }
  io::write_json_atomic(out_path(cfg, "sweep.json"),
                        {{"span_percent", 20}, {"step_percent", 1},
                         {"exclude_identical", cfg.exclude_identical}, {"optimal", index}});
}

void cmd_bootstrap(const RunConfig& cfg) {
  auto in = classifier_inputs(cfg);
  auto data = selected_datasets(cfg, in);
  std::string csv =
      "lang,threshold_orig,threshold_mean,threshold_lo,threshold_hi,accuracy_orig,accuracy_mean,"
      "accuracy_lo,accuracy_hi,fp_orig,fp_mean,fp_lo,fp_hi,fn_orig,fn_mean,fn_lo,fn_hi\n";
  for (const auto& [lang, d] : data) {
    if (d.size() < 2) continue;
    auto orig = optimal_threshold(d);
    auto s = bootstrap(d, cfg.bootstrap_runs, cfg.bootstrap_fraction, cfg.seed, cfg.jobs);
    io::write_json_atomic(out_path(cfg, "bootstrap_" + lang + ".json"),
                          {{"lang", lang},
                           {"original",
                            {{"threshold", orig.threshold},
                             {"accuracy", orig.accuracy},
                             {"fp", orig.confusion.fp},
                             {"fn", orig.confusion.fn}}},
                           {"summary", s.to_json()}});
    auto f = [](double v) { return io::format_double(v); };
    csv += io::csv_row({lang, std::to_string(orig.threshold), f(s.threshold.mean), f(s.threshold.lower),
                        f(s.threshold.upper), f(orig.accuracy), f(s.accuracy.mean), f(s.accuracy.lower),
                        f(s.accuracy.upper), std::to_string(orig.confusion.fp), f(s.fp.mean), f(s.fp.lower),
                        f(s.fp.upper), std::to_string(orig.confusion.fn), f(s.fn.mean), f(s.fn.lower),
                        f(s.fn.upper)});
  }
  io::write_file_atomic(out_path(cfg, "bootstrap_summary.csv"), csv);
}

void cmd_correlate(const RunConfig& cfg) {
  auto in = classifier_inputs(cfg);
  auto data = selected_datasets(cfg, in);

  auto correlate = [&](const LabeledDataset& d, const std::string& name) {
    auto curve = bin_curve(d, cfg.bins);
    io::write_file_atomic(out_path(cfg, "curve_" + name + ".csv"), curve.to_csv());
    nlohmann::json j = {{"bins", cfg.bins}, {"curve", curve.to_json()}};
    try {
      auto c = pearson_log_recall(curve);
      j["r"] = c.r;
      j["p_value"] = c.p_value;
      j["bins_used"] = c.bins_used;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateInput) throw;
      j["r"] = nullptr;
      j["p_value"] = nullptr;
      j["error"] = std::string(to_string(e.code()));
    }
    return j;
  };

  LabeledDataset pooled;
  nlohmann::json per_lang = nlohmann::json::object();
  for (const auto& [lang, d] : data) {
    pooled.insert(pooled.end(), d.begin(), d.end());
    per_lang[lang] = correlate(d, lang);
  }
  io::write_json_atomic(out_path(cfg, "correlation.json"),
                        {{"global", correlate(pooled, "global")}, {"per_language", per_lang}});
}

void cmd_similarity(const RunConfig& cfg) {
  auto facts = load_fact_set(cfg);
  require_path(cfg.embeddings_dir, "embeddings_dir");
  std::vector<Step> steps = cfg.steps;
  if (steps.empty()) {
    require_path(cfg.predictions, "predictions");
    steps = resolve_steps(cfg, load_predictions(cfg.predictions));
  }
  auto flags = identical_object_flags(facts, cfg.ref_lang);

  std::map<Step, EmbeddingTensor> ref_tensors;
  for (Step step : steps) {
    ref_tensors.emplace(step, load_embeddings(sidecar_path(cfg.embeddings_dir, cfg.ref_lang, step)));
  }

  for (const auto& lang : facts.languages()) {
    if (lang == cfg.ref_lang) continue;
    auto classifier_path = out_path(cfg, "classifier_" + lang + ".json");
    if (!fs::exists(classifier_path)) {
      throw Error(ErrorCode::MissingArtifact,
                  "classifier output " + classifier_path.string() + " missing; run `classify`",
                  {{"path", classifier_path.string()}});
    }
    auto cj = io::read_json(classifier_path).at("result");
    auto sclfp = cj.at("sclfp_ids").get<std::vector<FactId>>();
    auto uwlfp = cj.at("uwlfp_ids").get<std::vector<FactId>>();
    std::vector<FactId> all_ids;
    for (const auto& f : facts.facts(lang)) all_ids.push_back(f.fact_id);

    std::vector<EmbeddingTensor> lang_tensors;
    lang_tensors.reserve(steps.size());
    for (Step step : steps) lang_tensors.push_back(load_embeddings(sidecar_path(cfg.embeddings_dir, lang, step)));
    std::vector<StepEmbeddings> per_step;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      per_step.push_back({steps[i], &lang_tensors[i], &ref_tensors.at(steps[i])});
    }
    auto series = similarity_trajectories(per_step, sclfp, uwlfp, all_ids, flags.at(lang));
    io::write_file_atomic(out_path(cfg, "similarity_" + lang + ".csv"), similarity_csv(series));
  }
}

void cmd_coverage(const RunConfig& cfg) {
  require_path(cfg.token_profiles, "token_profiles");
  auto profiles = load_token_profiles(cfg.token_profiles);
  auto tokens = select_language_specific_tokens(profiles, cfg.coverage_k, cfg.dominance);
  auto shards = resolve_shards(cfg);
  auto coverage = pair_coverage(tokens, shards, {cfg.jobs, cfg.skip_malformed});
  io::write_file_atomic(out_path(cfg, "coverage_pairs.csv"), coverage_csv(coverage));
  io::write_json_atomic(out_path(cfg, "coverage_stats.json"),
                        {{"k", cfg.coverage_k},
                         {"dominance", cfg.dominance},
                         {"tokens", tokens},
                         {"stats", coverage_stats_json(coverage)}});
}

namespace {

nlohmann::json csv_value(const std::string& s) {
  if (s.empty()) return nullptr;
  std::int64_t i = 0;
  auto [iptr, iec] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (iec == std::errc() && iptr == s.data() + s.size()) return i;
  double d = 0.0;
  auto [dptr, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (dec == std::errc() && dptr == s.data() + s.size()) return d;
  return s;
}

nlohmann::json csv_as_json(const fs::path& path) {
  auto csv = io::read_csv(path);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : csv.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
      obj[csv.header[c]] = csv.header[c] == "lang" || csv.header[c] == "relation" ||
                                   csv.header[c] == "group" || csv.header[c].starts_with("token")
                               ? nlohmann::json(row[c])
                               : csv_value(row[c]);
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

}  // namespace

void cmd_report(const RunConfig& cfg) {
  std::vector<std::string> required = {kFrequencies, kAccCo, kClassifierSummary};
  auto summary_path = out_path(cfg, kClassifierSummary);
  if (fs::exists(summary_path)) {
    auto summary = io::read_csv(summary_path);
    auto col = summary.column("lang");
    for (const auto& row : summary.rows) {
      required.push_back("classifier_" + row[col] + ".json");
      if (row[col] != cfg.ref_lang) required.push_back("similarity_" + row[col] + ".csv");
    }
  }
  for (const auto& name : required) {
    auto p = out_path(cfg, name);
    if (!fs::exists(p)) {
      throw Error(ErrorCode::MissingArtifact, "required artifact " + p.string() + " missing",
                  {{"path", p.string()}, {"artifact", name}});
    }
  }

  nlohmann::json artifacts = nlohmann::json::object();
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(cfg.output_dir)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (name == "report.json" || name.find(".tmp.") != std::string::npos) continue;
    auto ext = entry.path().extension();
    if (ext == ".json" || ext == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto name = f.filename().string();
    artifacts[name] = f.extension() == ".json" ? io::read_json(f) : csv_as_json(f);
  }

  nlohmann::json report = {{"tool", "factrace"},
                           {"version", kVersion},
                           {"config", cfg.to_json()},
                           {"artifacts", artifacts}};
  io::write_json_atomic(out_path(cfg, "report.json"), report);
}

}  // namespace factrace::pipeline
