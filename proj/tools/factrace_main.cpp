// factrace: multilingual factual-recall analysis over pretraining checkpoints.
//
//   factrace --config run.json index
//   factrace --config run.json eval --steps 1000,2000
//   factrace --config run.json classify --exclude-identical
//   factrace --config run.json report
//
// Errors go to stderr as one JSON object per failure; exit code is nonzero.

#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "factrace/error.hpp"
#include "factrace/io.hpp"
#include "factrace/pipeline.hpp"
#include "factrace/version.hpp"

namespace {

using factrace::pipeline::RunConfig;

std::vector<factrace::Step> parse_steps(const std::string& text) {
  std::vector<factrace::Step> steps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto step = factrace::io::parse_uint(item);
    if (!step) {
      throw factrace::Error(factrace::ErrorCode::InvalidConfig, "bad step '" + item + "'",
                            {{"steps", text}});
    }
    steps.push_back(*step);
  }
  return steps;
}

void emit_error(const nlohmann::json& j) { std::cerr << j.dump() << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace multilingual factual recall against corpus fact frequencies", "factrace"};
  app.set_version_flag("--version", std::string(factrace::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string steps;
  std::string ref_lang;
  bool exclude_identical = false;
  std::string on_missing;
  std::optional<unsigned> jobs;
  std::string facts_dir, predictions, embeddings_dir, output_dir, token_profiles, labeled_dir;
  std::vector<std::string> shards;
  std::optional<std::size_t> runs;
  std::optional<double> fraction;
  std::optional<unsigned> bins;
  std::optional<double> dominance;
  bool skip_malformed = false;

  app.option_defaults()->always_capture_default(false);
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "PRNG seed for subsampling");
  app.add_option("--steps", steps, "Comma-separated checkpoint steps, strictly increasing");
  app.add_option("--ref-lang", ref_lang, "Reference language (default eng_Latn)");
  app.add_flag("--exclude-identical", exclude_identical,
               "Drop facts whose subject/object strings match another language");
  app.add_option("--on-missing", on_missing, "Missing prediction policy")
      ->check(CLI::IsMember({"error", "incorrect"}));
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--facts", facts_dir, "Directory of <lang>.jsonl fact files");
  app.add_option("--shards", shards, "Corpus shard glob(s)");
  app.add_option("--predictions", predictions, "Predictions JSONL");
  app.add_option("--embeddings", embeddings_dir, "Directory of <lang>_<step>.f32/.json");
  app.add_option("--output", output_dir, "Output directory");
  app.add_option("--token-profiles", token_profiles, "CSV lang,token,count");
  app.add_option("--labeled-dir", labeled_dir, "Directory of <lang>.csv fact_id,freq,correct");
  app.add_option("--runs", runs, "Bootstrap runs");
  app.add_option("--fraction", fraction, "Bootstrap sample fraction");
  app.add_option("--bins", bins, "Log-frequency bins");
  app.add_option("--dominance", dominance, "Language-specific token dominance ratio");
  app.add_flag("--skip-malformed", skip_malformed, "Skip malformed corpus records");

  using Command = std::function<void(const RunConfig&)>;
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"index", "Count subject/object document co-occurrences", factrace::pipeline::cmd_index},
      {"facts", "Validate facts; exclusion and identical-object reports", factrace::pipeline::cmd_facts},
      {"eval", "Accuracy and crosslingual consistency", factrace::pipeline::cmd_eval},
      {"classify", "Frequency-threshold classifier and SCLFP sets", factrace::pipeline::cmd_classify},
      {"sweep", "Accuracy over +/-20% of the optimal threshold", factrace::pipeline::cmd_sweep},
      {"bootstrap", "Subsampled threshold refits", factrace::pipeline::cmd_bootstrap},
      {"correlate", "Binned log-frequency vs recall correlation", factrace::pipeline::cmd_correlate},
      {"similarity", "Layer-averaged cosine similarity trajectories", factrace::pipeline::cmd_similarity},
      {"coverage", "Language-specific token pair coverage", factrace::pipeline::cmd_coverage},
      {"report", "Consolidated JSON report", factrace::pipeline::cmd_report},
  };
  std::map<const CLI::App*, Command> dispatch;
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    dispatch[sub] = fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit_error({{"error", "InvalidConfig"}, {"message", e.what()}, {"details", {{"cli", e.get_name()}}}});
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
    if (seed) cfg.seed = *seed;
    if (!steps.empty()) cfg.steps = parse_steps(steps);
    if (!ref_lang.empty()) cfg.ref_lang = ref_lang;
    if (exclude_identical) cfg.exclude_identical = true;
    if (!on_missing.empty()) {
      cfg.on_missing = on_missing == "incorrect" ? factrace::MissingPolicy::Incorrect
                                                 : factrace::MissingPolicy::Error;
    }
    if (jobs) cfg.jobs = *jobs;
    if (!facts_dir.empty()) cfg.facts_dir = facts_dir;
    if (!shards.empty()) cfg.corpus_shards = shards;
    if (!predictions.empty()) cfg.predictions = predictions;
    if (!embeddings_dir.empty()) cfg.embeddings_dir = embeddings_dir;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (!token_profiles.empty()) cfg.token_profiles = token_profiles;
    if (!labeled_dir.empty()) cfg.labeled_dir = labeled_dir;
    if (runs) cfg.bootstrap_runs = *runs;
    if (fraction) cfg.bootstrap_fraction = *fraction;
    if (bins) cfg.bins = *bins;
    if (dominance) cfg.dominance = *dominance;
    if (skip_malformed) cfg.skip_malformed = true;
    // Re-run config validation after flag overrides.
    cfg = RunConfig::from_json(cfg.to_json());

    for (auto* sub : app.get_subcommands()) dispatch.at(sub)(cfg);
  } catch (const factrace::Error& e) {
    emit_error(e.to_json());
    return 1;
  } catch (const std::exception& e) {
    emit_error({{"error", "Internal"}, {"message", e.what()}, {"details", nlohmann::json::object()}});
    return 1;
  }
  return 0;
}
