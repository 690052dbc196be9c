#include "fixtures.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unistd.h>

#include <nlohmann/json.hpp>

namespace fixtures {

namespace {

std::atomic<unsigned> g_counter{0};

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

struct Row {
  const char* relation;
  const char* eng_s;
  const char* eng_o;
  const char* fra_s;
  const char* fra_o;
  const char* rus_s;
  const char* rus_o;
};

const Row kRows[] = {
    {"capital_of", "France", "Paris", "France", "Paris", "Франция", "Париж"},
    {"capital_of", "Germany", "Berlin", "Allemagne", "Berlin", "Германия", "Берлин"},
    {"capital_of", "Spain", "Madrid", "Espagne", "Madrid", "Испания", "Мадрид"},
    {"capital_of", "Japan", "Tokyo", "Japon", "Tokyo", "Япония", "Токио"},
    {"continent", "Brazil", "South America", "Brésil", "Amérique du Sud", "Бразилия", "Южная Америка"},
    {"continent", "Canada", "North America", "Canada", "Amérique du Nord", "Канада", "Северная Америка"},
    {"continent", "Kenya", "Africa", "Kenya", "Afrique", "Кения", "Африка"},
    {"continent", "Chile", "South America", "Chili", "Amérique du Sud", "Чили", "Южная Америка"},
    {"manufacturer", "iPhone", "Apple", "iPhone", "Apple", "Айфон", "Apple"},
    {"manufacturer", "Corolla", "Toyota", "Corolla", "Toyota", "Королла", "Тойота"},
    {"manufacturer", "Galaxy", "Samsung", "Galaxy Note", "Samsung", "Galaxy", "Samsung"},
    {"manufacturer", "Model S", "Tesla", "Model S", "Tesla Motors", "Модель S", "Тесла"},
};

std::string prompt_for(const std::string& lang, const std::string& relation, const std::string& s) {
  if (lang == "eng_Latn") {
    if (relation == "capital_of") return "The capital of " + s + " is";
    if (relation == "continent") return s + " is located in";
    return s + " is produced by";
  }
  if (lang == "fra_Latn") {
    if (relation == "capital_of") return "La capitale de " + s + " est";
    if (relation == "continent") return s + " se trouve en";
    return s + " est fabriqué par";
  }
  if (relation == "capital_of") return "Столица " + s + " это";
  if (relation == "continent") return s + " находится в";
  return s + " производится компанией";
}

const std::vector<std::string> kLangs = {"eng_Latn", "fra_Latn", "rus_Cyrl"};

const std::map<std::string, std::vector<std::string>> kFiller = {
    {"eng_Latn", {"the", "and", "of", "with"}},
    {"fra_Latn", {"le", "et", "de", "avec"}},
    {"rus_Cyrl", {"и", "в", "не", "на"}},
};

const std::vector<std::string> kNoise = {"lorem", "ipsum", "δεδομένα", "данные", "数据", "資料", "데이터",
                                         "café", "naïve", "Ωmega", "x", "—", "1234", "ok"};

// Decomposes U+00E9 into e + U+0301 so documents exercise normalization.
std::string decompose_e_acute(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 1 < s.size() && static_cast<unsigned char>(s[i]) == 0xC3 &&
        static_cast<unsigned char>(s[i + 1]) == 0xA9) {
      out += "e\xCC\x81";
      ++i;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace

TempDir::TempDir(const std::string& tag) {
  path_ = fs::temp_directory_path() /
          ("factrace-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(g_counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

factrace::MultilingualFactSet exclusion_facts() {
  std::map<std::string, std::vector<factrace::Fact>> facts;
  for (factrace::FactId i = 0; i < 12; ++i) {
    const Row& r = kRows[i];
    const std::pair<const char*, const char*> so[] = {{r.eng_s, r.eng_o}, {r.fra_s, r.fra_o}, {r.rus_s, r.rus_o}};
    for (std::size_t l = 0; l < kLangs.size(); ++l) {
      facts[kLangs[l]].push_back(
          {i, r.relation, so[l].first, so[l].second, prompt_for(kLangs[l], r.relation, so[l].first)});
    }
  }
  return factrace::MultilingualFactSet(kLangs, std::move(facts));
}

factrace::MultilingualFactSet synthetic_facts(const std::vector<std::string>& langs, std::size_t n,
                                              std::uint64_t seed) {
  static const std::vector<std::string> kStems = {"Alpha", "Бета", "Γάμμα", "デルタ", "Épsilon", "제타", "Eta"};
  static const std::vector<std::string> kRelations = {"capital_of", "continent", "manufacturer"};
  std::mt19937_64 rng(seed);
  std::map<std::string, std::vector<factrace::Fact>> facts;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string relation = kRelations[i % kRelations.size()];
    const std::string shared_object = "Obj" + std::to_string(i);
    for (std::size_t l = 0; l < langs.size(); ++l) {
      std::string subject = kStems[(i + l) % kStems.size()] + " " + std::to_string(i);
      std::string object = pick(rng, 3) == 0 ? shared_object : kStems[pick(rng, kStems.size())] + "-o" + std::to_string(i);
      facts[langs[l]].push_back({static_cast<factrace::FactId>(i), relation, subject, object, "Q: " + subject + " ->"});
    }
  }
  return factrace::MultilingualFactSet(langs, std::move(facts));
}

factrace::LabeledDataset random_dataset(std::mt19937_64& rng, std::size_t n, std::uint64_t max_freq) {
  factrace::LabeledDataset data;
  const double pivot = unit(rng);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t f = rng() % (max_freq + 1);
    double p = max_freq == 0 ? 0.5 : 0.15 + 0.7 * (static_cast<double>(f) / static_cast<double>(max_freq) > pivot);
    data.push_back({static_cast<factrace::FactId>(i), f, unit(rng) < p});
  }
  return data;
}

std::vector<factrace::Document> random_documents(std::mt19937_64& rng, std::size_t n,
                                                 const std::vector<factrace::CooccurrenceQuery>& queries) {
  std::vector<factrace::Document> docs;
  docs.reserve(n);
  for (std::size_t d = 0; d < n; ++d) {
    std::string text;
    const std::size_t words = 3 + pick(rng, 12);
    for (std::size_t w = 0; w < words; ++w) {
      if (!text.empty()) text += pick(rng, 4) == 0 ? "" : " ";
      const std::size_t kind = pick(rng, 10);
      if (kind < 3 && !queries.empty()) {
        const auto& q = queries[pick(rng, queries.size())];
        std::string part = kind == 0 ? q.subject : kind == 1 ? q.object : q.subject + " / " + q.object;
        text += pick(rng, 3) == 0 ? decompose_e_acute(part) : part;
      } else {
        text += kNoise[pick(rng, kNoise.size())];
      }
    }
    docs.push_back({"doc-" + std::to_string(d), text});
  }
  return docs;
}

void write_text(const fs::path& path, const std::string& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << body;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<fs::path> write_shards(const fs::path& dir, const std::vector<factrace::Document>& docs,
                                   std::size_t shards, bool gzip_last) {
  fs::create_directories(dir);
  std::vector<std::string> bodies(shards);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    nlohmann::json j = {{"doc_id", docs[i].doc_id}, {"text", docs[i].text}};
    bodies[i % shards] += j.dump() + "\n";
  }
  std::vector<fs::path> paths;
  for (std::size_t s = 0; s < shards; ++s) {
    const bool gz = gzip_last && s + 1 == shards;
    fs::path p = dir / ("shard_" + std::to_string(s) + (gz ? ".jsonl.gz" : ".jsonl"));
    if (gz) {
      gzFile f = gzopen(p.c_str(), "wb");
      if (f == nullptr) throw std::runtime_error("cannot open " + p.string());
      if (!bodies[s].empty()) gzwrite(f, bodies[s].data(), static_cast<unsigned>(bodies[s].size()));
      gzclose(f);
    } else {
      write_text(p, bodies[s]);
    }
    paths.push_back(p);
  }
  return paths;
}

PipelineFixture write_pipeline_fixture(const fs::path& root, std::uint64_t seed) {
  PipelineFixture fx;
  fx.root = root;
  fx.output = root / "out";
  fx.steps = {1000, 2000, 3000};
  fs::create_directories(root);
  std::mt19937_64 rng(seed);

  const auto ms = exclusion_facts();
  for (const auto& lang : kLangs) {
    std::string body;
    for (const auto& f : ms.facts(lang)) {
      nlohmann::json j = {{"fact_id", f.fact_id}, {"relation", f.relation}, {"subject", f.subject},
                          {"object", f.object}, {"prompt", f.prompt}};
      body += j.dump() + "\n";
    }
    write_text(root / "facts" / (lang + ".jsonl"), body);
  }

  // Planted co-occurrence counts per (language, fact).
  static const std::uint64_t kFreq[] = {0, 1, 2, 3, 5, 8, 12, 20, 30, 45, 60, 80};
  std::map<std::string, std::vector<std::uint64_t>> planted;
  std::vector<factrace::Document> docs;
  for (std::size_t l = 0; l < kLangs.size(); ++l) {
    const auto& lang = kLangs[l];
    const auto& filler = kFiller.at(lang);
    auto filler_text = [&] {
      std::string t;
      const std::size_t n = 2 + pick(rng, 4);
      for (std::size_t w = 0; w < n; ++w) t += filler[pick(rng, filler.size())] + " ";
      return t;
    };
    for (const auto& f : ms.facts(lang)) {
      const std::uint64_t target = kFreq[(f.fact_id * 5 + l * 3) % 12];
      planted[lang].push_back(target);
      for (std::uint64_t k = 0; k < target; ++k) {
        docs.push_back({lang + "-" + std::to_string(f.fact_id) + "-" + std::to_string(k),
                        filler_text() + f.subject + " " + filler_text() + f.object + " " + filler_text()});
      }
      docs.push_back({lang + "-" + std::to_string(f.fact_id) + "-s", filler_text() + f.subject + " " + filler_text()});
    }
  }
  std::shuffle(docs.begin(), docs.end(), rng);
  write_shards(root / "corpus", docs, 4, true);

  // Predictions: recall grows with step; a few low-frequency facts are
  // surprisingly correct and a few high-frequency ones wrong.
  static const std::uint64_t kCut[] = {40, 20, 10};
  std::string preds;
  for (std::size_t l = 0; l < kLangs.size(); ++l) {
    const auto& lang = kLangs[l];
    for (const auto& f : ms.facts(lang)) {
      for (std::size_t s = 0; s < fx.steps.size(); ++s) {
        bool correct = planted[lang][f.fact_id] >= kCut[s];
        if (s > 0 && (f.fact_id + l) % 5 == 0) correct = !correct;
        std::string gen = correct ? "I believe it is " + f.object + "." : "I am not sure.";
        nlohmann::json j = {{"fact_id", f.fact_id}, {"lang", lang}, {"step", fx.steps[s]}, {"generation", gen}};
        preds += j.dump() + "\n";
      }
    }
  }
  write_text(root / "predictions.jsonl", preds);

  // Embeddings: other languages drift toward the reference with training.
  const std::size_t layers = 2, dim = 16, prompts = 12;
  std::vector<std::vector<float>> base(layers * prompts, std::vector<float>(dim));
  for (auto& v : base)
    for (auto& x : v) x = static_cast<float>(unit(rng) * 2.0 - 1.0);
  fs::create_directories(root / "embeddings");
  for (std::size_t l = 0; l < kLangs.size(); ++l) {
    for (std::size_t s = 0; s < fx.steps.size(); ++s) {
      const double mix = l == 0 ? 1.0 : 0.3 + 0.3 * static_cast<double>(s);
      std::vector<float> data;
      for (std::size_t layer = 0; layer < layers; ++layer) {
        for (std::size_t p = 0; p < prompts; ++p) {
          for (std::size_t k = 0; k < dim; ++k) {
            const double noise = unit(rng) * 2.0 - 1.0;
            data.push_back(static_cast<float>(mix * base[layer * prompts + p][k] + (1.0 - mix) * noise));
          }
        }
      }
      const std::string stem = kLangs[l] + "_" + std::to_string(fx.steps[s]);
      std::string bytes(data.size() * sizeof(float), '\0');
      std::memcpy(bytes.data(), data.data(), bytes.size());
      write_text(root / "embeddings" / (stem + ".f32"), bytes);
      std::vector<factrace::FactId> order(prompts);
      for (std::size_t p = 0; p < prompts; ++p) order[p] = static_cast<factrace::FactId>(p);
      nlohmann::json side = {{"lang", kLangs[l]}, {"step", fx.steps[s]}, {"layers", layers},
                             {"prompts", prompts}, {"dim", dim}, {"dtype", "float32-le"},
                             {"layout", "layer,prompt,dim"}, {"data_path", stem + ".f32"},
                             {"fact_id_order", order}};
      write_text(root / "embeddings" / (stem + ".json"), side.dump(2) + "\n");
    }
  }

  write_text(root / "token_profiles.csv",
             "lang,token,count\n"
             "eng_Latn,the,1000\neng_Latn,and,800\neng_Latn,of,700\neng_Latn,with,500\neng_Latn,ok,100\n"
             "eng_Latn,de,5\n"
             "fra_Latn,le,900\nfra_Latn,et,850\nfra_Latn,de,700\nfra_Latn,avec,400\nfra_Latn,ok,100\n"
             "rus_Cyrl,и,950\nrus_Cyrl,в,900\nrus_Cyrl,не,600\nrus_Cyrl,на,550\nrus_Cyrl,ok,100\n");

  nlohmann::json cfg = {{"facts_dir", (root / "facts").string()},
                        {"corpus_shards", {(root / "corpus" / "shard_*").string()}},
                        {"predictions", (root / "predictions.jsonl").string()},
                        {"embeddings_dir", (root / "embeddings").string()},
                        {"token_profiles", (root / "token_profiles.csv").string()},
                        {"output_dir", fx.output.string()},
                        {"steps", fx.steps},
                        {"seed", seed},
                        {"bootstrap_runs", 200},
                        {"bins", 5},
                        {"jobs", 2}};
  fx.config = root / "config.json";
  write_text(fx.config, cfg.dump(2) + "\n");
  return fx;
}

}  // namespace fixtures
