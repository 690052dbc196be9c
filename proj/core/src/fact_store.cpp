#include "factrace/fact_store.hpp"

#include <algorithm>

#include "factrace/error.hpp"
#include "factrace/io.hpp"
#include "factrace/text.hpp"

namespace factrace {

namespace {

void validate_fact(const LanguageCode& lang, const Fact& f) {
  auto empty_field = [&](const char* field) {
    return Error(ErrorCode::EmptyField,
                 "empty " + std::string(field) + " for fact " + std::to_string(f.fact_id) +
                     " in " + lang,
                 {{"lang", lang}, {"fact_id", f.fact_id}, {"field", field}});
  };
  if (f.relation.empty()) throw empty_field("relation");
  if (f.subject.empty()) throw empty_field("subject");
  if (f.object.empty()) throw empty_field("object");
  if (f.prompt.empty()) throw empty_field("prompt");
  if (f.prompt.find(f.subject) == std::string::npos) {
    throw Error(ErrorCode::InvalidPrompt,
                "prompt of fact " + std::to_string(f.fact_id) + " in " + lang +
                    " does not contain its subject",
                {{"lang", lang}, {"fact_id", f.fact_id}});
  }
}

}  // namespace

MultilingualFactSet::MultilingualFactSet(std::vector<LanguageCode> languages,
                                         std::map<LanguageCode, std::vector<Fact>> facts,
                                         bool require_parallel)
    : languages_(std::move(languages)), facts_(std::move(facts)) {
  for (const auto& lang : languages_) {
    if (!facts_.contains(lang)) {
      throw Error(ErrorCode::MissingLanguageFile, "no facts for language " + lang,
                  {{"lang", lang}});
    }
  }
  if (facts_.size() != languages_.size()) {
    throw Error(ErrorCode::UnknownLanguage, "fact lists for undeclared languages");
  }

  for (auto& [lang, list] : facts_) {
    std::sort(list.begin(), list.end(),
              [](const Fact& a, const Fact& b) { return a.fact_id < b.fact_id; });
    auto& pos = positions_[lang];
    for (std::size_t i = 0; i < list.size(); ++i) {
      validate_fact(lang, list[i]);
      if (!pos.emplace(list[i].fact_id, i).second) {
        throw Error(ErrorCode::DuplicateFactId,
                    "fact_id " + std::to_string(list[i].fact_id) + " repeated in " + lang,
                    {{"lang", lang}, {"fact_id", list[i].fact_id}});
      }
      relations_.insert(list[i].relation);
    }
  }

  // Same fact_id must carry the same relation wherever it appears.
  if (!languages_.empty()) {
    const auto& first_lang = languages_.front();
    for (const auto& lang : languages_) {
      for (const auto& f : facts_.at(lang)) {
        for (const auto& other : languages_) {
          if (other == lang) continue;
          const Fact* g = find(other, f.fact_id);
          if (g != nullptr && g->relation != f.relation) {
            throw Error(ErrorCode::RelationMismatch,
                        "fact " + std::to_string(f.fact_id) + " has relation '" + f.relation +
                            "' in " + lang + " but '" + g->relation + "' in " + other,
                        {{"fact_id", f.fact_id}, {"lang", lang}, {"other_lang", other}});
          }
        }
      }
      if (!require_parallel || lang == first_lang) continue;
      const auto& a = facts_.at(first_lang);
      const auto& b = facts_.at(lang);
      bool same = a.size() == b.size() &&
                  std::equal(a.begin(), a.end(), b.begin(), [](const Fact& x, const Fact& y) {
                    return x.fact_id == y.fact_id;
                  });
      if (!same) {
        nlohmann::json missing = nlohmann::json::array();
        for (const auto& f : a) {
          if (find(lang, f.fact_id) == nullptr) missing.push_back({{"lang", lang}, {"fact_id", f.fact_id}});
        }
        for (const auto& f : b) {
          if (find(first_lang, f.fact_id) == nullptr)
            missing.push_back({{"lang", first_lang}, {"fact_id", f.fact_id}});
        }
        throw Error(ErrorCode::IndexMismatch,
                    "fact_id sets differ between " + first_lang + " and " + lang,
                    {{"missing", missing}});
      }
    }
  }
}

const std::vector<Fact>& MultilingualFactSet::facts(const LanguageCode& lang) const {
  auto it = facts_.find(lang);
  if (it == facts_.end()) {
    throw Error(ErrorCode::UnknownLanguage, "unknown language " + lang, {{"lang", lang}});
  }
  return it->second;
}

const Fact* MultilingualFactSet::find(const LanguageCode& lang, FactId id) const {
  auto pit = positions_.find(lang);
  if (pit == positions_.end()) return nullptr;
  auto it = pit->second.find(id);
  if (it == pit->second.end()) return nullptr;
  return &facts_.at(lang)[it->second];
}

std::vector<FactId> MultilingualFactSet::fact_ids() const {
  std::set<FactId> ids;
  for (const auto& [lang, list] : facts_) {
    for (const auto& f : list) ids.insert(f.fact_id);
  }
  return {ids.begin(), ids.end()};
}

bool MultilingualFactSet::is_parallel() const {
  if (languages_.empty()) return true;
  const auto& a = facts_.at(languages_.front());
  for (const auto& lang : languages_) {
    const auto& b = facts_.at(lang);
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].fact_id != b[i].fact_id) return false;
    }
  }
  return true;
}

nlohmann::json ExclusionReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [lang, ids] : kept) {
    j[lang] = {{"kept", ids.size()},
               {"removed", removed.at(lang)},
               {"total", total.at(lang)},
               {"kept_ids", ids}};
  }
  return j;
}

MultilingualFactSet load_facts(const std::filesystem::path& dir,
                               const std::vector<LanguageCode>& languages) {
  std::vector<LanguageCode> langs = languages;
  if (langs.empty()) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
      throw Error(ErrorCode::MissingLanguageFile, "facts directory not found: " + dir.string(),
                  {{"path", dir.string()}});
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
        langs.push_back(entry.path().stem().string());
      }
    }
    std::sort(langs.begin(), langs.end());
    if (langs.empty()) {
      throw Error(ErrorCode::MissingLanguageFile, "no *.jsonl fact files in " + dir.string(),
                  {{"path", dir.string()}});
    }
  }

  std::map<LanguageCode, std::vector<Fact>> facts;
  for (const auto& lang : langs) {
    auto path = dir / (lang + ".jsonl");
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::MissingLanguageFile, "missing fact file " + path.string(),
                  {{"lang", lang}, {"path", path.string()}});
    }
    io::LineReader reader(path);
    std::string line;
    auto& list = facts[lang];
    while (reader.next(line)) {
      if (text::trim(line).empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        Fact f;
        f.fact_id = j.at("fact_id").get<FactId>();
        f.relation = text::normalize_field(j.at("relation").get<std::string>());
        f.subject = text::normalize_field(j.at("subject").get<std::string>());
        f.object = text::normalize_field(j.at("object").get<std::string>());
        f.prompt = text::normalize_field(j.at("prompt").get<std::string>());
        list.push_back(std::move(f));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedRecord,
                    path.string() + ":" + std::to_string(reader.line_number()) + ": " + e.what(),
                    {{"path", path.string()}, {"record", reader.line_number()}});
      }
    }
  }
  return MultilingualFactSet(std::move(langs), std::move(facts), /*require_parallel=*/true);
}

void save_facts(const MultilingualFactSet& ms, const std::filesystem::path& dir) {
  for (const auto& lang : ms.languages()) {
    std::string out;
    for (const auto& f : ms.facts(lang)) {
      nlohmann::json j = {{"fact_id", f.fact_id},
                          {"relation", f.relation},
                          {"subject", f.subject},
                          {"object", f.object},
                          {"prompt", f.prompt}};
      out += j.dump() + "\n";
    }
    io::write_file_atomic(dir / (lang + ".jsonl"), out);
  }
}

std::pair<MultilingualFactSet, ExclusionReport> exclude_identical(const MultilingualFactSet& ms) {
  std::map<LanguageCode, std::vector<Fact>> kept_facts;
  ExclusionReport report;
  for (const auto& lang : ms.languages()) {
    auto& kept = kept_facts[lang];
    auto& kept_ids = report.kept[lang];
    const auto& list = ms.facts(lang);
    std::size_t removed = 0;
    for (const auto& f : list) {
      bool collides = false;
      for (const auto& other : ms.languages()) {
        if (other == lang) continue;
        const Fact* g = ms.find(other, f.fact_id);
        if (g != nullptr && g->subject == f.subject && g->object == f.object) {
          collides = true;
          break;
        }
      }
      if (collides) {
        ++removed;
      } else {
        kept.push_back(f);
        kept_ids.push_back(f.fact_id);
      }
    }
    report.removed[lang] = removed;
    report.total[lang] = list.size();
  }
  return {MultilingualFactSet(ms.languages(), std::move(kept_facts), /*require_parallel=*/false),
          std::move(report)};
}

IdenticalObjectFlags identical_object_flags(const MultilingualFactSet& ms,
                                            const LanguageCode& ref_lang) {
  if (!ms.has_language(ref_lang)) {
    throw Error(ErrorCode::UnknownLanguage, "reference language " + ref_lang + " not in fact set",
                {{"lang", ref_lang}});
  }
  IdenticalObjectFlags flags;
  for (const auto& lang : ms.languages()) {
    auto& out = flags[lang];
    for (const auto& f : ms.facts(lang)) {
      const Fact* ref = ms.find(ref_lang, f.fact_id);
      out[f.fact_id] = ref != nullptr && ref->object == f.object;
    }
  }
  return flags;
}

std::map<std::string, std::size_t> relation_histogram(const MultilingualFactSet& ms,
                                                      const std::optional<LanguageCode>& lang) {
  std::map<std::string, std::size_t> hist;
  if (ms.empty()) return hist;
  const auto& list = ms.facts(lang.value_or(ms.languages().front()));
  for (const auto& f : list) ++hist[f.relation];
  return hist;
}

}  // namespace factrace
