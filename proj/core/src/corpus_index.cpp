#include "factrace/corpus_index.hpp"

#include <limits>
#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <set>
#include <thread>
#include <unordered_map>

#include "factrace/error.hpp"
#include "factrace/io.hpp"
#include "factrace/text.hpp"

namespace factrace {

PatternAutomaton::PatternAutomaton(const std::vector<CooccurrenceQuery>& queries) {
  if (queries.empty()) {
    throw Error(ErrorCode::EmptyQuerySet, "no co-occurrence queries to compile");
  }
  std::unordered_map<std::string, std::uint32_t> index;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = index.emplace(s, static_cast<std::uint32_t>(patterns_.size()));
    if (inserted) patterns_.push_back(s);
    return it->second;
  };

  queries_.reserve(queries.size());
  for (const auto& q : queries) {
    CooccurrenceQuery nq{q.id, text::nfc(q.subject), text::nfc(q.object)};
    if (nq.subject.empty() || nq.object.empty()) {
      throw Error(ErrorCode::EmptyField,
                  "empty subject/object in query " + q.id.lang + ":" + std::to_string(q.id.fact_id),
                  {{"lang", q.id.lang}, {"fact_id", q.id.fact_id}});
    }
    subject_pattern_.push_back(intern(nq.subject));
    object_pattern_.push_back(intern(nq.object));
    queries_.push_back(std::move(nq));
  }

  referencing_.resize(patterns_.size());
  as_subject_.resize(patterns_.size());
  for (std::uint32_t q = 0; q < queries_.size(); ++q) {
    auto s = subject_pattern_[q];
    auto o = object_pattern_[q];
    as_subject_[s].push_back(q);
    referencing_[s].push_back(q);
    if (o != s) referencing_[o].push_back(q);
  }
  automaton_ = AhoCorasick(patterns_);
}

void PatternAutomaton::count_document(std::string_view normalized_text,
                                      std::vector<std::uint64_t>& counts,
                                      std::vector<std::uint64_t>& stamp, std::uint64_t epoch,
                                      std::vector<std::uint32_t>& scratch_hits) const {
  scratch_hits.clear();
  automaton_.scan(normalized_text, [&](AhoCorasick::PatternId p) {
    if (stamp[p] != epoch) {
      stamp[p] = epoch;
      scratch_hits.push_back(p);
    }
  });
  // Each query is credited from its subject pattern only, so a document
  // contributes at most once per query.
  for (auto p : scratch_hits) {
    for (auto q : as_subject_[p]) {
      if (stamp[object_pattern_[q]] == epoch) ++counts[q];
    }
  }
}

PatternAutomaton compile_patterns(const std::vector<CooccurrenceQuery>& queries) {
  return PatternAutomaton(queries);
}

std::string FrequencyTable::fingerprint() const {
  std::vector<std::string> sorted = shards;
  std::sort(sorted.begin(), sorted.end());
  std::string material = "normalization=" + normalization + "\n";
  for (const auto& s : sorted) material += "shard=" + s + "\n";
  return io::sha256_hex(material);
}

std::uint64_t FrequencyTable::at(const QueryId& id) const {
  auto it = counts.find(id);
  if (it == counts.end()) {
    throw Error(ErrorCode::UnknownKey, "no frequency for " + id.lang + ":" + std::to_string(id.fact_id),
                {{"lang", id.lang}, {"fact_id", id.fact_id}});
  }
  return it->second;
}

std::string FrequencyTable::to_csv(const std::optional<LanguageCode>& lang) const {
  std::string out = "lang,fact_id,frequency\n";
  for (const auto& [id, n] : counts) {
    if (lang && id.lang != *lang) continue;
    out += io::csv_row({id.lang, std::to_string(id.fact_id), std::to_string(n)});
  }
  return out;
}

nlohmann::json FrequencyTable::to_json() const {
  nlohmann::json freq = nlohmann::json::object();
  for (const auto& [id, n] : counts) {
    freq[id.lang][std::to_string(id.fact_id)] = n;
  }
  return {{"fingerprint", fingerprint()},
          {"normalization", normalization},
          {"shards", shards},
          {"total_documents", total_documents},
          {"skipped_records", skipped_records},
          {"frequencies", freq}};
}

FrequencyTable FrequencyTable::from_json(const nlohmann::json& j) {
  FrequencyTable t;
  try {
    t.normalization = j.at("normalization").get<std::string>();
    t.shards = j.at("shards").get<std::vector<std::string>>();
    t.total_documents = j.at("total_documents").get<std::uint64_t>();
    t.skipped_records = j.at("skipped_records").get<std::uint64_t>();
    for (const auto& [lang, per_fact] : j.at("frequencies").items()) {
      for (const auto& [id, n] : per_fact.items()) {
        auto fid = io::parse_uint(id);
        if (!fid || *fid > std::numeric_limits<FactId>::max()) throw std::invalid_argument("fact_id " + id);
        t.counts[{lang, static_cast<FactId>(*fid)}] = n.get<std::uint64_t>();
      }
    }
  } catch (const std::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("frequency table JSON: ") + e.what());
  }
  if (j.contains("fingerprint") && j.at("fingerprint") != t.fingerprint()) {
    throw Error(ErrorCode::FingerprintMismatch, "stored fingerprint does not match metadata");
  }
  return t;
}

FrequencyTable FrequencyTable::from_csv(const std::filesystem::path& path) {
  auto csv = io::read_csv(path);
  auto lang_col = csv.column("lang");
  auto id_col = csv.column("fact_id");
  auto freq_col = csv.column("frequency");
  FrequencyTable t;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& row = csv.rows[r];
    try {
      auto fid = io::parse_uint(row.at(id_col));
      auto freq = io::parse_uint(row.at(freq_col));
      if (!fid || !freq || *fid > std::numeric_limits<FactId>::max()) throw std::invalid_argument("row");
      t.counts[{row.at(lang_col), static_cast<FactId>(*fid)}] = *freq;
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ": bad row " + std::to_string(r + 2),
                  {{"path", path.string()}, {"record", r + 2}});
    }
  }
  return t;
}

namespace {

struct ShardResult {
  std::vector<std::uint64_t> counts;
  std::uint64_t documents = 0;
  std::uint64_t skipped = 0;
  struct DocKey {
    std::size_t hash;
    std::uint64_t record;
  };
  std::vector<DocKey> doc_keys;
};

ShardResult count_shard(const std::filesystem::path& path, const PatternAutomaton& automaton,
                        const CountOptions& options) {
  ShardResult result;
  result.counts.assign(automaton.queries().size(), 0);
  std::vector<std::uint64_t> stamp(automaton.pattern_count(), 0);
  std::vector<std::uint32_t> scratch;
  std::hash<std::string_view> hasher;

  io::LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    std::string doc_id;
    std::string body;
    try {
      auto j = nlohmann::json::parse(line);
      const auto& id = j.at("doc_id");
      doc_id = id.is_string() ? id.get<std::string>() : id.dump();
      body = j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      if (options.skip_malformed) {
        ++result.skipped;
        continue;
      }
      throw Error(ErrorCode::MalformedRecord,
                  path.string() + ":" + std::to_string(reader.line_number()) + ": " + e.what(),
                  {{"path", path.string()}, {"record", reader.line_number()}});
    }
    ++result.documents;
    result.doc_keys.push_back({hasher(doc_id), reader.line_number()});
    automaton.count_document(text::nfc(body), result.counts, stamp, result.documents, scratch);
  }
  return result;
}

}  // namespace

FrequencyTable count_cooccurrences(const std::vector<std::filesystem::path>& shards,
                                   const std::vector<CooccurrenceQuery>& queries,
                                   const CountOptions& options) {
  PatternAutomaton automaton(queries);

  std::vector<ShardResult> results(shards.size());
  std::vector<std::exception_ptr> errors(shards.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= shards.size()) return;
      try {
        results[i] = count_shard(shards[i], automaton, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(shards.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Doc-id uniqueness across the whole run.
  struct Key {
    std::size_t hash;
    std::size_t shard;
    std::uint64_t record;
  };
  std::vector<Key> all_keys;
  for (std::size_t s = 0; s < results.size(); ++s) {
    for (const auto& k : results[s].doc_keys) all_keys.push_back({k.hash, s, k.record});
    results[s].doc_keys.clear();
    results[s].doc_keys.shrink_to_fit();
  }
  std::sort(all_keys.begin(), all_keys.end(), [](const Key& a, const Key& b) {
    return std::tie(a.hash, a.shard, a.record) < std::tie(b.hash, b.shard, b.record);
  });
  for (std::size_t i = 1; i < all_keys.size(); ++i) {
    if (all_keys[i].hash == all_keys[i - 1].hash) {
      const auto& a = all_keys[i - 1];
      const auto& b = all_keys[i];
      throw Error(ErrorCode::DuplicateDocument,
                  "duplicate doc_id at " + shards[a.shard].string() + ":" + std::to_string(a.record) +
                      " and " + shards[b.shard].string() + ":" + std::to_string(b.record),
                  {{"first", {{"path", shards[a.shard].string()}, {"record", a.record}}},
                   {"second", {{"path", shards[b.shard].string()}, {"record", b.record}}}});
    }
  }

  FrequencyTable table;
  std::vector<std::uint64_t> totals(automaton.queries().size(), 0);
  for (const auto& r : results) {
    for (std::size_t q = 0; q < totals.size(); ++q) totals[q] += r.counts[q];
    table.total_documents += r.documents;
    table.skipped_records += r.skipped;
  }
  for (std::size_t q = 0; q < totals.size(); ++q) {
    table.counts[automaton.queries()[q].id] += totals[q];
  }
  for (const auto& s : shards) table.shards.push_back(s.string());
  return table;
}

FrequencyTable count_documents(const std::vector<Document>& docs,
                               const std::vector<CooccurrenceQuery>& queries) {
  PatternAutomaton automaton(queries);
  std::vector<std::uint64_t> counts(automaton.queries().size(), 0);
  std::vector<std::uint64_t> stamp(automaton.pattern_count(), 0);
  std::vector<std::uint32_t> scratch;
  std::uint64_t epoch = 0;
  for (const auto& d : docs) {
    automaton.count_document(text::nfc(d.text), counts, stamp, ++epoch, scratch);
  }
  FrequencyTable table;
  table.total_documents = docs.size();
  for (std::size_t q = 0; q < counts.size(); ++q) {
    table.counts[automaton.queries()[q].id] += counts[q];
  }
  return table;
}

FrequencyTable merge_tables(const FrequencyTable& a, const FrequencyTable& b) {
  if (a.normalization != b.normalization) {
    throw Error(ErrorCode::FingerprintMismatch,
                "normalization settings differ: '" + a.normalization + "' vs '" + b.normalization + "'");
  }
  if (a.counts.size() != b.counts.size() ||
      !std::equal(a.counts.begin(), a.counts.end(), b.counts.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw Error(ErrorCode::QuerySetMismatch, "frequency tables cover different query sets");
  }
  FrequencyTable out;
  out.normalization = a.normalization;
  out.total_documents = a.total_documents + b.total_documents;
  out.skipped_records = a.skipped_records + b.skipped_records;
  std::set<std::string> shard_set(a.shards.begin(), a.shards.end());
  shard_set.insert(b.shards.begin(), b.shards.end());
  out.shards.assign(shard_set.begin(), shard_set.end());
  auto it = b.counts.begin();
  for (const auto& [id, n] : a.counts) {
    out.counts.emplace_hint(out.counts.end(), id, n + it->second);
    ++it;
  }
  return out;
}

std::vector<CooccurrenceQuery> fact_queries(const MultilingualFactSet& ms) {
  std::vector<CooccurrenceQuery> queries;
  for (const auto& lang : ms.languages()) {
    for (const auto& f : ms.facts(lang)) {
      queries.push_back({{lang, f.fact_id}, f.subject, f.object});
    }
  }
  return queries;
}

}  // namespace factrace
