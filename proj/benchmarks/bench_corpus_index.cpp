#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "factrace/corpus_index.hpp"

namespace {

std::vector<factrace::CooccurrenceQuery> make_queries(std::size_t n) {
  std::vector<factrace::CooccurrenceQuery> q;
  for (std::size_t i = 0; i < n; ++i) {
    q.push_back({{"eng_Latn", static_cast<factrace::FactId>(i)}, "Subject" + std::to_string(i),
                 "Object" + std::to_string(i % 97)});
  }
  return q;
}

std::vector<factrace::Document> make_docs(std::size_t n, std::size_t queries) {
  std::mt19937_64 rng(1);
  std::vector<factrace::Document> docs;
  for (std::size_t d = 0; d < n; ++d) {
    std::string text;
    for (int w = 0; w < 120; ++w) {
      switch (rng() % 6) {
        case 0: text += "Subject" + std::to_string(rng() % queries); break;
        case 1: text += "Object" + std::to_string(rng() % 97); break;
        default: text += "lorem ipsum данные"; break;
      }
      text += ' ';
    }
    docs.push_back({std::to_string(d), std::move(text)});
  }
  return docs;
}

void BM_CompilePatterns(benchmark::State& state) {
  auto queries = make_queries(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(factrace::compile_patterns(queries).pattern_count());
}
BENCHMARK(BM_CompilePatterns)->Arg(1000)->Arg(10000);

void BM_CountDocuments(benchmark::State& state) {
  const auto nq = static_cast<std::size_t>(state.range(0));
  auto queries = make_queries(nq);
  auto docs = make_docs(500, nq);
  std::size_t bytes = 0;
  for (const auto& d : docs) bytes += d.text.size();
  for (auto _ : state) benchmark::DoNotOptimize(factrace::count_documents(docs, queries).counts.size());
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
}
BENCHMARK(BM_CountDocuments)->Arg(100)->Arg(5000);

}  // namespace
