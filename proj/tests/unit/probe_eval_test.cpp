#include <gtest/gtest.h>

#include <random>
#include <set>

#include "expect_error.hpp"
#include "factrace/probe_eval.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace factrace;

namespace {

BitVector bits(std::size_t n, const std::set<std::size_t>& on) {
  BitVector b(n);
  for (auto i : on) b.set(i);
  return b;
}

// Matrix over fact ids 1..8 with hand-set rows.
CorrectnessMatrix small_matrix() {
  CorrectnessMatrix cm({1, 2, 3, 4, 5, 6, 7, 8});
  cm.set_row("eng_Latn", 1, bits(8, {0, 1, 2}));     // {1,2,3}
  cm.set_row("fra_Latn", 1, bits(8, {1, 2, 3}));     // {2,3,4}
  cm.set_row("rus_Cyrl", 1, bits(8, {}));
  cm.set_row("ukr_Cyrl", 1, bits(8, {}));
  return cm;
}

}  // namespace

TEST(ProbeEval, CompleteGenerationMatching) {
  EXPECT_FALSE(judge_correct("Antwerp is the answer", "Antananarivo"));
  EXPECT_TRUE(judge_correct("It is Antananarivo, of course", "Antananarivo"));
  EXPECT_TRUE(judge_correct("Cafe\xCC\x81 de Flore", "Caf\xC3\xA9"));
  EXPECT_FALSE(judge_correct("paris", "Paris"));
  EXPECT_FALSE(judge_correct("", "Paris"));
}

TEST(ProbeEval, ConsistencyIsJaccard) {
  auto cm = small_matrix();
  EXPECT_DOUBLE_EQ(*consistency(cm, "eng_Latn", "fra_Latn", 1), 0.5);
  EXPECT_DOUBLE_EQ(*consistency(cm, "eng_Latn", "eng_Latn", 1), 1.0);
  EXPECT_FALSE(consistency(cm, "rus_Cyrl", "ukr_Cyrl", 1).has_value());
  EXPECT_DOUBLE_EQ(*consistency(cm, "eng_Latn", "rus_Cyrl", 1), 0.0);
  EXPECT_DOUBLE_EQ(accuracy(cm, "eng_Latn", 1), 3.0 / 8.0);
  EXPECT_FACTRACE_ERROR(accuracy(cm, "eng_Latn", 2), UnknownKey);
}

TEST(ProbeEval, ConsistencyPropertiesOnRandomSets) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 1 + rng() % 16;
    std::vector<FactId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<FactId>(i * 3 + 1);
    std::set<FactId> sa, sb;
    BitVector a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng() % 2) a.set(i), sa.insert(ids[i]);
      if (rng() % 2) b.set(i), sb.insert(ids[i]);
    }
    CorrectnessMatrix cm(ids);
    cm.set_row("a", 1, a);
    cm.set_row("b", 1, b);
    auto ab = consistency(cm, "a", "b", 1);
    auto ba = consistency(cm, "b", "a", 1);
    auto expected = oracle::set_jaccard(sa, sb);
    ASSERT_EQ(ab.has_value(), expected.has_value());
    ASSERT_EQ(ab.has_value(), ba.has_value());
    if (!ab) continue;
    EXPECT_DOUBLE_EQ(*ab, *expected);
    EXPECT_EQ(*ab, *ba);
    EXPECT_GE(*ab, 0.0);
    EXPECT_LE(*ab, 1.0);
    // CO <= min(|A|,|B|) / max(|A|,|B|)
    const std::size_t inter = intersection_count(a, b), uni = union_count(a, b);
    const std::size_t lo = std::min(a.count(), b.count()), hi = std::max(a.count(), b.count());
    EXPECT_LE(inter * hi, lo * uni);
  }
}

TEST(ProbeEval, ConsistencyMatrixIsSymmetric) {
  auto cm = small_matrix();
  auto m = consistency_matrix(cm, 1);
  ASSERT_EQ(m.languages.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(m.values[i][j], m.values[j][i]);
  }
  EXPECT_DOUBLE_EQ(*m.at("fra_Latn", "eng_Latn"), 0.5);
  EXPECT_FALSE(m.at("rus_Cyrl", "ukr_Cyrl").has_value());
  auto j = m.to_json();
  EXPECT_EQ(j["step"], 1);
  EXPECT_NE(j.dump().find("null"), std::string::npos);
}

TEST(ProbeEval, BuildCorrectnessFromPredictions) {
  auto ms = fixtures::exclusion_facts();
  std::vector<PredictionRecord> recs;
  for (const auto& lang : ms.languages()) {
    for (const auto& f : ms.facts(lang)) {
      recs.push_back({f.fact_id, lang, 10, f.fact_id % 2 == 0 ? "Answer: " + f.object : "no idea"});
    }
  }
  auto cm = build_correctness(recs, ms, {10});
  EXPECT_DOUBLE_EQ(accuracy(cm, "rus_Cyrl", 10), 0.5);
  EXPECT_TRUE(cm.row("eng_Latn", 10).test(cm.position(4)));
  EXPECT_FALSE(cm.row("eng_Latn", 10).test(cm.position(5)));
  EXPECT_EQ(cm.missing_count, 0u);

  recs.pop_back();
  EXPECT_FACTRACE_ERROR(build_correctness(recs, ms, {10}), MissingPrediction);
  auto lenient = build_correctness(recs, ms, {10}, MissingPolicy::Incorrect);
  EXPECT_EQ(lenient.missing_count, 1u);
  EXPECT_FACTRACE_ERROR(build_correctness(recs, ms, {10, 20}), MissingPrediction);

  try {
    build_correctness(recs, ms, {10});
  } catch (const Error& e) {
    EXPECT_EQ(e.details()["missing"].size(), 1u);
  }
}

TEST(ProbeEval, GenerationMatchesOnlyOwnLanguageObject) {
  auto ms = fixtures::exclusion_facts();
  std::vector<PredictionRecord> recs;
  for (const auto& lang : ms.languages()) {
    for (const auto& f : ms.facts(lang)) {
      // Always answer with the English object.
      recs.push_back({f.fact_id, lang, 1, ms.find("eng_Latn", f.fact_id)->object});
    }
  }
  auto cm = build_correctness(recs, ms, {1});
  EXPECT_DOUBLE_EQ(accuracy(cm, "eng_Latn", 1), 1.0);
  EXPECT_TRUE(cm.row("fra_Latn", 1).test(cm.position(0)));   // Paris
  EXPECT_FALSE(cm.row("fra_Latn", 1).test(cm.position(6)));  // Africa vs Afrique
}

TEST(ProbeEval, LoadPredictions) {
  fixtures::TempDir tmp("preds");
  fixtures::write_text(tmp.path() / "p.jsonl",
                       "{\"fact_id\":1,\"lang\":\"eng_Latn\",\"step\":5,\"generation\":\"x\"}\n"
                       "{\"fact_id\":2,\"lang\":\"eng_Latn\",\"step\":5,\"generation\":\"y\"}\n");
  EXPECT_EQ(load_predictions(tmp.path() / "p.jsonl").size(), 2u);
  fixtures::write_text(tmp.path() / "d.jsonl",
                       "{\"fact_id\":1,\"lang\":\"eng_Latn\",\"step\":5,\"generation\":\"x\"}\n"
                       "{\"fact_id\":1,\"lang\":\"eng_Latn\",\"step\":5,\"generation\":\"y\"}\n");
  EXPECT_FACTRACE_ERROR(load_predictions(tmp.path() / "d.jsonl"), DuplicatePrediction);
  fixtures::write_text(tmp.path() / "m.jsonl", "{\"fact_id\":1}\n");
  EXPECT_FACTRACE_ERROR(load_predictions(tmp.path() / "m.jsonl"), MalformedRecord);
}

TEST(ProbeEval, GroupConsistencySeries) {
  CorrectnessMatrix cm({0, 1, 2, 3});
  cm.set_row("eng_Latn", 1, bits(4, {0, 1}));
  cm.set_row("fra_Latn", 1, bits(4, {0}));
  cm.set_row("spa_Latn", 1, bits(4, {}));
  cm.set_row("eng_Latn", 2, bits(4, {}));
  cm.set_row("fra_Latn", 2, bits(4, {}));
  cm.set_row("spa_Latn", 2, bits(4, {}));
  auto s = group_consistency_series(cm, {{"Latn", {"eng_Latn", "fra_Latn", "spa_Latn"}}}, {1, 2});
  ASSERT_EQ(s.at("Latn").size(), 2u);
  // pairs: eng-fra 0.5, eng-spa 0, fra-spa 0
  EXPECT_DOUBLE_EQ(*s.at("Latn")[0], 0.5 / 3.0);
  EXPECT_FALSE(s.at("Latn")[1].has_value());
  EXPECT_FACTRACE_ERROR(group_consistency_series(cm, {{"solo", {"eng_Latn"}}}, {1}), GroupTooSmall);
}

TEST(ProbeEval, PerRelationMetrics) {
  auto ms = fixtures::exclusion_facts();
  std::vector<PredictionRecord> recs;
  for (const auto& lang : ms.languages()) {
    for (const auto& f : ms.facts(lang)) {
      const bool right = f.relation == "capital_of" || (lang == "eng_Latn" && f.relation == "continent");
      recs.push_back({f.fact_id, lang, 1, right ? f.object : "?"});
    }
  }
  auto cm = build_correctness(recs, ms, {1});
  auto m = per_relation_metrics(cm, ms, "eng_Latn", {1});
  EXPECT_DOUBLE_EQ(m.at({"fra_Latn", "capital_of", 1}).acc, 1.0);
  EXPECT_DOUBLE_EQ(*m.at({"fra_Latn", "capital_of", 1}).co_ref, 1.0);
  EXPECT_DOUBLE_EQ(m.at({"fra_Latn", "continent", 1}).acc, 0.0);
  EXPECT_DOUBLE_EQ(*m.at({"fra_Latn", "continent", 1}).co_ref, 0.0);
  EXPECT_FALSE(m.at({"fra_Latn", "manufacturer", 1}).co_ref.has_value());
  EXPECT_EQ(per_relation_metrics(cm, ms, "eng_Latn", {1}, {"continent"}).size(), 3u);
  EXPECT_FACTRACE_ERROR(per_relation_metrics(cm, ms, "eng_Latn", {1}, {"religion"}), UnknownRelation);
}

TEST(ProbeEval, SubsetAccuracy) {
  auto cm = small_matrix();
  EXPECT_EQ(subset_accuracy_series(cm, {1, 4}, "eng_Latn", {1}), (std::vector<double>{0.5}));
  EXPECT_FACTRACE_ERROR(subset_accuracy_series(cm, {}, "eng_Latn", {1}), EmptySubset);
}

TEST(ProbeEval, IdenticalObjectRecall) {
  auto ms = fixtures::exclusion_facts();
  auto flags = identical_object_flags(ms, "eng_Latn");
  std::vector<PredictionRecord> recs;
  for (const auto& lang : ms.languages()) {
    for (const auto& f : ms.facts(lang)) {
      const bool right = lang == "eng_Latn" || (lang == "fra_Latn" && f.fact_id == 1);
      recs.push_back({f.fact_id, lang, 1, right ? f.object : "?"});
    }
  }
  auto cm = build_correctness(recs, ms, {1});
  auto r = identical_object_recall(cm, flags, ms, "eng_Latn", 1);
  // fra shares objects with eng on capitals 0-3.
  EXPECT_EQ(r.at({"fra_Latn", "capital_of"}), (RecallCount{1, 4}));
  EXPECT_EQ(r.at({"rus_Cyrl", "manufacturer"}), (RecallCount{0, 2}));  // Apple, Samsung
  EXPECT_EQ(r.at({"rus_Cyrl", "continent"}), (RecallCount{0, 0}));
}
