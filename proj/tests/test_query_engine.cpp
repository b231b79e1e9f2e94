#include <doctest.h>

#include <random>

#include "hmgi/engine.hpp"
#include "support/oracle.hpp"

using namespace hmgi;
using namespace hmgi::query;

namespace {

EngineConfig quiet_config() {
  EngineConfig c;
  c.vectors.hnsw.M = 8;
  c.vectors.hnsw.ef_construction = 48;
  c.vectors.hnsw.ef_search = 64;
  c.vectors.auto_vacuum = false;
  c.community_boost = false;
  return c;
}

std::vector<float> unit(std::vector<float> v) {
  double n = 0;
  for (float x : v) n += double(x) * x;
  n = std::sqrt(n);
  for (float& x : v) x = static_cast<float>(x / n);
  return v;
}

}  // namespace

TEST_CASE("estimate_cost evaluates the formula exactly") {
  CostCoefficients one{1.0, 1.0, 1.0};
  auto c = estimate_cost(1, 5, 2, 1, one);
  CHECK(c.term_anns == 0.0);          // log 1
  CHECK(c.term_traversal == 10.0);    // d*h
  CHECK(c.term_partition == 0.0);     // p=N=1
  CHECK(c.total == 10.0);

  auto h0 = estimate_cost(1000, 128, 0, 4, one);
  CHECK(h0.term_traversal == 0.0);

  CostCoefficients mixed{1.0, 0.1, 0.01};
  auto est = estimate_cost(1000000, 128, 2, 4, mixed);
  CHECK(est.total ==
        doctest::Approx(oracle::cost(1.0, 0.1, 0.01, 1e6, 128, 2, 4))
            .epsilon(1e-12));

  // p = N zeroes the partition term.
  auto pn = estimate_cost(64, 8, 1, 64, one);
  CHECK(pn.term_partition == doctest::Approx(0.0));
}

TEST_CASE("estimate_cost domain errors") {
  CostCoefficients coeff;
  CHECK_THROWS_AS(estimate_cost(0, 8, 1, 1, coeff), DomainError);
  CHECK_THROWS_AS(estimate_cost(10, 0, 1, 1, coeff), DomainError);
  CHECK_THROWS_AS(estimate_cost(10, 8, 1, 0, coeff), DomainError);
  CHECK_THROWS_AS(estimate_cost(10, 8, 1, 11, coeff), DomainError);
}

TEST_CASE("estimate_cost is strictly increasing in N and in d*h") {
  CostCoefficients coeff{0.7, 0.03, 0.2};
  double prev = -1e300;
  for (std::uint64_t n : {10ull, 100ull, 1000ull, 10000ull, 100000ull}) {
    double c = estimate_cost(n, 64, 2, 4, coeff).total;
    CHECK(c > prev);
    prev = c;
  }
  prev = -1e300;
  for (std::uint32_t h : {1u, 2u, 3u, 4u}) {
    double c = estimate_cost(100000, 64, h, 4, coeff).total;
    CHECK(c > prev);
    prev = c;
  }
  prev = -1e300;
  for (std::uint32_t d : {16u, 64u, 256u, 1024u}) {
    double c = estimate_cost(100000, d, 2, 4, coeff).total;
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("plan picks the cheaper order and honors force") {
  Catalog cat;
  cat.vectors_per_modality["text"] = 1000000;
  cat.dim_per_modality["text"] = 128;
  cat.partitions_per_modality["text"] = 4;
  cat.label_counts["Seeded"] = 10;
  cat.total_nodes = 1000000;
  CostCoefficients coeff;  // defaults (1.0, 0.01, 0.1)

  SUBCASE("pure vector query is single-stage vector-first") {
    auto ast = parse("VECTOR_SEARCH(text, $q, k=10) RETURN TOP 10");
    auto plan = query::plan(ast, cat, coeff);
    CHECK(plan.order == PipelineOrder::VectorFirst);
    CHECK_FALSE(plan.traversal_first.has_value());
  }

  SUBCASE("seedless MATCH with hops makes vector-first mandatory") {
    auto ast =
        parse("MATCH (n) VECTOR_SEARCH(text, $q, k=10) TRAVERSE hops=2 "
              "RETURN TOP 10");
    auto plan = query::plan(ast, cat, coeff);
    CHECK(plan.order == PipelineOrder::VectorFirst);
    CHECK_THROWS_AS(query::plan(ast, cat, coeff, PipelineOrder::TraversalFirst),
                    UnplannableQuery);
  }

  SUBCASE("small seed set beats a million-vector partition") {
    auto ast = parse(
        "MATCH (n:Seeded) VECTOR_SEARCH(text, $q, k=10) TRAVERSE hops=2 "
        "RETURN TOP 10");
    auto plan = query::plan(ast, cat, coeff);
    REQUIRE(plan.traversal_first.has_value());
    // Hand evaluation of both orders.
    double vf = oracle::cost(1.0, 0.01, 0.1, 1e6, 128, 2, 4);
    double tf = oracle::cost(1.0, 0.01, 0.1, 10, 128, 2, 1);
    CHECK(plan.vector_first.total == doctest::Approx(vf).epsilon(1e-12));
    CHECK(plan.traversal_first->total == doctest::Approx(tf).epsilon(1e-12));
    CHECK(tf < vf);
    CHECK(plan.order == PipelineOrder::TraversalFirst);
    CHECK(plan.seed_estimate == 10);
  }

  SUBCASE("unknown modality is rejected at planning") {
    auto ast = parse("VECTOR_SEARCH(lidar, $q, k=10) RETURN TOP 10");
    CHECK_THROWS_AS(query::plan(ast, cat, coeff), UnknownModality);
  }
}

TEST_CASE("fuse_score hand evaluations") {
  CHECK(fuse_score(0.0, {}, 1.0, 0.0) == 1.0);
  std::vector<double> ones{1.0, 1.0};
  CHECK(fuse_score(0.0, ones, 0.5, 0.5) == doctest::Approx(1.0));
  std::vector<double> hops{0.8, 0.4};
  CHECK(fuse_score(0.3, hops, 0.6, 0.4) == doctest::Approx(0.66));
  // h=0: graph term is zero regardless of weight.
  CHECK(fuse_score(0.5, {}, 0.3, 0.7) == doctest::Approx(0.15));
}

TEST_CASE("fuse_score matches the independent evaluator on random tuples") {
  std::mt19937_64 rng(2025);
  for (int i = 0; i < 10000; ++i) {
    double d_v = 2.0 * oracle::uniform01(rng);
    std::vector<double> hops(rng() % 4);
    for (double& h : hops) h = oracle::uniform01(rng);
    double v = oracle::uniform01(rng);
    double w_v = v, w_g = 1.0 - v;
    double got = fuse_score(d_v, hops, w_v, w_g);
    double want = oracle::fuse(d_v, hops, w_v, w_g);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("fuse_score monotonicity") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> hops(1 + rng() % 3);
    for (double& h : hops) h = oracle::uniform01(rng);
    double w_v = 0.4, w_g = 0.6;
    double d1 = oracle::uniform01(rng);
    double d2 = d1 * 0.5;  // smaller distance
    CHECK(fuse_score(d2, hops, w_v, w_g) >= fuse_score(d1, hops, w_v, w_g));
    auto boosted = hops;
    boosted[0] = std::min(1.0, boosted[0] + 0.2);
    CHECK(fuse_score(d1, boosted, w_v, w_g) >= fuse_score(d1, hops, w_v, w_g));
  }
}

TEST_CASE("adjust_dimension pads, truncates, renormalizes") {
  auto same = adjust_dimension(std::vector<float>{unit({1, 2, 3, 4})}, 4);
  CHECK(same.size() == 4);

  auto padded = adjust_dimension(std::vector<float>{3.0f, 4.0f}, 5);
  REQUIRE(padded.size() == 5);
  double norm = 0;
  for (float x : padded) norm += double(x) * x;
  CHECK(norm == doctest::Approx(1.0));
  CHECK(padded[2] == 0.0f);
  CHECK(padded[0] == doctest::Approx(0.6f));

  std::vector<float> big{1, 1, 1, 1, 1, 1, 1, 1};
  auto cut = adjust_dimension(big, 3);
  REQUIRE(cut.size() == 3);
  // Independent check: first 3 kept then renormalized.
  CHECK(cut[0] == doctest::Approx(1.0 / std::sqrt(3.0)));

  CHECK_THROWS_AS(adjust_dimension(std::vector<float>{0.f, 0.f, 1.f}, 2),
                  ZeroVectorAfterAdjust);
  CHECK_THROWS_AS(adjust_dimension(std::vector<float>{}, 4),
                  ZeroVectorAfterAdjust);
}

TEST_CASE("single-node store self-match scores w_v") {
  HmgiEngine engine(quiet_config());
  engine.register_modality(Modality::text(), 4);
  auto v = unit({0.4f, 0.3f, 0.2f, 0.1f});
  engine.add_node({"Doc"}, Modality::text(), v, {});

  auto results = engine.run_query(
      "VECTOR_SEARCH(text, node(0), k=5) SIMILARITY_WEIGHT v=0.7 g=0.3 "
      "RETURN TOP 5");
  REQUIRE(results.size() == 1);
  CHECK(results[0].id == 0);
  CHECK(results[0].score == doctest::Approx(0.7).epsilon(1e-5));
}

TEST_CASE("execute matches the exhaustive fusion oracle in the exact regime") {
  EngineConfig config = quiet_config();
  HmgiEngine engine(config);
  engine.register_modality(Modality::text(), 12);
  std::mt19937_64 rng(555);
  const int n = 400;
  std::vector<std::pair<NodeId, std::vector<float>>> data;
  for (int i = 0; i < n; ++i) {
    auto v = unit(oracle::random_vector(rng, 12));
    data.emplace_back(i, v);
    engine.add_node({"E"}, Modality::text(), v, {});
  }
  for (int i = 0; i < 1200; ++i) {
    NodeId a = rng() % n, b = rng() % n;
    if (a != b)
      engine.add_edge(a, b, "R",
                      static_cast<float>(0.1 + 0.9 * oracle::uniform01(rng)));
  }
  engine.vacuum();

  const std::uint32_t k_vec = 20;
  auto ast = parse("VECTOR_SEARCH(text, $q, k=" + std::to_string(k_vec) +
                   ", ef=" + std::to_string(n) +
                   ") TRAVERSE hops=1 SIMILARITY_WEIGHT v=0.5 g=0.5 "
                   "RETURN TOP 10");
  auto plan = engine.plan_query(ast);

  for (int qi = 0; qi < 25; ++qi) {
    auto q = unit(oracle::random_vector(rng, 12));
    auto got = engine.execute(plan, engine.open_snapshot(), {{"q", q}});

    // Oracle: brute-force top-k seeds, expand 1 hop via best-path scores,
    // fuse every candidate with the formula.
    auto seeds = oracle::brute_topk(data, q, k_vec);
    std::map<NodeId, double> d_v;
    for (NodeId s : seeds) d_v[s] = oracle::cosine_distance(data[s].second, q);
    auto reached = engine.graph().traverse_khop(
        std::vector<NodeId>(seeds.begin(), seeds.end()), 1);
    std::map<NodeId, std::vector<double>> hops;
    for (const auto& r : reached)
      hops[r.id].assign(r.hop_scores.begin(), r.hop_scores.end());
    std::vector<query::FusedResult> want;
    std::set<NodeId> cand;
    for (NodeId s : seeds) cand.insert(s);
    for (const auto& [id, h] : hops) cand.insert(id);
    for (NodeId id : cand) {
      query::FusedResult r;
      r.id = id;
      r.d_v = d_v.count(id) ? d_v[id] : 1.0;
      if (hops.count(id)) r.hop_scores = hops[id];
      r.score = oracle::fuse(r.d_v, r.hop_scores, 0.5, 0.5);
      want.push_back(r);
    }
    std::sort(want.begin(), want.end(), query::fused_order);
    if (want.size() > 10) want.resize(10);

    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CAPTURE(qi);
      CAPTURE(i);
      // Equal up to fused-score ties.
      if (got[i].id != want[i].id)
        CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-6));
      else
        CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-6));
    }
  }
}

TEST_CASE("w_g=0 reduces execute to pure ANNS ordering") {
  HmgiEngine engine(quiet_config());
  engine.register_modality(Modality::text(), 8);
  std::mt19937_64 rng(77);
  for (int i = 0; i < 300; ++i)
    engine.add_node({}, Modality::text(), unit(oracle::random_vector(rng, 8)),
                    {});
  for (int i = 0; i < 600; ++i) {
    NodeId a = rng() % 300, b = rng() % 300;
    if (a != b) engine.add_edge(a, b, "R", 0.9f);
  }
  engine.vacuum();

  auto q = unit(oracle::random_vector(rng, 8));
  auto snapshot = engine.open_snapshot();
  auto hits = engine.vector_search(snapshot, Modality::text(), q, 10, 300);

  auto ast = parse(
      "VECTOR_SEARCH(text, $q, k=10, ef=300) TRAVERSE hops=2 "
      "SIMILARITY_WEIGHT v=1 g=0 RETURN TOP 10");
  auto results = engine.execute(engine.plan_query(ast), snapshot, {{"q", q}});
  REQUIRE(results.size() == hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i)
    CHECK(results[i].id == hits[i].id);
}

TEST_CASE("property filters restrict results") {
  HmgiEngine engine(quiet_config());
  engine.register_modality(Modality::text(), 4);
  std::mt19937_64 rng(88);
  for (int i = 0; i < 40; ++i) {
    std::map<std::string, PropertyValue> props;
    props["score"] = double(i);
    engine.add_node(i % 2 ? std::set<std::string>{"Odd"}
                          : std::set<std::string>{"Even"},
                    Modality::text(), unit(oracle::random_vector(rng, 4)),
                    props);
  }
  engine.vacuum();
  auto results = engine.run_query(
      "MATCH (n:Even) WHERE n.score < 10 "
      "VECTOR_SEARCH(text, $q, k=40, ef=40) RETURN TOP 40",
      {{"q", unit(oracle::random_vector(rng, 4))}});
  CHECK(results.size() == 5);  // ids 0,2,4,6,8
  for (const auto& r : results) {
    CHECK(r.id % 2 == 0);
    CHECK(r.id < 10);
  }
}

TEST_CASE("traversal-first and vector-first agree on the candidate set") {
  HmgiEngine engine(quiet_config());
  engine.register_modality(Modality::text(), 6);
  std::mt19937_64 rng(99);
  for (int i = 0; i < 60; ++i)
    engine.add_node({"S"}, Modality::text(), unit(oracle::random_vector(rng, 6)),
                    {});
  engine.vacuum();

  auto q = unit(oracle::random_vector(rng, 6));
  auto ast = parse(
      "MATCH (n:S) VECTOR_SEARCH(text, $q, k=60, ef=60) RETURN TOP 60");
  auto snapshot = engine.open_snapshot();
  auto vf = engine.execute(
      engine.plan_query(ast, PipelineOrder::VectorFirst), snapshot, {{"q", q}});
  auto tf = engine.execute(
      engine.plan_query(ast, PipelineOrder::TraversalFirst), snapshot,
      {{"q", q}});
  REQUIRE(vf.size() == tf.size());
  for (std::size_t i = 0; i < vf.size(); ++i) {
    CHECK(vf[i].id == tf[i].id);
    CHECK(vf[i].score == doctest::Approx(tf[i].score).epsilon(1e-5));
  }
}

TEST_CASE("progressive execution: budgets, rounds, and final answer") {
  HmgiEngine engine(quiet_config());
  engine.register_modality(Modality::text(), 8);
  std::mt19937_64 rng(111);
  for (int i = 0; i < 500; ++i)
    engine.add_node({}, Modality::text(), unit(oracle::random_vector(rng, 8)),
                    {});
  engine.vacuum();

  auto ast = parse("VECTOR_SEARCH(text, $q, k=10) RETURN TOP 10");
  auto plan = engine.plan_query(ast);
  auto q = unit(oracle::random_vector(rng, 8));
  auto snapshot = engine.open_snapshot();

  SUBCASE("huge budget runs the full schedule") {
    auto rounds = engine.execute_progressive(plan, snapshot, 1e9, {{"q", q}});
    REQUIRE(!rounds.empty());
    // Strictly increasing ef, last round at or beyond the live count.
    for (std::size_t i = 1; i < rounds.size(); ++i)
      CHECK(rounds[i].ef > rounds[i - 1].ef);
    CHECK(rounds.back().ef >= 500);
    // Final emission equals plain execute at the terminal ef.
    query::HybridQueryPlan final_plan = plan;
    final_plan.ast.vector.ef = rounds.back().ef;
    auto direct = engine.execute(final_plan, snapshot, {{"q", q}});
    REQUIRE(rounds.back().results.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i)
      CHECK(rounds.back().results[i].id == direct[i].id);
  }

  SUBCASE("tiny budget emits exactly one round at ef=32") {
    auto rounds =
        engine.execute_progressive(plan, snapshot, 1e-9, {{"q", q}});
    REQUIRE(rounds.size() == 1);
    CHECK(rounds[0].ef == 32);
  }

  SUBCASE("non-positive budget is rejected") {
    CHECK_THROWS_AS(engine.execute_progressive(plan, snapshot, 0.0, {{"q", q}}),
                    BudgetTooSmall);
  }
}

TEST_CASE("progressive recall is non-decreasing in most trials") {
  HmgiEngine engine(quiet_config());
  engine.register_modality(Modality::text(), 16);
  std::mt19937_64 rng(222);
  std::vector<std::pair<NodeId, std::vector<float>>> data;
  for (int i = 0; i < 2000; ++i) {
    auto v = unit(oracle::random_vector(rng, 16));
    data.emplace_back(i, v);
    engine.add_node({}, Modality::text(), v, {});
  }
  engine.vacuum();

  auto ast = parse("VECTOR_SEARCH(text, $q, k=10) RETURN TOP 10");
  auto plan = engine.plan_query(ast);
  int monotone = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    auto q = unit(oracle::random_vector(rng, 16));
    auto truth = oracle::brute_topk(data, q, 10);
    auto rounds =
        engine.execute_progressive(plan, engine.open_snapshot(), 1e9, {{"q", q}});
    bool ok = true;
    double prev = -1.0;
    for (const auto& round : rounds) {
      std::vector<NodeId> ids;
      for (const auto& r : round.results) ids.push_back(r.id);
      double rec = oracle::recall(ids, truth, 10);
      if (rec + 1e-12 < prev) ok = false;
      prev = rec;
    }
    if (ok) ++monotone;
  }
  CHECK(monotone >= 90);
}

TEST_CASE("community boost lifts same-community candidates") {
  EngineConfig config = quiet_config();
  config.community_boost = true;
  HmgiEngine engine(config);
  engine.register_modality(Modality::text(), 4);

  // Two clusters of 3; node 0's community mates should get boosted hops.
  auto v0 = unit({1.0f, 0.1f, 0.0f, 0.0f});
  for (int i = 0; i < 6; ++i) {
    auto v = unit({i < 3 ? 1.0f : -1.0f, 0.1f * (i + 1), 0.0f, 0.0f});
    engine.add_node({}, Modality::text(), v, {});
  }
  auto clique = [&](NodeId a, NodeId b, NodeId c) {
    engine.add_edge(a, b, "R", 0.5f);
    engine.add_edge(b, c, "R", 0.5f);
    engine.add_edge(c, a, "R", 0.5f);
    engine.add_edge(b, a, "R", 0.5f);
    engine.add_edge(c, b, "R", 0.5f);
    engine.add_edge(a, c, "R", 0.5f);
  };
  clique(0, 1, 2);
  clique(3, 4, 5);
  engine.vacuum();

  auto results = engine.run_query(
      "VECTOR_SEARCH(text, node(0), k=1, ef=6) TRAVERSE hops=1 "
      "SIMILARITY_WEIGHT v=0 g=1 RETURN TOP 6");
  // Seeds = {0}; reached = {1, 2} with raw hop score 0.5, boosted by 1.1.
  for (const auto& r : results) {
    if (r.id == 1 || r.id == 2)
      CHECK(r.score == doctest::Approx(0.55).epsilon(1e-6));
  }
}

TEST_CASE("auto weights degrade toward the graph side when hits are scarce") {
  HmgiEngine engine(quiet_config());
  engine.register_modality(Modality::text(), 4);
  engine.add_node({}, Modality::text(), unit({1, 0, 0, 0}), {});
  engine.add_node({}, Modality::text(), unit({0.9f, 0.1f, 0, 0}), {});
  engine.add_edge(0, 1, "R", 1.0f);
  engine.vacuum();

  // k=10 requested, only 2 found: auto w_v = 0.2.
  auto results = engine.run_query(
      "VECTOR_SEARCH(text, node(0), k=10, ef=2) TRAVERSE hops=1 "
      "SIMILARITY_WEIGHT auto RETURN TOP 2");
  REQUIRE(!results.empty());
  CHECK(results[0].id == 1);  // graph-heavy weighting favors the neighbor
}
