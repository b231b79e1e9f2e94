#include "hmgi/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hmgi/query/executor.hpp"

namespace hmgi {

namespace {

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch())
      .count();
}

double raw_norm(std::span<const float> v) {
  double acc = 0.0;
  for (float x : v) acc += double{x} * x;
  return std::sqrt(acc);
}

bool compare_values(const PropertyValue& lhs, query::CompareOp op,
                    const PropertyValue& rhs) {
  using query::CompareOp;
  auto numeric = [](const PropertyValue& v, double* out) {
    if (std::holds_alternative<std::int64_t>(v)) {
      *out = static_cast<double>(std::get<std::int64_t>(v));
      return true;
    }
    if (std::holds_alternative<double>(v)) {
      *out = std::get<double>(v);
      return true;
    }
    return false;
  };
  double a, b;
  if (numeric(lhs, &a) && numeric(rhs, &b)) {
    switch (op) {
      case CompareOp::Eq: return a == b;
      case CompareOp::Ne: return a != b;
      case CompareOp::Lt: return a < b;
      case CompareOp::Le: return a <= b;
      case CompareOp::Gt: return a > b;
      case CompareOp::Ge: return a >= b;
    }
  }
  if (std::holds_alternative<std::string>(lhs) &&
      std::holds_alternative<std::string>(rhs)) {
    const auto& sa = std::get<std::string>(lhs);
    const auto& sb = std::get<std::string>(rhs);
    switch (op) {
      case CompareOp::Eq: return sa == sb;
      case CompareOp::Ne: return sa != sb;
      case CompareOp::Lt: return sa < sb;
      case CompareOp::Le: return sa <= sb;
      case CompareOp::Gt: return sa > sb;
      case CompareOp::Ge: return sa >= sb;
    }
  }
  if (std::holds_alternative<bool>(lhs) && std::holds_alternative<bool>(rhs)) {
    bool ba = std::get<bool>(lhs);
    bool bb = std::get<bool>(rhs);
    if (op == CompareOp::Eq) return ba == bb;
    if (op == CompareOp::Ne) return ba != bb;
  }
  return false;
}

}  // namespace

HmgiEngine::HmgiEngine(EngineConfig config)
    : config_(std::move(config)),
      quant_controller_(MemoryPolicy{}, config_.vectors.quant == QuantBits::None
                                            ? QuantBits::B16
                                            : config_.vectors.quant) {
  VectorStoreConfig vc = config_.vectors;
  vc.ref_callback = [this](NodeId id, EmbeddingRef ref) {
    if (graph_.has_node(id)) graph_.set_embedding_ref(id, ref);
  };
  vectors_ = std::make_unique<PartitionedVectorStore>(std::move(vc));
}

void HmgiEngine::register_modality(const Modality& m, std::uint32_t dim) {
  graph_.register_modality(m, dim);
}

NodeId HmgiEngine::add_node(std::set<std::string> labels,
                            const Modality& modality,
                            std::optional<std::vector<float>> embedding,
                            std::map<std::string, PropertyValue> properties) {
  NodeId id = graph_.add_node(std::move(labels), modality, embedding,
                              std::move(properties));
  if (embedding.has_value()) {
    std::vector<float> normalized = std::move(*embedding);
    normalize_vector(normalized);
    EmbeddingRef ref;
    vectors_->stage_insert(id, modality, std::move(normalized), &ref);
    graph_.set_embedding_ref(id, ref);
  }
  invalidate_communities();
  return id;
}

void HmgiEngine::add_edge(NodeId src, NodeId dst, const std::string& type,
                          float weight) {
  graph_.add_edge(src, dst, type, weight);
  invalidate_communities();
}

void HmgiEngine::remove_node(NodeId id) {
  GraphNode node = graph_.node(id);  // throws UnknownId when missing
  if (vectors_->contains(id)) vectors_->stage_delete(id);
  graph_.remove_node(id);
  invalidate_communities();
}

void HmgiEngine::update_embedding(NodeId id, std::vector<float> embedding) {
  GraphNode node = graph_.node(id);
  auto dim = graph_.modality_dim(node.modality);
  if (!dim.has_value()) throw UnknownModality(node.modality.name());
  if (embedding.size() != *dim)
    throw DimensionMismatch("embedding length " +
                            std::to_string(embedding.size()) +
                            " != registered dim " + std::to_string(*dim));
  normalize_vector(embedding);
  if (vectors_->contains(id)) {
    vectors_->stage_update(id, std::move(embedding));
  } else {
    EmbeddingRef ref;
    vectors_->stage_insert(id, node.modality, std::move(embedding), &ref);
    graph_.set_embedding_ref(id, ref);
  }
}

std::vector<float> HmgiEngine::prepare_query(std::span<const float> raw,
                                             const Modality& modality) const {
  auto dim = graph_.modality_dim(modality);
  if (!dim.has_value()) throw UnknownModality(modality.name());
  return query::adjust_dimension(raw, *dim);
}

std::vector<SearchHit> HmgiEngine::vector_search(
    const SnapshotRef& snapshot, const Modality& modality,
    std::span<const float> raw_query, std::uint32_t k,
    std::optional<std::uint32_t> ef, QueryStats* stats) {
  const double norm = raw_norm(raw_query);
  std::vector<float> q = prepare_query(raw_query, modality);
  const double t0 = now_ms();
  auto hits = vectors_->hybrid_topk(snapshot, modality, q, k, ef, stats);
  record_workload(modality, q, norm, k, now_ms() - t0);
  return hits;
}

query::Catalog HmgiEngine::catalog(
    const std::optional<std::string>& label) const {
  query::Catalog cat;
  for (const auto& [modality, dim] : graph_.modalities()) {
    cat.dim_per_modality[modality.name()] = dim;
    cat.vectors_per_modality[modality.name()] =
        vectors_->live_vector_count(modality);
    cat.partitions_per_modality[modality.name()] = 0;
  }
  for (const PartitionInfo& info : vectors_->partitions()) {
    auto it = cat.partitions_per_modality.find(info.modality.name());
    if (it != cat.partitions_per_modality.end()) ++it->second;
  }
  cat.total_nodes = graph_.live_node_count();
  if (label.has_value())
    cat.label_counts[*label] = graph_.nodes_with_label(*label).size();
  return cat;
}

query::HybridQueryPlan HmgiEngine::plan_query(
    const query::HybridQueryAst& ast,
    std::optional<query::PipelineOrder> force) const {
  return query::plan(ast, catalog(ast.pattern.label), config_.cost, force);
}

std::vector<float> HmgiEngine::resolve_query_vector(
    const query::HybridQueryAst& ast, const ParamMap& params,
    const SnapshotRef& snapshot) const {
  const query::VectorSource& src = ast.vector.source;
  if (std::holds_alternative<std::vector<float>>(src))
    return std::get<std::vector<float>>(src);
  if (std::holds_alternative<std::string>(src)) {
    const std::string& name = std::get<std::string>(src);
    auto it = params.find(name);
    if (it == params.end())
      throw ParameterError("query parameter $" + name + " not bound");
    return it->second;
  }
  NodeId ref = std::get<NodeId>(src);
  auto emb = vectors_->embedding_at(snapshot, ref);
  if (!emb.has_value())
    throw UnknownId("node(" + std::to_string(ref) + ") has no visible embedding");
  return *emb;
}

bool HmgiEngine::node_passes_filters(NodeId id,
                                     const query::HybridQueryAst& ast) const {
  if (!ast.pattern.label && ast.pattern.equals.empty() &&
      ast.predicates.empty())
    return true;
  if (!graph_.has_node(id)) return false;
  GraphNode node = graph_.node(id);
  if (ast.pattern.label && node.labels.count(*ast.pattern.label) == 0)
    return false;
  for (const auto& [key, want] : ast.pattern.equals) {
    auto it = node.properties.find(key);
    if (it == node.properties.end() ||
        !compare_values(it->second, query::CompareOp::Eq, want))
      return false;
  }
  for (const query::PropertyPredicate& pred : ast.predicates) {
    auto it = node.properties.find(pred.property);
    if (it == node.properties.end() ||
        !compare_values(it->second, pred.op, pred.value))
      return false;
  }
  return true;
}

std::vector<query::FusedResult> HmgiEngine::fuse_and_rank(
    const query::HybridQueryAst& ast,
    std::vector<std::pair<NodeId, double>> scored_hits,
    const std::vector<ReachedNode>& reached, const SnapshotRef& snapshot,
    std::uint32_t found_hits) {
  double w_v = ast.w_v;
  double w_g = ast.w_g;
  if (!config_.fusion) {
    w_v = 1.0;
    w_g = 0.0;
  } else if (ast.auto_weights) {
    w_v = ast.vector.k == 0
              ? 0.0
              : static_cast<double>(found_hits) / ast.vector.k;
    w_v = std::clamp(w_v, 0.0, 1.0);
    w_g = 1.0 - w_v;
  }

  struct Candidate {
    double d_v = 1.0;
    std::vector<double> hop_scores;
  };
  std::map<NodeId, Candidate> candidates;
  for (const auto& [id, d_v] : scored_hits) candidates[id].d_v = d_v;
  for (const ReachedNode& r : reached) {
    Candidate& c = candidates[r.id];
    c.hop_scores.assign(r.hop_scores.begin(), r.hop_scores.end());
  }

  // Community boost: candidates sharing a Louvain community with any seed
  // get each hop score scaled by (1 + epsilon).
  std::unordered_map<NodeId, std::uint32_t> comms;
  if (config_.community_boost && config_.fusion && ast.traverse.hops > 0 &&
      w_g > 0.0 && !reached.empty()) {
    comms = communities();
    std::set<std::uint32_t> seed_comms;
    for (const auto& [id, d_v] : scored_hits) {
      auto it = comms.find(id);
      if (it != comms.end()) seed_comms.insert(it->second);
    }
    for (auto& [id, cand] : candidates) {
      if (cand.hop_scores.empty()) continue;
      auto it = comms.find(id);
      if (it == comms.end() || seed_comms.count(it->second) == 0) continue;
      for (double& s : cand.hop_scores) s *= 1.0 + config_.community_epsilon;
    }
  }

  std::vector<query::FusedResult> out;
  out.reserve(candidates.size());
  for (auto& [id, cand] : candidates) {
    if (!node_passes_filters(id, ast)) continue;
    query::FusedResult r;
    r.id = id;
    r.d_v = cand.d_v;
    r.hop_scores = std::move(cand.hop_scores);
    r.score = query::fuse_score(r.d_v, r.hop_scores, w_v, w_g);
    if (!comms.empty()) {
      auto it = comms.find(id);
      if (it != comms.end()) r.community = it->second;
    }
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), query::fused_order);
  if (out.size() > ast.top_n) out.resize(ast.top_n);
  return out;
}

std::vector<query::FusedResult> HmgiEngine::execute_vector_first(
    const query::HybridQueryPlan& plan, const SnapshotRef& snapshot,
    const ParamMap& params, QueryStats* stats) {
  const query::HybridQueryAst& ast = plan.ast;
  std::vector<float> raw = resolve_query_vector(ast, params, snapshot);
  const double norm = raw_norm(raw);
  std::vector<float> q = prepare_query(raw, ast.vector.modality);

  std::optional<std::uint32_t> ef = ast.vector.ef;
  if (!ef.has_value() && config_.tuner_enabled && tuner_.has_value())
    ef = predict_for(ast.vector.modality).ef;

  const double t0 = now_ms();
  auto hits =
      vectors_->hybrid_topk(snapshot, ast.vector.modality, q, ast.vector.k,
                            ef, stats);
  record_workload(ast.vector.modality, q, norm, ast.vector.k, now_ms() - t0);

  std::vector<std::pair<NodeId, double>> scored;
  scored.reserve(hits.size());
  std::vector<NodeId> seeds;
  seeds.reserve(hits.size());
  for (const SearchHit& h : hits) {
    scored.emplace_back(h.id, h.distance);
    seeds.push_back(h.id);
  }

  std::vector<ReachedNode> reached;
  const bool graph_stage = config_.fusion && ast.w_g > 0.0 &&
                           ast.traverse.hops > 0 && !seeds.empty();
  if (graph_stage)
    reached = graph_.traverse_khop(seeds, ast.traverse.hops,
                                   ast.traverse.types, ast.traverse.dir);

  return fuse_and_rank(ast, std::move(scored), reached, snapshot,
                       static_cast<std::uint32_t>(hits.size()));
}

std::vector<query::FusedResult> HmgiEngine::execute_traversal_first(
    const query::HybridQueryPlan& plan, const SnapshotRef& snapshot,
    const ParamMap& params, QueryStats* stats) {
  const query::HybridQueryAst& ast = plan.ast;
  std::vector<float> raw = resolve_query_vector(ast, params, snapshot);
  std::vector<float> q = prepare_query(raw, ast.vector.modality);

  // Seed set from the MATCH pattern.
  std::vector<NodeId> seeds;
  if (ast.pattern.label) {
    seeds = graph_.nodes_with_label(*ast.pattern.label);
  } else {
    seeds = graph_.node_ids();
  }
  std::erase_if(seeds, [&](NodeId id) { return !node_passes_filters(id, ast); });

  std::vector<ReachedNode> reached;
  if (ast.traverse.hops > 0 && !seeds.empty())
    reached = graph_.traverse_khop(seeds, ast.traverse.hops,
                                   ast.traverse.types, ast.traverse.dir);

  // Vector rerank over the relational pool.
  std::vector<std::pair<NodeId, double>> scored;
  std::uint32_t found = 0;
  auto score_node = [&](NodeId id) {
    if (!graph_.has_node(id)) return;
    GraphNode node = graph_.node(id);
    if (node.modality != ast.vector.modality) return;
    auto emb = vectors_->embedding_at(snapshot, id);
    if (!emb.has_value()) return;
    double dot = 0.0;
    for (std::size_t i = 0; i < emb->size() && i < q.size(); ++i)
      dot += double{(*emb)[i]} * q[i];
    scored.emplace_back(id, std::clamp(1.0 - dot, 0.0, 2.0));
    ++found;
  };
  for (NodeId id : seeds) score_node(id);
  for (const ReachedNode& r : reached) score_node(r.id);

  if (stats != nullptr) {
    stats->candidate_pool = seeds.size() + reached.size();
    stats->stable_hits = scored.size();
  }
  return fuse_and_rank(ast, std::move(scored), reached, snapshot, found);
}

std::vector<query::FusedResult> HmgiEngine::execute(
    const query::HybridQueryPlan& plan, const SnapshotRef& snapshot,
    const ParamMap& params, QueryStats* stats) {
  if (plan.order == query::PipelineOrder::TraversalFirst)
    return execute_traversal_first(plan, snapshot, params, stats);
  return execute_vector_first(plan, snapshot, params, stats);
}

std::vector<ProgressiveRound> HmgiEngine::execute_progressive(
    const query::HybridQueryPlan& plan, const SnapshotRef& snapshot,
    double budget_ms, const ParamMap& params) {
  if (budget_ms <= 0.0)
    throw BudgetTooSmall("budget " + std::to_string(budget_ms) + " ms");
  const std::uint64_t live =
      vectors_->live_vector_count(plan.ast.vector.modality);
  const auto start = std::chrono::steady_clock::now();
  std::vector<ProgressiveRound> rounds;
  std::uint32_t ef = 32;
  while (true) {
    query::HybridQueryPlan round_plan = plan;
    round_plan.ast.vector.ef = ef;
    ProgressiveRound round;
    round.ef = ef;
    round.results = execute(round_plan, snapshot, params);
    round.elapsed_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    rounds.push_back(std::move(round));
    if (rounds.back().elapsed_ms >= budget_ms) break;
    if (ef >= live) break;
    ef *= 2;
  }
  return rounds;
}

std::vector<query::FusedResult> HmgiEngine::run_query(const std::string& text,
                                                      const ParamMap& params) {
  query::HybridQueryAst ast = query::parse(text);
  query::HybridQueryPlan plan = plan_query(ast);
  SnapshotRef snapshot = open_snapshot();
  return execute(plan, snapshot, params);
}

void HmgiEngine::fit_all_partitions(std::uint32_t k, std::uint64_t seed) {
  if (!config_.vectors.partitioning) return;
  SnapshotRef snapshot = open_snapshot();
  for (const auto& [modality, dim] : graph_.modalities()) {
    auto population = vectors_->logical_entries(snapshot, modality);
    if (population.empty()) continue;
    const std::uint32_t k_eff =
        std::min<std::uint32_t>(k, static_cast<std::uint32_t>(population.size()));
    std::vector<std::vector<float>> sample;
    sample.reserve(std::min<std::size_t>(population.size(), kRefitSampleCap));
    for (std::size_t i = 0; i < population.size() && i < kRefitSampleCap; ++i)
      sample.push_back(population[i].second);

    RepartitionPlan plan;
    auto current = vectors_->model_of(modality);
    plan.base_model_version = current ? current->model_version : 0;
    plan.refit = fit_partitions(sample, k_eff, seed, modality);
    plan.refit.model_version = plan.base_model_version + 1;

    auto infos = vectors_->partitions();
    std::map<PartitionId, std::uint32_t> cluster_of;
    for (const PartitionInfo& info : infos) cluster_of[info.id] = info.cluster;
    for (const auto& [id, emb] : population) {
      std::uint32_t new_c = assign_partition(emb, plan.refit);
      auto p = vectors_->partition_of(id);
      std::uint32_t old_c = p.has_value() ? cluster_of[*p] : 0;
      if (!p.has_value() || old_c != new_c)
        plan.moves.emplace_back(id, old_c, new_c);
    }
    vectors_->apply_repartition(modality, plan);
  }
}

std::optional<RepartitionPlan> HmgiEngine::check_rebalance_for(
    const Modality& modality) {
  auto model = vectors_->model_of(modality);
  if (!model.has_value()) return std::nullopt;
  std::lock_guard lock(workload_mu_);
  auto it = workload_.find(modality.name());
  if (it == workload_.end() || !it->second.window_full()) return std::nullopt;
  SnapshotRef snapshot = open_snapshot();
  auto population = vectors_->logical_entries(snapshot, modality);
  return check_rebalance(it->second, config_.rebalance_threshold, *model,
                         population, config_.seed);
}

void HmgiEngine::apply_rebalance(const Modality& modality,
                                 const RepartitionPlan& plan) {
  vectors_->apply_repartition(modality, plan);
}

MergeReport HmgiEngine::vacuum(std::uint64_t max_batch) {
  return vectors_->vacuum(max_batch);
}

MergeReport HmgiEngine::vacuum_adaptive(double cpu_load) {
  return vectors_->vacuum_parallel(UINT64_MAX, cpu_load);
}

void HmgiEngine::requantize(QuantBits bits) { vectors_->requantize_all(bits); }

QuantBits HmgiEngine::adaptive_quant_step(double load) {
  QuantBits before = quant_controller_.current();
  QuantBits now = quant_controller_.observe(load);
  if (now != before) vectors_->requantize_all(now);
  return now;
}

void HmgiEngine::set_tuner_model(TunerModel model) {
  tuner_ = std::move(model);
}

WorkloadFeatures HmgiEngine::features_for(const Modality& modality) const {
  auto sample = vectors_->sample_embeddings(modality, 10000);
  auto dim = graph_.modality_dim(modality);
  std::vector<QueryObservation> window;
  {
    std::lock_guard lock(workload_mu_);
    auto it = query_window_.find(modality.name());
    if (it != query_window_.end()) window = it->second;
  }
  return extract_features(sample, dim.value_or(0),
                          vectors_->live_vector_count(modality), window);
}

ParamPrediction HmgiEngine::predict_for(const Modality& modality) const {
  return predict_params(features_for(modality),
                        tuner_.has_value() ? &*tuner_ : nullptr);
}

std::unordered_map<NodeId, std::uint32_t> HmgiEngine::communities() const {
  std::lock_guard lock(cache_mu_);
  if (!communities_.has_value()) communities_ = graph_.detect_communities();
  return *communities_;
}

void HmgiEngine::invalidate_communities() {
  std::lock_guard lock(cache_mu_);
  communities_.reset();
}

void HmgiEngine::record_workload(const Modality& modality,
                                 std::span<const float> query, double norm,
                                 std::uint32_t k, double latency_ms) {
  std::lock_guard lock(workload_mu_);
  auto model = vectors_->model_of(modality);
  std::uint32_t clusters = model ? model->k : 1;
  auto [it, inserted] = workload_.try_emplace(
      modality.name(), clusters, config_.workload_window);
  if (it->second.clusters() != clusters) {
    it->second = WorkloadStats(clusters, config_.workload_window);
  }
  std::uint32_t cluster = model ? assign_partition(query, *model) : 0;
  it->second.record(cluster, latency_ms);

  auto& window = query_window_[modality.name()];
  window.push_back(QueryObservation{norm, k});
  if (window.size() > config_.workload_window)
    window.erase(window.begin(),
                 window.begin() + (window.size() - config_.workload_window));
}

std::string EngineConfig::to_json() const {
  nlohmann::json j;
  j["hnsw"] = {{"M", vectors.hnsw.M},
               {"ef_construction", vectors.hnsw.ef_construction},
               {"ef_search", vectors.hnsw.ef_search},
               {"seed", vectors.hnsw.seed}};
  j["quant"] = static_cast<int>(vectors.quant);
  j["partitioning"] = vectors.partitioning;
  j["use_delta"] = vectors.use_delta;
  j["auto_vacuum"] = vectors.auto_vacuum;
  j["fusion"] = fusion;
  j["community_boost"] = community_boost;
  j["community_epsilon"] = community_epsilon;
  j["cost"] = {{"alpha", cost.alpha}, {"beta", cost.beta}, {"gamma", cost.gamma}};
  j["tuner"] = tuner_enabled;
  j["kmeans_k"] = kmeans_k;
  j["rebalance_threshold"] = rebalance_threshold;
  j["workload_window"] = workload_window;
  j["seed"] = seed;
  return j.dump();
}

EngineConfig EngineConfig::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  EngineConfig c;
  c.vectors.hnsw.M = j.at("hnsw").at("M").get<std::uint32_t>();
  c.vectors.hnsw.ef_construction =
      j.at("hnsw").at("ef_construction").get<std::uint32_t>();
  c.vectors.hnsw.ef_search = j.at("hnsw").at("ef_search").get<std::uint32_t>();
  c.vectors.hnsw.seed = j.at("hnsw").at("seed").get<std::uint64_t>();
  c.vectors.quant = static_cast<QuantBits>(j.at("quant").get<int>());
  c.vectors.partitioning = j.at("partitioning").get<bool>();
  c.vectors.use_delta = j.at("use_delta").get<bool>();
  c.vectors.auto_vacuum = j.at("auto_vacuum").get<bool>();
  c.fusion = j.at("fusion").get<bool>();
  c.community_boost = j.at("community_boost").get<bool>();
  c.community_epsilon = j.at("community_epsilon").get<double>();
  c.cost.alpha = j.at("cost").at("alpha").get<double>();
  c.cost.beta = j.at("cost").at("beta").get<double>();
  c.cost.gamma = j.at("cost").at("gamma").get<double>();
  c.tuner_enabled = j.at("tuner").get<bool>();
  c.kmeans_k = j.at("kmeans_k").get<std::uint32_t>();
  c.rebalance_threshold = j.at("rebalance_threshold").get<double>();
  c.workload_window = j.at("workload_window").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void HmgiEngine::save(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoFailure("cannot create " + dir + ": " + ec.message());

  graph_.save_snapshot(dir + "/graph.hmgi");
  std::string vec_state = vectors_->save(dir);

  nlohmann::json manifest;
  manifest["format"] = 1;
  manifest["config"] = nlohmann::json::parse(config_.to_json());
  manifest["vectors"] = nlohmann::json::parse(vec_state);
  if (tuner_.has_value()) {
    tuner_->save(dir + "/tuner.model");
    manifest["tuner_model"] = "tuner.model";
  }
  const std::string tmp = dir + "/manifest.json.tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + tmp);
    f << manifest.dump(2) << "\n";
  }
  if (std::rename(tmp.c_str(), (dir + "/manifest.json").c_str()) != 0)
    throw IoFailure("cannot move manifest into place");
}

std::unique_ptr<HmgiEngine> HmgiEngine::load(const std::string& dir) {
  std::ifstream f(dir + "/manifest.json");
  if (!f) throw IoFailure("cannot open " + dir + "/manifest.json");
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  nlohmann::json manifest = nlohmann::json::parse(text, nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("format"))
    throw FormatVersionMismatch("manifest.json is not a valid manifest");
  if (manifest.at("format").get<int>() != 1)
    throw FormatVersionMismatch("unsupported manifest format");

  EngineConfig config = EngineConfig::from_json(manifest.at("config").dump());
  auto engine = std::make_unique<HmgiEngine>(config);
  engine->graph_ = GraphStore::load_snapshot(dir + "/graph.hmgi");

  VectorStoreConfig vc = config.vectors;
  HmgiEngine* raw = engine.get();
  vc.ref_callback = [raw](NodeId id, EmbeddingRef ref) {
    if (raw->graph_.has_node(id)) raw->graph_.set_embedding_ref(id, ref);
  };
  engine->vectors_ = PartitionedVectorStore::load(
      dir, manifest.at("vectors").dump(), std::move(vc));
  engine->vectors_->attach_log(dir + "/delta.log");
  if (manifest.contains("tuner_model"))
    engine->tuner_ = TunerModel::load(dir + "/tuner.model");
  return engine;
}

}  // namespace hmgi
