#pragma once
// Embeddable engine facade: property graph plus partitioned vector indexes
// behind MVCC snapshots, the hybrid query pipeline, partition maintenance,
// adaptive quantization and the parameter tuner.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hmgi/graph_store.hpp"
#include "hmgi/partitioned_store.hpp"
#include "hmgi/query/cost.hpp"
#include "hmgi/query/executor.hpp"
#include "hmgi/quantizer.hpp"
#include "hmgi/tuner.hpp"

namespace hmgi {

struct EngineConfig {
  VectorStoreConfig vectors;
  bool fusion = true;
  bool community_boost = true;
  double community_epsilon = 0.1;
  query::CostCoefficients cost;
  bool tuner_enabled = false;
  std::uint32_t kmeans_k = 2;
  double rebalance_threshold = kDefaultImbalanceThreshold;
  std::size_t workload_window = 256;
  std::uint64_t seed = 42;

  std::string to_json() const;
  static EngineConfig from_json(const std::string& text);
};

struct ProgressiveRound {
  std::vector<query::FusedResult> results;
  std::uint32_t ef = 0;
  double elapsed_ms = 0.0;
};

using ParamMap = std::map<std::string, std::vector<float>>;

class HmgiEngine {
 public:
  explicit HmgiEngine(EngineConfig config = {});

  const EngineConfig& config() const { return config_; }
  GraphStore& graph() { return graph_; }
  const GraphStore& graph() const { return graph_; }
  PartitionedVectorStore& vectors() { return *vectors_; }
  const PartitionedVectorStore& vectors() const { return *vectors_; }

  // Durable staging: attach before ingesting.
  void attach_delta_log(const std::string& path) { vectors_->attach_log(path); }

  void register_modality(const Modality& m, std::uint32_t dim);

  NodeId add_node(std::set<std::string> labels, const Modality& modality,
                  std::optional<std::vector<float>> embedding,
                  std::map<std::string, PropertyValue> properties);
  void add_edge(NodeId src, NodeId dst, const std::string& type, float weight);
  void remove_node(NodeId id);
  void update_embedding(NodeId id, std::vector<float> embedding);

  SnapshotRef open_snapshot() { return vectors_->open_snapshot(); }

  // Raw vector search (dimension-adjusted, normalized) over one modality.
  std::vector<SearchHit> vector_search(const SnapshotRef& snapshot,
                                       const Modality& modality,
                                       std::span<const float> raw_query,
                                       std::uint32_t k,
                                       std::optional<std::uint32_t> ef = {},
                                       QueryStats* stats = nullptr);

  query::Catalog catalog(
      const std::optional<std::string>& label = std::nullopt) const;
  query::HybridQueryPlan plan_query(
      const query::HybridQueryAst& ast,
      std::optional<query::PipelineOrder> force = std::nullopt) const;

  std::vector<query::FusedResult> execute(const query::HybridQueryPlan& plan,
                                          const SnapshotRef& snapshot,
                                          const ParamMap& params = {},
                                          QueryStats* stats = nullptr);

  std::vector<ProgressiveRound> execute_progressive(
      const query::HybridQueryPlan& plan, const SnapshotRef& snapshot,
      double budget_ms, const ParamMap& params = {});

  // parse + plan + execute under a fresh snapshot.
  std::vector<query::FusedResult> run_query(const std::string& text,
                                            const ParamMap& params = {});

  // Partition maintenance.
  void fit_all_partitions(std::uint32_t k, std::uint64_t seed);
  std::optional<RepartitionPlan> check_rebalance_for(const Modality& modality);
  void apply_rebalance(const Modality& modality, const RepartitionPlan& plan);

  MergeReport vacuum(std::uint64_t max_batch = UINT64_MAX);
  MergeReport vacuum_adaptive(double cpu_load);

  void requantize(QuantBits bits);
  // Runs the hysteresis controller on a load probe; requantizes on change.
  QuantBits adaptive_quant_step(double load);

  // Tuner.
  void set_tuner_model(TunerModel model);
  bool has_tuner_model() const { return tuner_.has_value(); }
  WorkloadFeatures features_for(const Modality& modality) const;
  ParamPrediction predict_for(const Modality& modality) const;

  // Cached Louvain communities; invalidated by graph mutations.
  std::unordered_map<NodeId, std::uint32_t> communities() const;

  void save(const std::string& dir);
  static std::unique_ptr<HmgiEngine> load(const std::string& dir);

 private:
  std::vector<float> resolve_query_vector(const query::HybridQueryAst& ast,
                                          const ParamMap& params,
                                          const SnapshotRef& snapshot) const;
  std::vector<float> prepare_query(std::span<const float> raw,
                                   const Modality& modality) const;
  bool node_passes_filters(NodeId id, const query::HybridQueryAst& ast) const;
  std::vector<query::FusedResult> execute_vector_first(
      const query::HybridQueryPlan& plan, const SnapshotRef& snapshot,
      const ParamMap& params, QueryStats* stats);
  std::vector<query::FusedResult> execute_traversal_first(
      const query::HybridQueryPlan& plan, const SnapshotRef& snapshot,
      const ParamMap& params, QueryStats* stats);
  std::vector<query::FusedResult> fuse_and_rank(
      const query::HybridQueryAst& ast,
      std::vector<std::pair<NodeId, double>> scored_hits,
      const std::vector<ReachedNode>& reached, const SnapshotRef& snapshot,
      std::uint32_t found_hits);
  void record_workload(const Modality& modality, std::span<const float> query,
                       double raw_norm, std::uint32_t k, double latency_ms);
  void invalidate_communities();

  EngineConfig config_;
  GraphStore graph_;
  std::unique_ptr<PartitionedVectorStore> vectors_;
  std::optional<TunerModel> tuner_;
  AdaptiveQuantController quant_controller_;

  mutable std::mutex cache_mu_;
  mutable std::optional<std::unordered_map<NodeId, std::uint32_t>> communities_;

  mutable std::mutex workload_mu_;
  std::map<std::string, WorkloadStats> workload_;
  std::map<std::string, std::vector<QueryObservation>> query_window_;
};

}  // namespace hmgi
