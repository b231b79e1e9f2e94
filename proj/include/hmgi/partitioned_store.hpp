#pragma once
// Partitioned vector side of the engine: one HNSW index plus one delta log
// per (modality, cluster) partition, a routing table backed by fitted
// K-means models, MVCC snapshots, vacuum, repartition migration and
// adaptive quantization.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "hmgi/delta_store.hpp"
#include "hmgi/hnsw.hpp"
#include "hmgi/partitioner.hpp"
#include "hmgi/quantizer.hpp"
#include "hmgi/types.hpp"

namespace hmgi {

struct PartitionInfo {
  PartitionId id = kInvalidPartition;
  Modality modality;
  std::uint32_t cluster = 0;
  std::uint32_t dim = 0;
};

// Per-query provenance: which partitions were probed and how many vectors
// they could have contributed.
struct QueryStats {
  std::vector<PartitionId> partitions_probed;
  std::uint64_t candidate_pool = 0;
  std::uint64_t stable_hits = 0;
  std::uint64_t delta_hits = 0;
};

struct VectorStoreConfig {
  HnswParams hnsw;
  QuantBits quant = QuantBits::None;   // width for new partitions
  bool partitioning = true;            // false: one shared partition
  bool use_delta = true;               // false: vacuum inline after stage
  bool auto_vacuum = true;
  double delta_watermark_fraction = 0.05;
  std::uint64_t delta_watermark_records = 50000;
  double tombstone_rebuild_fraction = 0.20;
  std::uint32_t max_merge_threads = 8;
  // Notified whenever an id's stable slot is (re)assigned, so the graph
  // layer can keep EmbeddingRefs current.
  std::function<void(NodeId, EmbeddingRef)> ref_callback;
};

class PartitionedVectorStore {
 public:
  explicit PartitionedVectorStore(VectorStoreConfig config = {});

  const VectorStoreConfig& config() const { return config_; }
  SnapshotRegistry& registry() { return registry_; }

  void attach_log(const std::string& path) { log_ = DeltaLog(path); }

  // Staging. Embeddings must be normalized by the caller. Returns the
  // commit version. slot_out receives the EmbeddingRef for the payload.
  Version stage_insert(NodeId id, const Modality& modality,
                       std::vector<float> embedding,
                       EmbeddingRef* ref_out = nullptr);
  Version stage_update(NodeId id, std::vector<float> embedding);
  Version stage_delete(NodeId id);

  bool contains(NodeId id) const;
  std::optional<std::vector<float>> current_embedding(NodeId id) const;
  // Embedding visible to a snapshot, honoring delta overrides and
  // migration; nullopt when the id is invisible or deleted at that cut.
  std::optional<std::vector<float>> embedding_at(const SnapshotRef& snapshot,
                                                 NodeId id) const;
  std::optional<PartitionId> partition_of(NodeId id) const;
  // Up to cap stored embeddings of one modality (stable first, then delta).
  std::vector<std::vector<float>> sample_embeddings(const Modality& modality,
                                                    std::size_t cap) const;

  SnapshotRef open_snapshot() { return registry_.open(); }

  // Stable-plus-delta top-k over the partitions of one modality (or all
  // partitions when modality is nullopt). Query must be normalized and of
  // the partitions' dimension.
  std::vector<SearchHit> hybrid_topk(const SnapshotRef& snapshot,
                                     const std::optional<Modality>& modality,
                                     std::span<const float> query,
                                     std::uint32_t k,
                                     std::optional<std::uint32_t> ef = {},
                                     QueryStats* stats = nullptr) const;

  MergeReport vacuum(std::uint64_t max_batch);
  MergeReport vacuum_partition(PartitionId p, std::uint64_t max_batch);
  // Distributes per-partition vacuums over a worker budget.
  MergeReport vacuum_parallel(std::uint64_t max_batch, double cpu_load);

  // K-means routing models.
  void install_model(const PartitionModel& model);
  std::optional<PartitionModel> model_of(const Modality& modality) const;
  void apply_repartition(const Modality& modality, const RepartitionPlan& plan);

  void requantize_partition(PartitionId p, QuantBits bits);
  void requantize_all(QuantBits bits);

  std::vector<PartitionInfo> partitions() const;
  std::uint64_t live_vector_count(
      const std::optional<Modality>& modality = std::nullopt) const;
  std::uint64_t delta_record_count() const;
  std::size_t embedding_payload_bytes() const;

  // (node id, embedding) pairs of the logical state under a snapshot, for
  // oracle rebuilds and repartition refits.
  std::vector<std::pair<NodeId, std::vector<float>>> logical_entries(
      const SnapshotRef& snapshot,
      const std::optional<Modality>& modality = std::nullopt) const;

  // Persistence: per-partition index files plus a JSON state blob the
  // engine embeds in its manifest. The delta log is rewritten to the
  // still-unapplied records.
  std::string save(const std::string& dir) const;
  static std::unique_ptr<PartitionedVectorStore> load(const std::string& dir,
                                                      const std::string& state_json,
                                                      VectorStoreConfig config);

 private:
  struct Partition {
    PartitionInfo info;
    HnswIndex stable;
    PartitionDelta delta;
    // Stable entries that only some snapshots may see: id -> visible_from.
    std::unordered_map<NodeId, Version> visible_from;
    mutable std::shared_mutex data_mu;
    std::mutex vacuum_mu;
  };

  PartitionId ensure_partition_locked(const Modality& modality,
                                      std::uint32_t cluster, std::uint32_t dim);
  PartitionId route_locked(const Modality& modality,
                           std::span<const float> embedding);
  Version stage_record_locked(PartitionId p, DeltaRecord rec);
  void maybe_auto_vacuum(PartitionId p);
  MergeReport vacuum_one(Partition& part, std::uint64_t max_batch);
  std::vector<PartitionId> target_partitions(
      const std::optional<Modality>& modality) const;

  VectorStoreConfig config_;
  SnapshotRegistry registry_;
  DeltaLog log_;
  bool log_attached_() const { return !log_.path().empty(); }

  mutable std::shared_mutex topo_mu_;  // partition table, models, locator
  std::vector<std::unique_ptr<Partition>> parts_;
  std::map<std::pair<std::string, std::uint32_t>, PartitionId> by_key_;
  std::map<std::string, PartitionModel> models_;  // keyed by modality name
  std::unordered_map<NodeId, PartitionId> locator_;
  std::mutex commit_mu_;
};

}  // namespace hmgi
