#pragma once
// Property-graph storage: nodes carrying modality-tagged embedding refs and
// metadata, typed weighted edges (multigraph across types), k-hop traversal
// with best-path hop scores, Louvain communities, sectioned snapshots.
//
// Concurrency: many readers, single writer (shared_mutex). Node ids are
// append-only; deletion tombstones the slot and ids are never reused.

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "hmgi/errors.hpp"
#include "hmgi/types.hpp"

namespace hmgi {

enum class Direction : std::uint8_t { Out, In, Both };

struct GraphNode {
  NodeId id = kInvalidNode;
  std::set<std::string> labels;
  Modality modality;
  std::optional<EmbeddingRef> embedding;
  std::map<std::string, PropertyValue> properties;
};

// A node reached by traverse_khop: the per-hop edge weights of the best
// path to it (max mean weight, ties by lexicographically smallest node-id
// path). hop_scores.size() is the node's hop distance from the start set.
struct ReachedNode {
  NodeId id = kInvalidNode;
  std::vector<float> hop_scores;
};

class GraphStore {
 public:
  GraphStore() = default;
  GraphStore(GraphStore&& o) noexcept { move_from(std::move(o)); }
  GraphStore& operator=(GraphStore&& o) noexcept {
    if (this != &o) move_from(std::move(o));
    return *this;
  }
  GraphStore(const GraphStore&) = delete;
  GraphStore& operator=(const GraphStore&) = delete;

  // Modality registry. A modality must be registered (with its embedding
  // dimensionality) before nodes of that modality carry embeddings.
  void register_modality(const Modality& m, std::uint32_t dim);
  std::optional<std::uint32_t> modality_dim(const Modality& m) const;
  std::vector<std::pair<Modality, std::uint32_t>> modalities() const;

  // Validates the optional embedding against the registry and returns a
  // fresh id. The vector payload itself is owned by the index layer; the
  // caller records the assigned EmbeddingRef via set_embedding_ref.
  NodeId add_node(std::set<std::string> labels, const Modality& modality,
                  const std::optional<std::vector<float>>& embedding,
                  std::map<std::string, PropertyValue> properties);

  void set_embedding_ref(NodeId id, EmbeddingRef ref);

  // Tombstones the node and removes its incident edges.
  void remove_node(NodeId id);

  // Parallel edges are allowed when edge_type differs; an existing
  // (src, dst, edge_type) has its weight replaced.
  void add_edge(NodeId src, NodeId dst, const std::string& edge_type,
                float weight);

  bool has_node(NodeId id) const;
  GraphNode node(NodeId id) const;
  std::uint64_t live_node_count() const;
  std::uint64_t edge_count() const;
  NodeId next_node_id() const;

  // Live node ids in ascending order.
  std::vector<NodeId> node_ids() const;
  std::vector<NodeId> nodes_with_label(const std::string& label) const;

  // (neighbor, edge_type, weight) triples, sorted by (neighbor, type).
  std::vector<std::tuple<NodeId, std::string, float>> neighbors(
      NodeId id, Direction dir = Direction::Out) const;

  // Breadth-first expansion up to exactly h hops. Each node is reported
  // once, at its first-reach depth, with the hop weights of the maximum-sum
  // path of that depth (ties by lexicographically smallest node-id path).
  // Start nodes are reported only if re-reached through at least one hop.
  // Results ordered by (depth, id).
  std::vector<ReachedNode> traverse_khop(
      const std::vector<NodeId>& start, std::uint32_t h,
      const std::optional<std::set<std::string>>& edge_filter = std::nullopt,
      Direction dir = Direction::Out) const;

  // Louvain modularity maximization on the undirected weighted projection.
  // Deterministic: ascending-id iteration, refinement until gain < 1e-9.
  // Community ids are dense from 0, ordered by smallest member id.
  std::unordered_map<NodeId, std::uint32_t> detect_communities() const;

  void save_snapshot(const std::string& path) const;
  static GraphStore load_snapshot(const std::string& path);

  // Canonical text dump of all tables; equal dumps mean equal stores.
  std::string structural_dump() const;

 private:
  struct EdgeRec {
    NodeId other = kInvalidNode;
    std::uint32_t type = 0;
    float weight = 0.0f;
  };

  struct NodeRec {
    bool live = false;
    std::set<std::string> labels;
    std::string modality_name;
    std::optional<EmbeddingRef> embedding;
    std::map<std::string, PropertyValue> properties;
  };

  std::uint32_t intern_type(const std::string& type);
  void check_live(NodeId id) const;
  static void insert_sorted(std::vector<EdgeRec>& list, EdgeRec rec);

  void move_from(GraphStore&& o) noexcept {
    std::unique_lock their(o.mu_);
    nodes_ = std::move(o.nodes_);
    fwd_ = std::move(o.fwd_);
    rev_ = std::move(o.rev_);
    edge_types_ = std::move(o.edge_types_);
    edge_type_ids_ = std::move(o.edge_type_ids_);
    modality_dims_ = std::move(o.modality_dims_);
    live_nodes_ = o.live_nodes_;
    edges_ = o.edges_;
  }

  mutable std::shared_mutex mu_;
  std::vector<NodeRec> nodes_;
  std::vector<std::vector<EdgeRec>> fwd_;
  std::vector<std::vector<EdgeRec>> rev_;
  std::vector<std::string> edge_types_;
  std::unordered_map<std::string, std::uint32_t> edge_type_ids_;
  std::map<std::string, std::uint32_t> modality_dims_;
  std::uint64_t live_nodes_ = 0;
  std::uint64_t edges_ = 0;
};

// Weighted modularity of a partition, straight from the definition. Exposed
// for community tests and diagnostics.
double modularity(
    const std::vector<std::tuple<NodeId, NodeId, double>>& undirected_edges,
    const std::unordered_map<NodeId, std::uint32_t>& communities);

}  // namespace hmgi
