#pragma once
// Hierarchical navigable small-world index over cosine distance.
//
// Multi-layer proximity graph: geometric level assignment with multiplier
// 1/ln(M), greedy descent through the sparse upper layers, ef-bounded
// best-first search at layer 0. Neighbor selection uses the
// diversity-preferring heuristic with keep-pruned-connections. Vectors are
// L2-normalized on insert, so distance is 1 - dot in [0, 2].
//
// Deletions tombstone the slot: excluded from every result, still usable
// for routing. Compaction rebuilds the index without dead slots.
//
// Determinism: a fixed seed and operation sequence produce identical
// serialized bytes. All tie-breaks order by (distance, slot).

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hmgi/errors.hpp"
#include "hmgi/types.hpp"
#include "hmgi/vector_arena.hpp"

namespace hmgi {

struct HnswParams {
  std::uint32_t M = 32;
  std::uint32_t ef_construction = 200;
  std::uint32_t ef_search = 200;
  std::uint64_t seed = 42;

  void validate() const {
    if (M < 2) throw ParameterError("M must be >= 2");
    if (ef_construction < M) throw ParameterError("ef_construction must be >= M");
    if (ef_search < 1) throw ParameterError("ef_search must be >= 1");
  }
};

// Optional per-id acceptance predicate applied to results (not routing).
using SearchFilter = std::function<bool(NodeId)>;

class HnswIndex {
 public:
  HnswIndex() = default;
  HnswIndex(std::uint32_t dim, HnswParams params,
            QuantBits bits = QuantBits::None);

  static HnswIndex build(
      std::uint32_t dim,
      const std::vector<std::pair<NodeId, std::vector<float>>>& vectors,
      HnswParams params, QuantBits bits = QuantBits::None);

  // Returns the slot assigned to the new vector.
  std::uint32_t insert(NodeId id, std::span<const float> v);
  void remove(NodeId id);
  bool contains(NodeId id) const { return id_to_slot_.count(id) > 0; }

  // Dequantized embedding of a live id.
  std::vector<float> vector_of(NodeId id) const;

  template <typename Fn>
  void for_each_live(Fn&& fn) const {
    for (std::uint32_t slot = 0; slot < ids_.size(); ++slot)
      if (!tombstone_[slot]) fn(ids_[slot], slot);
  }

  std::uint32_t dim() const noexcept { return dim_; }
  const HnswParams& params() const noexcept { return params_; }
  std::uint32_t live_count() const noexcept { return live_count_; }
  std::uint32_t slot_count() const noexcept { return arena_.size(); }
  double tombstone_fraction() const noexcept {
    return arena_.size() == 0
               ? 0.0
               : double(arena_.size() - live_count_) / arena_.size();
  }

  std::vector<SearchHit> search(std::span<const float> query, std::uint32_t k,
                                std::optional<std::uint32_t> ef = std::nullopt,
                                const SearchFilter* filter = nullptr) const;

  // Live (id, embedding) pairs in slot order.
  std::vector<std::pair<NodeId, std::vector<float>>> live_entries() const;

  std::size_t payload_bytes() const noexcept { return arena_.payload_bytes(); }
  QuantBits quant_bits() const noexcept { return arena_.bits(); }
  void requantize(QuantBits bits) { arena_.requantize(bits); }

  // Rebuilds without tombstoned slots; fresh level draws from a seed
  // derived from (params.seed, generation).
  void compact();

  void save(const std::string& path) const;
  static HnswIndex load(const std::string& path);
  void serialize(BinaryWriter& w) const;
  static HnswIndex deserialize(BinaryReader& r);

  const VectorArena& arena() const noexcept { return arena_; }
  NodeId slot_id(std::uint32_t slot) const { return ids_[slot]; }
  bool slot_live(std::uint32_t slot) const { return !tombstone_[slot]; }

 private:
  using Scored = std::pair<float, std::uint32_t>;  // (distance, slot)

  float distance_to(std::uint32_t slot, const float* query) const {
    return 1.0f - arena_.dot_to(slot, query);
  }
  float distance_between(std::uint32_t a, std::uint32_t b) const;

  std::uint32_t draw_level();
  std::uint32_t greedy_descend(const float* query, std::uint32_t entry,
                               std::uint32_t level) const;
  std::vector<Scored> search_layer(const float* query, std::uint32_t entry,
                                   std::uint32_t level, std::uint32_t ef) const;
  std::vector<std::uint32_t> select_neighbors(const float* query,
                                              std::vector<Scored> candidates,
                                              std::uint32_t m) const;
  void prune_links(std::uint32_t slot, std::uint32_t level);
  std::uint32_t level_cap(std::uint32_t level) const {
    return level == 0 ? 2 * params_.M : params_.M;
  }
  void reassign_entry_point();

  std::uint32_t dim_ = 0;
  HnswParams params_;
  VectorArena arena_;
  std::vector<NodeId> ids_;                               // slot -> external id
  std::unordered_map<NodeId, std::uint32_t> id_to_slot_;  // live ids only
  std::vector<std::uint8_t> tombstone_;
  std::vector<std::uint8_t> levels_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // slot, level
  std::uint32_t entry_point_ = UINT32_MAX;
  std::uint32_t max_level_ = 0;
  std::uint32_t live_count_ = 0;
  std::uint32_t generation_ = 0;
  std::mt19937_64 rng_{42};
};

// L2-normalizes in place; throws ZeroVector for zero or non-finite input.
void normalize_vector(std::vector<float>& v);

}  // namespace hmgi
