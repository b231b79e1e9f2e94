#include "hmgi/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace hmgi {

namespace {

constexpr char kMagic[] = "HMGV";
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kMaxLevelCap = 30;

enum Section : std::uint32_t {
  kSectionMeta = 1,
  kSectionVectors = 2,
  kSectionSlots = 3,
  kSectionRng = 4,
  kSectionLayerBase = 100,
};

// Uniform [0, 1) from the top 53 bits, independent of distribution
// implementations so the level sequence is stable across toolchains.
double unit_uniform(std::mt19937_64& rng) {
  return (rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace

void normalize_vector(std::vector<float>& v) {
  double norm_sq = 0.0;
  for (float x : v) {
    if (!std::isfinite(x)) throw NonFiniteInput("embedding component");
    norm_sq += double{x} * x;
  }
  if (norm_sq <= 0.0)
    throw ZeroVector("zero embeddings cannot be indexed under cosine distance");
  const float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
  for (float& x : v) x *= inv;
}

HnswIndex::HnswIndex(std::uint32_t dim, HnswParams params, QuantBits bits)
    : dim_(dim), params_(params), arena_(dim, bits), rng_(params.seed) {
  params_.validate();
}

HnswIndex HnswIndex::build(
    std::uint32_t dim,
    const std::vector<std::pair<NodeId, std::vector<float>>>& vectors,
    HnswParams params, QuantBits bits) {
  HnswIndex index(dim, params, bits);
  for (const auto& [id, v] : vectors) index.insert(id, v);
  return index;
}

float HnswIndex::distance_between(std::uint32_t a, std::uint32_t b) const {
  thread_local std::vector<float> scratch;
  scratch.resize(dim_);
  arena_.decode(a, scratch.data());
  return 1.0f - arena_.dot_to(b, scratch.data());
}

std::uint32_t HnswIndex::draw_level() {
  const double mult = 1.0 / std::log(static_cast<double>(params_.M));
  double u = unit_uniform(rng_);
  if (u <= 0.0) u = 1e-300;
  auto level = static_cast<std::uint32_t>(-std::log(u) * mult);
  return std::min(level, kMaxLevelCap);
}

std::uint32_t HnswIndex::greedy_descend(const float* query, std::uint32_t entry,
                                        std::uint32_t level) const {
  std::uint32_t cur = entry;
  float cur_dist = distance_to(cur, query);
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::uint32_t nbr : links_[cur][level]) {
      float d = distance_to(nbr, query);
      if (d < cur_dist) {
        cur = nbr;
        cur_dist = d;
        improved = true;
      }
    }
  }
  return cur;
}

std::vector<HnswIndex::Scored> HnswIndex::search_layer(
    const float* query, std::uint32_t entry, std::uint32_t level,
    std::uint32_t ef) const {
  // Result heap holds accepted nodes only; traversal considers everything.
  std::priority_queue<Scored, std::vector<Scored>, std::greater<>> candidates;
  std::priority_queue<Scored> results;
  std::vector<std::uint8_t> visited(arena_.size(), 0);

  const float entry_dist = distance_to(entry, query);
  candidates.emplace(entry_dist, entry);
  results.emplace(entry_dist, entry);
  visited[entry] = 1;

  while (!candidates.empty()) {
    auto [dist, slot] = candidates.top();
    if (results.size() >= ef && dist > results.top().first) break;
    candidates.pop();
    for (std::uint32_t nbr : links_[slot][level]) {
      if (visited[nbr]) continue;
      visited[nbr] = 1;
      float d = distance_to(nbr, query);
      if (results.size() < ef || d < results.top().first) {
        candidates.emplace(d, nbr);
        results.emplace(d, nbr);
        if (results.size() > ef) results.pop();
      }
    }
  }

  std::vector<Scored> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> HnswIndex::select_neighbors(
    const float* query, std::vector<Scored> candidates, std::uint32_t m) const {
  std::sort(candidates.begin(), candidates.end());
  std::vector<std::uint32_t> selected;
  std::vector<std::uint32_t> pruned;
  selected.reserve(m);
  for (const auto& [dist, slot] : candidates) {
    if (selected.size() >= m) break;
    bool diverse = true;
    for (std::uint32_t s : selected) {
      if (distance_between(slot, s) < dist) {
        diverse = false;
        break;
      }
    }
    if (diverse)
      selected.push_back(slot);
    else
      pruned.push_back(slot);
  }
  for (std::uint32_t s : pruned) {
    if (selected.size() >= m) break;
    selected.push_back(s);
  }
  return selected;
}

void HnswIndex::prune_links(std::uint32_t slot, std::uint32_t level) {
  thread_local std::vector<float> scratch;
  scratch.resize(dim_);
  arena_.decode(slot, scratch.data());
  std::vector<Scored> candidates;
  candidates.reserve(links_[slot][level].size());
  for (std::uint32_t nbr : links_[slot][level])
    candidates.emplace_back(distance_to(nbr, scratch.data()), nbr);
  links_[slot][level] = select_neighbors(scratch.data(), std::move(candidates),
                                         level_cap(level));
}

std::uint32_t HnswIndex::insert(NodeId id, std::span<const float> v) {
  if (contains(id)) throw DuplicateId("id " + std::to_string(id));
  if (v.size() != dim_)
    throw DimensionMismatch("vector length " + std::to_string(v.size()) +
                            " != index dim " + std::to_string(dim_));
  std::vector<float> vec(v.begin(), v.end());
  normalize_vector(vec);

  const std::uint32_t level = draw_level();
  const std::uint32_t slot = arena_.append(vec);
  ids_.push_back(id);
  tombstone_.push_back(0);
  levels_.push_back(static_cast<std::uint8_t>(level));
  links_.emplace_back(level + 1);
  id_to_slot_[id] = slot;
  ++live_count_;

  if (entry_point_ == UINT32_MAX) {
    entry_point_ = slot;
    max_level_ = level;
    return slot;
  }

  std::uint32_t cur = entry_point_;
  for (std::uint32_t lvl = max_level_; lvl > level; --lvl)
    cur = greedy_descend(vec.data(), cur, lvl);

  for (std::uint32_t lvl = std::min(level, max_level_);; --lvl) {
    std::vector<Scored> found =
        search_layer(vec.data(), cur, lvl, params_.ef_construction);
    if (!found.empty()) cur = found.front().second;
    std::vector<std::uint32_t> selected =
        select_neighbors(vec.data(), found, params_.M);
    links_[slot][lvl] = selected;
    for (std::uint32_t nbr : selected) {
      links_[nbr][lvl].push_back(slot);
      if (links_[nbr][lvl].size() > level_cap(lvl)) prune_links(nbr, lvl);
    }
    if (lvl == 0) break;
  }

  if (level > max_level_) {
    max_level_ = level;
    entry_point_ = slot;
  }
  return slot;
}

std::vector<float> HnswIndex::vector_of(NodeId id) const {
  auto it = id_to_slot_.find(id);
  if (it == id_to_slot_.end()) throw UnknownId("id " + std::to_string(id));
  return arena_.get(it->second);
}

void HnswIndex::remove(NodeId id) {
  auto it = id_to_slot_.find(id);
  if (it == id_to_slot_.end()) throw UnknownId("id " + std::to_string(id));
  const std::uint32_t slot = it->second;
  tombstone_[slot] = 1;
  id_to_slot_.erase(it);
  --live_count_;
  if (live_count_ == 0) {
    entry_point_ = UINT32_MAX;
    max_level_ = 0;
  } else if (slot == entry_point_) {
    reassign_entry_point();
  }
}

void HnswIndex::reassign_entry_point() {
  std::uint32_t best = UINT32_MAX;
  std::uint32_t best_level = 0;
  for (std::uint32_t slot = 0; slot < arena_.size(); ++slot) {
    if (tombstone_[slot]) continue;
    if (best == UINT32_MAX || levels_[slot] > best_level) {
      best = slot;
      best_level = levels_[slot];
    }
  }
  entry_point_ = best;
  max_level_ = best_level;
}

std::vector<SearchHit> HnswIndex::search(std::span<const float> query,
                                         std::uint32_t k,
                                         std::optional<std::uint32_t> ef,
                                         const SearchFilter* filter) const {
  if (k < 1) throw ParameterError("k must be >= 1");
  if (query.size() != dim_)
    throw DimensionMismatch("query length " + std::to_string(query.size()) +
                            " != index dim " + std::to_string(dim_));
  if (live_count_ == 0) return {};
  std::vector<float> q(query.begin(), query.end());
  normalize_vector(q);

  const std::uint32_t ef_eff = std::max(ef.value_or(params_.ef_search), k);
  std::uint32_t cur = entry_point_;
  for (std::uint32_t lvl = max_level_; lvl >= 1; --lvl)
    cur = greedy_descend(q.data(), cur, lvl);

  // Layer-0 sweep with acceptance applied to the result set only.
  std::priority_queue<Scored, std::vector<Scored>, std::greater<>> candidates;
  std::priority_queue<Scored> results;
  std::vector<std::uint8_t> visited(arena_.size(), 0);
  auto accept = [&](std::uint32_t slot) {
    return !tombstone_[slot] && (filter == nullptr || (*filter)(ids_[slot]));
  };

  const float entry_dist = distance_to(cur, q.data());
  candidates.emplace(entry_dist, cur);
  if (accept(cur)) results.emplace(entry_dist, cur);
  visited[cur] = 1;

  while (!candidates.empty()) {
    auto [dist, slot] = candidates.top();
    if (results.size() >= ef_eff && dist > results.top().first) break;
    candidates.pop();
    for (std::uint32_t nbr : links_[slot][0]) {
      if (visited[nbr]) continue;
      visited[nbr] = 1;
      float d = distance_to(nbr, q.data());
      if (results.size() < ef_eff || d < results.top().first) {
        candidates.emplace(d, nbr);
        if (accept(nbr)) {
          results.emplace(d, nbr);
          if (results.size() > ef_eff) results.pop();
        }
      }
    }
  }

  std::vector<SearchHit> hits;
  hits.reserve(results.size());
  while (!results.empty()) {
    auto [dist, slot] = results.top();
    results.pop();
    hits.push_back(SearchHit{ids_[slot],
                             std::clamp(dist, 0.0f, 2.0f), kInvalidPartition});
  }
  std::sort(hits.begin(), hits.end(), hit_order);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<std::pair<NodeId, std::vector<float>>> HnswIndex::live_entries()
    const {
  std::vector<std::pair<NodeId, std::vector<float>>> out;
  out.reserve(live_count_);
  for (std::uint32_t slot = 0; slot < arena_.size(); ++slot)
    if (!tombstone_[slot]) out.emplace_back(ids_[slot], arena_.get(slot));
  return out;
}

void HnswIndex::compact() {
  auto entries = live_entries();
  HnswParams p = params_;
  const std::uint32_t next_gen = generation_ + 1;
  p.seed = params_.seed ^ (0x9e3779b97f4a7c15ULL * (next_gen + 1));
  HnswIndex fresh(dim_, p, arena_.bits());
  for (const auto& [id, v] : entries) fresh.insert(id, v);
  fresh.params_ = params_;
  fresh.generation_ = next_gen;
  *this = std::move(fresh);
}

void HnswIndex::serialize(BinaryWriter& w) const {
  w.put_u32(dim_);
  w.put_u32(params_.M);
  w.put_u32(params_.ef_construction);
  w.put_u32(params_.ef_search);
  w.put_u64(params_.seed);
  w.put_u32(entry_point_);
  w.put_u32(max_level_);
  w.put_u32(live_count_);
  w.put_u32(generation_);
  arena_.serialize(w);
  w.put_u64(ids_.size());
  for (NodeId id : ids_) w.put_u64(id);
  w.put_bytes(tombstone_.data(), tombstone_.size());
  w.put_bytes(levels_.data(), levels_.size());
  for (const auto& per_level : links_) {
    w.put_u8(static_cast<std::uint8_t>(per_level.size()));
    for (const auto& nbrs : per_level) {
      w.put_u32(static_cast<std::uint32_t>(nbrs.size()));
      for (std::uint32_t n : nbrs) w.put_u32(n);
    }
  }
  std::ostringstream rng_state;
  rng_state << rng_;
  w.put_string(rng_state.str());
}

HnswIndex HnswIndex::deserialize(BinaryReader& r) {
  HnswIndex x;
  x.dim_ = r.get_u32();
  x.params_.M = r.get_u32();
  x.params_.ef_construction = r.get_u32();
  x.params_.ef_search = r.get_u32();
  x.params_.seed = r.get_u64();
  x.entry_point_ = r.get_u32();
  x.max_level_ = r.get_u32();
  x.live_count_ = r.get_u32();
  x.generation_ = r.get_u32();
  x.arena_ = VectorArena::deserialize(r);
  std::uint64_t n = r.get_u64();
  x.ids_.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) x.ids_[i] = r.get_u64();
  x.tombstone_.resize(n);
  if (n > 0) r.get_bytes(x.tombstone_.data(), n);
  x.levels_.resize(n);
  if (n > 0) r.get_bytes(x.levels_.data(), n);
  x.links_.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint8_t level_count = r.get_u8();
    x.links_[i].resize(level_count);
    for (std::uint8_t l = 0; l < level_count; ++l) {
      std::uint32_t deg = r.get_u32();
      x.links_[i][l].resize(deg);
      for (std::uint32_t j = 0; j < deg; ++j) x.links_[i][l][j] = r.get_u32();
    }
  }
  std::istringstream rng_state(r.get_string());
  rng_state >> x.rng_;
  for (std::uint64_t i = 0; i < n; ++i)
    if (!x.tombstone_[i]) x.id_to_slot_[x.ids_[i]] = static_cast<std::uint32_t>(i);
  if (x.arena_.size() != n || x.levels_.size() != n)
    throw FormatVersionMismatch("index tables disagree on slot count");
  return x;
}

void HnswIndex::save(const std::string& path) const {
  SnapshotWriter snap(kMagic, kFormatVersion);

  BinaryWriter meta;
  meta.put_u32(dim_);
  meta.put_u32(params_.M);
  meta.put_u32(params_.ef_construction);
  meta.put_u32(params_.ef_search);
  meta.put_u64(params_.seed);
  meta.put_u32(entry_point_);
  meta.put_u32(max_level_);
  meta.put_u32(live_count_);
  meta.put_u32(generation_);
  meta.put_u32(static_cast<std::uint32_t>(ids_.size()));
  std::uint32_t top = 0;
  for (std::uint32_t slot = 0; slot < levels_.size(); ++slot)
    top = std::max<std::uint32_t>(top, levels_[slot]);
  meta.put_u32(top);
  snap.add_section(kSectionMeta, meta);

  BinaryWriter vectors;
  arena_.serialize(vectors);
  snap.add_section(kSectionVectors, vectors);

  BinaryWriter slots;
  for (std::uint32_t slot = 0; slot < ids_.size(); ++slot) {
    slots.put_u64(ids_[slot]);
    slots.put_u8(tombstone_[slot]);
    slots.put_u8(levels_[slot]);
  }
  snap.add_section(kSectionSlots, slots);

  // One adjacency block per layer: (slot, degree, neighbors...) for every
  // slot present at that layer.
  for (std::uint32_t lvl = 0; lvl <= top; ++lvl) {
    BinaryWriter layer;
    std::uint32_t present = 0;
    for (std::uint32_t slot = 0; slot < ids_.size(); ++slot)
      if (levels_[slot] >= lvl) ++present;
    layer.put_u32(present);
    for (std::uint32_t slot = 0; slot < ids_.size(); ++slot) {
      if (levels_[slot] < lvl) continue;
      layer.put_u32(slot);
      const auto& nbrs = links_[slot][lvl];
      layer.put_u32(static_cast<std::uint32_t>(nbrs.size()));
      for (std::uint32_t n : nbrs) layer.put_u32(n);
    }
    snap.add_section(kSectionLayerBase + lvl, layer);
  }

  BinaryWriter rng;
  std::ostringstream rng_state;
  rng_state << rng_;
  rng.put_string(rng_state.str());
  snap.add_section(kSectionRng, rng);

  snap.write_file(path);
}

HnswIndex HnswIndex::load(const std::string& path) {
  SnapshotReader snap(path, kMagic, kFormatVersion);
  HnswIndex x;

  BinaryReader meta(snap.section(kSectionMeta));
  x.dim_ = meta.get_u32();
  x.params_.M = meta.get_u32();
  x.params_.ef_construction = meta.get_u32();
  x.params_.ef_search = meta.get_u32();
  x.params_.seed = meta.get_u64();
  x.entry_point_ = meta.get_u32();
  x.max_level_ = meta.get_u32();
  x.live_count_ = meta.get_u32();
  x.generation_ = meta.get_u32();
  const std::uint32_t slots = meta.get_u32();
  const std::uint32_t top = meta.get_u32();

  BinaryReader vectors(snap.section(kSectionVectors));
  x.arena_ = VectorArena::deserialize(vectors);
  if (x.arena_.size() != slots)
    throw FormatVersionMismatch("vector block disagrees with header");

  BinaryReader slot_reader(snap.section(kSectionSlots));
  x.ids_.resize(slots);
  x.tombstone_.resize(slots);
  x.levels_.resize(slots);
  x.links_.resize(slots);
  for (std::uint32_t slot = 0; slot < slots; ++slot) {
    x.ids_[slot] = slot_reader.get_u64();
    x.tombstone_[slot] = slot_reader.get_u8();
    x.levels_[slot] = slot_reader.get_u8();
    x.links_[slot].resize(std::size_t{x.levels_[slot]} + 1);
    if (!x.tombstone_[slot]) x.id_to_slot_[x.ids_[slot]] = slot;
  }

  for (std::uint32_t lvl = 0; lvl <= top; ++lvl) {
    BinaryReader layer(snap.section(kSectionLayerBase + lvl));
    std::uint32_t present = layer.get_u32();
    for (std::uint32_t i = 0; i < present; ++i) {
      std::uint32_t slot = layer.get_u32();
      if (slot >= slots || x.levels_[slot] < lvl)
        throw FormatVersionMismatch("layer block references bad slot");
      std::uint32_t deg = layer.get_u32();
      auto& nbrs = x.links_[slot][lvl];
      nbrs.resize(deg);
      for (std::uint32_t j = 0; j < deg; ++j) {
        nbrs[j] = layer.get_u32();
        if (nbrs[j] >= slots)
          throw FormatVersionMismatch("neighbor out of range");
      }
    }
  }

  BinaryReader rng(snap.section(kSectionRng));
  std::istringstream rng_state(rng.get_string());
  rng_state >> x.rng_;
  return x;
}

}  // namespace hmgi
