#include "hmgi/graph_store.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hmgi/binary_io.hpp"

namespace hmgi {

namespace {

constexpr char kMagic[] = "HMGI";
constexpr std::uint32_t kFormatVersion = 1;

enum Section : std::uint32_t {
  kSectionRegistry = 1,
  kSectionEdgeTypes = 2,
  kSectionNodes = 3,
  kSectionEdges = 4,
};

void put_property(BinaryWriter& w, const PropertyValue& v) {
  w.put_u8(static_cast<std::uint8_t>(v.index()));
  switch (v.index()) {
    case 0: w.put_u8(std::get<bool>(v) ? 1 : 0); break;
    case 1: w.put_i64(std::get<std::int64_t>(v)); break;
    case 2: w.put_f64(std::get<double>(v)); break;
    case 3: w.put_string(std::get<std::string>(v)); break;
  }
}

PropertyValue get_property(BinaryReader& r) {
  switch (r.get_u8()) {
    case 0: return PropertyValue(r.get_u8() != 0);
    case 1: return PropertyValue(r.get_i64());
    case 2: return PropertyValue(r.get_f64());
    case 3: return PropertyValue(r.get_string());
    default: throw FormatVersionMismatch("unknown property tag");
  }
}

}  // namespace

void GraphStore::register_modality(const Modality& m, std::uint32_t dim) {
  std::unique_lock lock(mu_);
  auto it = modality_dims_.find(m.name());
  if (it != modality_dims_.end() && it->second != dim)
    throw DimensionMismatch("modality " + m.name() + " already registered with dim " +
                            std::to_string(it->second));
  modality_dims_[m.name()] = dim;
}

std::optional<std::uint32_t> GraphStore::modality_dim(const Modality& m) const {
  std::shared_lock lock(mu_);
  auto it = modality_dims_.find(m.name());
  if (it == modality_dims_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<Modality, std::uint32_t>> GraphStore::modalities() const {
  std::shared_lock lock(mu_);
  std::vector<std::pair<Modality, std::uint32_t>> out;
  out.reserve(modality_dims_.size());
  for (const auto& [name, dim] : modality_dims_)
    out.emplace_back(Modality::from_name(name), dim);
  return out;
}

NodeId GraphStore::add_node(std::set<std::string> labels, const Modality& modality,
                            const std::optional<std::vector<float>>& embedding,
                            std::map<std::string, PropertyValue> properties) {
  std::unique_lock lock(mu_);
  if (embedding.has_value()) {
    auto it = modality_dims_.find(modality.name());
    if (it == modality_dims_.end())
      throw UnknownModality(modality.name());
    if (embedding->size() != it->second)
      throw DimensionMismatch("embedding length " + std::to_string(embedding->size()) +
                              " != registered dim " + std::to_string(it->second) +
                              " for modality " + modality.name());
  }
  NodeId id = nodes_.size();
  NodeRec rec;
  rec.live = true;
  rec.labels = std::move(labels);
  rec.modality_name = modality.name();
  rec.properties = std::move(properties);
  nodes_.push_back(std::move(rec));
  fwd_.emplace_back();
  rev_.emplace_back();
  ++live_nodes_;
  return id;
}

void GraphStore::set_embedding_ref(NodeId id, EmbeddingRef ref) {
  std::unique_lock lock(mu_);
  check_live(id);
  nodes_[id].embedding = ref;
}

void GraphStore::remove_node(NodeId id) {
  std::unique_lock lock(mu_);
  check_live(id);
  for (const EdgeRec& e : fwd_[id]) {
    auto& list = rev_[e.other];
    list.erase(std::remove_if(list.begin(), list.end(),
                              [&](const EdgeRec& r) {
                                return r.other == id && r.type == e.type;
                              }),
               list.end());
    --edges_;
  }
  for (const EdgeRec& e : rev_[id]) {
    auto& list = fwd_[e.other];
    auto before = list.size();
    list.erase(std::remove_if(list.begin(), list.end(),
                              [&](const EdgeRec& r) {
                                return r.other == id && r.type == e.type;
                              }),
               list.end());
    edges_ -= before - list.size();
  }
  fwd_[id].clear();
  rev_[id].clear();
  nodes_[id].live = false;
  nodes_[id].embedding.reset();
  --live_nodes_;
}

void GraphStore::add_edge(NodeId src, NodeId dst, const std::string& edge_type,
                          float weight) {
  std::unique_lock lock(mu_);
  if (src >= nodes_.size() || !nodes_[src].live)
    throw DanglingEndpoint("src node " + std::to_string(src));
  if (dst >= nodes_.size() || !nodes_[dst].live)
    throw DanglingEndpoint("dst node " + std::to_string(dst));
  if (!std::isfinite(weight) || weight < 0.0f || weight > 1.0f)
    throw WeightOutOfRange("weight " + std::to_string(weight) + " not in [0, 1]");
  std::uint32_t type = intern_type(edge_type);
  for (EdgeRec& e : fwd_[src]) {
    if (e.other == dst && e.type == type) {
      e.weight = weight;
      for (EdgeRec& r : rev_[dst])
        if (r.other == src && r.type == type) r.weight = weight;
      return;
    }
  }
  insert_sorted(fwd_[src], EdgeRec{dst, type, weight});
  insert_sorted(rev_[dst], EdgeRec{src, type, weight});
  ++edges_;
}

bool GraphStore::has_node(NodeId id) const {
  std::shared_lock lock(mu_);
  return id < nodes_.size() && nodes_[id].live;
}

GraphNode GraphStore::node(NodeId id) const {
  std::shared_lock lock(mu_);
  check_live(id);
  const NodeRec& rec = nodes_[id];
  GraphNode out;
  out.id = id;
  out.labels = rec.labels;
  out.modality = Modality::from_name(rec.modality_name);
  out.embedding = rec.embedding;
  out.properties = rec.properties;
  return out;
}

std::uint64_t GraphStore::live_node_count() const {
  std::shared_lock lock(mu_);
  return live_nodes_;
}

std::uint64_t GraphStore::edge_count() const {
  std::shared_lock lock(mu_);
  return edges_;
}

NodeId GraphStore::next_node_id() const {
  std::shared_lock lock(mu_);
  return nodes_.size();
}

std::vector<NodeId> GraphStore::node_ids() const {
  std::shared_lock lock(mu_);
  std::vector<NodeId> out;
  out.reserve(live_nodes_);
  for (NodeId id = 0; id < nodes_.size(); ++id)
    if (nodes_[id].live) out.push_back(id);
  return out;
}

std::vector<NodeId> GraphStore::nodes_with_label(const std::string& label) const {
  std::shared_lock lock(mu_);
  std::vector<NodeId> out;
  for (NodeId id = 0; id < nodes_.size(); ++id)
    if (nodes_[id].live && nodes_[id].labels.count(label)) out.push_back(id);
  return out;
}

std::vector<std::tuple<NodeId, std::string, float>> GraphStore::neighbors(
    NodeId id, Direction dir) const {
  std::shared_lock lock(mu_);
  check_live(id);
  std::vector<std::tuple<NodeId, std::string, float>> out;
  auto emit = [&](const std::vector<EdgeRec>& list) {
    for (const EdgeRec& e : list)
      out.emplace_back(e.other, edge_types_[e.type], e.weight);
  };
  if (dir == Direction::Out || dir == Direction::Both) emit(fwd_[id]);
  if (dir == Direction::In || dir == Direction::Both) emit(rev_[id]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ReachedNode> GraphStore::traverse_khop(
    const std::vector<NodeId>& start, std::uint32_t h,
    const std::optional<std::set<std::string>>& edge_filter, Direction dir) const {
  std::shared_lock lock(mu_);

  std::optional<std::vector<bool>> type_pass;
  if (edge_filter.has_value()) {
    type_pass.emplace(edge_types_.size(), false);
    for (std::uint32_t t = 0; t < edge_types_.size(); ++t)
      (*type_pass)[t] = edge_filter->count(edge_types_[t]) > 0;
  }

  struct PathState {
    double sum = 0.0;
    std::vector<NodeId> path;     // node-id sequence including the start
    std::vector<float> weights;   // per-hop edge weights
  };

  // Depth-0 frontier: one state per distinct start node.
  std::vector<std::pair<NodeId, PathState>> frontier;
  {
    std::set<NodeId> seen;
    for (NodeId s : start) {
      if (s >= nodes_.size() || !nodes_[s].live || !seen.insert(s).second)
        continue;
      frontier.emplace_back(s, PathState{0.0, {s}, {}});
    }
  }

  std::unordered_map<NodeId, std::uint32_t> reached_depth;
  std::unordered_map<NodeId, bool> expanded;
  for (const auto& [s, st] : frontier) expanded[s] = true;

  std::vector<ReachedNode> results;

  for (std::uint32_t depth = 1; depth <= h && !frontier.empty(); ++depth) {
    std::map<NodeId, PathState> best;  // candidates first reached at this depth
    for (const auto& [u, state] : frontier) {
      auto scan = [&](const std::vector<EdgeRec>& list) {
        for (const EdgeRec& e : list) {
          if (type_pass.has_value() && !(*type_pass)[e.type]) continue;
          if (!nodes_[e.other].live) continue;
          if (reached_depth.count(e.other)) continue;  // reached earlier
          PathState cand;
          cand.sum = state.sum + e.weight;
          cand.path = state.path;
          cand.path.push_back(e.other);
          cand.weights = state.weights;
          cand.weights.push_back(e.weight);
          auto [it, inserted] = best.try_emplace(e.other, cand);
          if (!inserted) {
            PathState& cur = it->second;
            if (cand.sum > cur.sum ||
                (cand.sum == cur.sum && cand.path < cur.path))
              cur = std::move(cand);
          }
        }
      };
      if (dir == Direction::Out || dir == Direction::Both) scan(fwd_[u]);
      if (dir == Direction::In || dir == Direction::Both) scan(rev_[u]);
    }

    std::vector<std::pair<NodeId, PathState>> next;
    next.reserve(best.size());
    for (auto& [v, state] : best) {
      reached_depth[v] = depth;
      results.push_back(ReachedNode{v, state.weights});
      if (!expanded[v]) {
        expanded[v] = true;
        next.emplace_back(v, std::move(state));
      }
    }
    frontier = std::move(next);
  }
  return results;
}

std::uint32_t GraphStore::intern_type(const std::string& type) {
  auto it = edge_type_ids_.find(type);
  if (it != edge_type_ids_.end()) return it->second;
  std::uint32_t id = static_cast<std::uint32_t>(edge_types_.size());
  edge_types_.push_back(type);
  edge_type_ids_[type] = id;
  return id;
}

void GraphStore::check_live(NodeId id) const {
  if (id >= nodes_.size() || !nodes_[id].live)
    throw UnknownId("node " + std::to_string(id));
}

void GraphStore::insert_sorted(std::vector<EdgeRec>& list, EdgeRec rec) {
  auto pos = std::lower_bound(list.begin(), list.end(), rec,
                              [](const EdgeRec& a, const EdgeRec& b) {
                                if (a.other != b.other) return a.other < b.other;
                                return a.type < b.type;
                              });
  list.insert(pos, rec);
}

void GraphStore::save_snapshot(const std::string& path) const {
  std::shared_lock lock(mu_);
  SnapshotWriter snap(kMagic, kFormatVersion);

  BinaryWriter reg;
  reg.put_u64(modality_dims_.size());
  for (const auto& [name, dim] : modality_dims_) {
    reg.put_string(name);
    reg.put_u32(dim);
  }
  snap.add_section(kSectionRegistry, reg);

  BinaryWriter types;
  types.put_u64(edge_types_.size());
  for (const std::string& t : edge_types_) types.put_string(t);
  snap.add_section(kSectionEdgeTypes, types);

  BinaryWriter nodes;
  nodes.put_u64(nodes_.size());
  nodes.put_u64(live_nodes_);
  for (const NodeRec& rec : nodes_) {
    nodes.put_u8(rec.live ? 1 : 0);
    if (!rec.live) continue;
    nodes.put_u64(rec.labels.size());
    for (const std::string& l : rec.labels) nodes.put_string(l);
    nodes.put_string(rec.modality_name);
    nodes.put_u8(rec.embedding.has_value() ? 1 : 0);
    if (rec.embedding.has_value()) {
      nodes.put_u32(rec.embedding->partition);
      nodes.put_u32(rec.embedding->slot);
    }
    nodes.put_u64(rec.properties.size());
    for (const auto& [k, v] : rec.properties) {
      nodes.put_string(k);
      put_property(nodes, v);
    }
  }
  snap.add_section(kSectionNodes, nodes);

  BinaryWriter edges;
  edges.put_u64(edges_);
  for (NodeId src = 0; src < fwd_.size(); ++src) {
    for (const EdgeRec& e : fwd_[src]) {
      edges.put_u64(src);
      edges.put_u64(e.other);
      edges.put_u32(e.type);
      edges.put_f32(e.weight);
    }
  }
  snap.add_section(kSectionEdges, edges);

  snap.write_file(path);
}

GraphStore GraphStore::load_snapshot(const std::string& path) {
  SnapshotReader snap(path, kMagic, kFormatVersion);
  GraphStore store;

  {
    BinaryReader r(snap.section(kSectionRegistry));
    std::uint64_t n = r.get_u64();
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string name = r.get_string();
      std::uint32_t dim = r.get_u32();
      store.modality_dims_[name] = dim;
    }
  }
  {
    BinaryReader r(snap.section(kSectionEdgeTypes));
    std::uint64_t n = r.get_u64();
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string t = r.get_string();
      store.edge_type_ids_[t] = static_cast<std::uint32_t>(store.edge_types_.size());
      store.edge_types_.push_back(t);
    }
  }
  {
    BinaryReader r(snap.section(kSectionNodes));
    std::uint64_t total = r.get_u64();
    store.live_nodes_ = r.get_u64();
    store.nodes_.resize(total);
    store.fwd_.resize(total);
    store.rev_.resize(total);
    for (std::uint64_t id = 0; id < total; ++id) {
      NodeRec& rec = store.nodes_[id];
      rec.live = r.get_u8() != 0;
      if (!rec.live) continue;
      std::uint64_t nl = r.get_u64();
      for (std::uint64_t i = 0; i < nl; ++i) rec.labels.insert(r.get_string());
      rec.modality_name = r.get_string();
      if (r.get_u8() != 0) {
        EmbeddingRef ref;
        ref.partition = r.get_u32();
        ref.slot = r.get_u32();
        rec.embedding = ref;
      }
      std::uint64_t np = r.get_u64();
      for (std::uint64_t i = 0; i < np; ++i) {
        std::string k = r.get_string();
        rec.properties.emplace(std::move(k), get_property(r));
      }
    }
  }
  {
    BinaryReader r(snap.section(kSectionEdges));
    std::uint64_t n = r.get_u64();
    for (std::uint64_t i = 0; i < n; ++i) {
      NodeId src = r.get_u64();
      NodeId dst = r.get_u64();
      std::uint32_t type = r.get_u32();
      float w = r.get_f32();
      if (src >= store.nodes_.size() || dst >= store.nodes_.size() ||
          type >= store.edge_types_.size())
        throw FormatVersionMismatch("edge references unknown node or type");
      insert_sorted(store.fwd_[src], EdgeRec{dst, type, w});
      insert_sorted(store.rev_[dst], EdgeRec{src, type, w});
    }
    store.edges_ = n;
  }
  return store;
}

std::string GraphStore::structural_dump() const {
  std::shared_lock lock(mu_);
  std::ostringstream os;
  os.precision(9);
  for (const auto& [name, dim] : modality_dims_)
    os << "modality " << name << " " << dim << "\n";
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    const NodeRec& rec = nodes_[id];
    if (!rec.live) {
      os << "tomb " << id << "\n";
      continue;
    }
    os << "node " << id << " m=" << rec.modality_name << " labels=[";
    for (const std::string& l : rec.labels) os << l << ",";
    os << "]";
    if (rec.embedding)
      os << " ref=" << rec.embedding->partition << ":" << rec.embedding->slot;
    os << " props={";
    for (const auto& [k, v] : rec.properties) {
      os << k << "=";
      std::visit([&](const auto& x) { os << x; }, v);
      os << ",";
    }
    os << "}\n";
  }
  for (NodeId src = 0; src < fwd_.size(); ++src)
    for (const EdgeRec& e : fwd_[src])
      os << "edge " << src << " " << e.other << " " << edge_types_[e.type]
         << " " << e.weight << "\n";
  return os.str();
}

}  // namespace hmgi
