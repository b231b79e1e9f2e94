// Louvain modularity maximization on the undirected weighted projection of
// the store. Deterministic: nodes are swept in ascending id order and every
// tie prefers the smaller community label.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hmgi/graph_store.hpp"

namespace hmgi {

namespace {

constexpr double kMinGain = 1e-9;

struct WorkGraph {
  // adjacency[i] = (neighbor, weight), no self entries; self_w separate.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency;
  std::vector<double> self_w;

  std::size_t size() const { return adjacency.size(); }
};

// One pass of local moving. Returns true when at least one node moved.
bool local_move(const WorkGraph& g, std::vector<std::uint32_t>& comm) {
  const std::size_t n = g.size();
  std::vector<double> degree(n, 0.0);
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double k = 2.0 * g.self_w[i];
    for (const auto& [j, w] : g.adjacency[i]) k += w;
    degree[i] = k;
    m2 += k;
  }
  if (m2 <= 0.0) return false;

  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[comm[i]] += degree[i];

  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::uint32_t i = 0; i < n; ++i) {
      std::uint32_t cur = comm[i];
      std::map<std::uint32_t, double> link;  // weight from i into each community
      link[cur] += 0.0;
      for (const auto& [j, w] : g.adjacency[i]) link[comm[j]] += w;

      tot[cur] -= degree[i];
      const double stay_gain = link[cur] - tot[cur] * degree[i] / m2;
      // Moves happen only on a strict gain over staying; among strictly
      // better communities ties go to the smallest label. This terminates:
      // modularity strictly increases with every move.
      std::uint32_t best = cur;
      double best_gain = stay_gain + kMinGain;
      for (const auto& [c, w] : link) {
        if (c == cur) continue;
        double gain = w - tot[c] * degree[i] / m2;
        if (gain > best_gain || (gain == best_gain && best != cur && c < best)) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += degree[i];
      if (best != cur) {
        comm[i] = best;
        moved = true;
        any_move = true;
      }
    }
  }
  return any_move;
}

// Collapses communities into super-nodes; mapping[i] gives the new index of
// the community node i belonged to.
WorkGraph aggregate(const WorkGraph& g, const std::vector<std::uint32_t>& comm,
                    std::vector<std::uint32_t>& mapping) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> relabel(n, UINT32_MAX);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (relabel[comm[i]] == UINT32_MAX) relabel[comm[i]] = next++;
  mapping.resize(n);
  for (std::size_t i = 0; i < n; ++i) mapping[i] = relabel[comm[i]];

  WorkGraph out;
  out.adjacency.resize(next);
  out.self_w.assign(next, 0.0);
  std::vector<std::map<std::uint32_t, double>> acc(next);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t ci = mapping[i];
    out.self_w[ci] += g.self_w[i];
    for (const auto& [j, w] : g.adjacency[i]) {
      std::uint32_t cj = mapping[j];
      if (ci == cj) {
        if (i < j) out.self_w[ci] += w;  // each undirected pair seen twice
      } else {
        acc[ci][cj] += w;
      }
    }
  }
  for (std::uint32_t c = 0; c < next; ++c)
    out.adjacency[c].assign(acc[c].begin(), acc[c].end());
  return out;
}

}  // namespace

std::unordered_map<NodeId, std::uint32_t> GraphStore::detect_communities() const {
  const std::vector<NodeId> ids = node_ids();
  std::unordered_map<NodeId, std::uint32_t> compact;
  compact.reserve(ids.size());
  for (std::uint32_t i = 0; i < ids.size(); ++i) compact[ids[i]] = i;

  // Undirected projection: parallel and reciprocal edges accumulate.
  WorkGraph g;
  g.adjacency.resize(ids.size());
  g.self_w.assign(ids.size(), 0.0);
  {
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> acc;
    for (NodeId src : ids) {
      for (const auto& [dst, type, w] : neighbors(src, Direction::Out)) {
        std::uint32_t a = compact[src];
        std::uint32_t b = compact[dst];
        if (a == b) {
          g.self_w[a] += w;
          continue;
        }
        if (a > b) std::swap(a, b);
        acc[{a, b}] += w;
      }
    }
    for (const auto& [pair, w] : acc) {
      g.adjacency[pair.first].emplace_back(pair.second, w);
      g.adjacency[pair.second].emplace_back(pair.first, w);
    }
  }

  // Multi-level refinement until a level produces no move.
  std::vector<std::uint32_t> membership(ids.size());
  std::iota(membership.begin(), membership.end(), 0u);
  WorkGraph level = std::move(g);
  std::vector<std::uint32_t> level_comm(level.size());
  std::iota(level_comm.begin(), level_comm.end(), 0u);
  while (local_move(level, level_comm)) {
    std::vector<std::uint32_t> mapping;
    level = aggregate(level, level_comm, mapping);
    for (auto& m : membership) m = mapping[m];
    level_comm.resize(level.size());
    std::iota(level_comm.begin(), level_comm.end(), 0u);
  }

  // Dense relabel ordered by smallest member node id.
  std::map<std::uint32_t, std::uint32_t> relabel;
  for (std::uint32_t i = 0; i < ids.size(); ++i)
    relabel.try_emplace(membership[i], 0);
  {
    std::map<std::uint32_t, NodeId> smallest;
    for (std::uint32_t i = 0; i < ids.size(); ++i) {
      auto it = smallest.find(membership[i]);
      if (it == smallest.end() || ids[i] < it->second)
        smallest[membership[i]] = ids[i];
    }
    std::vector<std::pair<NodeId, std::uint32_t>> order;
    for (const auto& [c, nid] : smallest) order.emplace_back(nid, c);
    std::sort(order.begin(), order.end());
    std::uint32_t next = 0;
    for (const auto& [nid, c] : order) relabel[c] = next++;
  }

  std::unordered_map<NodeId, std::uint32_t> result;
  result.reserve(ids.size());
  for (std::uint32_t i = 0; i < ids.size(); ++i)
    result[ids[i]] = relabel[membership[i]];
  return result;
}

double modularity(
    const std::vector<std::tuple<NodeId, NodeId, double>>& undirected_edges,
    const std::unordered_map<NodeId, std::uint32_t>& communities) {
  std::unordered_map<NodeId, double> degree;
  double m2 = 0.0;
  for (const auto& [u, v, w] : undirected_edges) {
    if (u == v) {
      degree[u] += 2.0 * w;
      m2 += 2.0 * w;
    } else {
      degree[u] += w;
      degree[v] += w;
      m2 += 2.0 * w;
    }
  }
  if (m2 <= 0.0) return 0.0;

  double intra = 0.0;  // sum of A_ij over intra-community ordered pairs
  for (const auto& [u, v, w] : undirected_edges) {
    if (communities.at(u) != communities.at(v)) continue;
    intra += 2.0 * w;
  }
  std::unordered_map<std::uint32_t, double> comm_degree;
  for (const auto& [node, deg] : degree) comm_degree[communities.at(node)] += deg;

  double q = intra / m2;
  for (const auto& [c, deg] : comm_degree) q -= (deg / m2) * (deg / m2);
  return q;
}

}  // namespace hmgi
