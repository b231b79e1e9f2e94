#include "hmgi/bench/synthetic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "hmgi/errors.hpp"

namespace hmgi::bench {

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return (rng() >> 11) * (1.0 / 9007199254740992.0);
}

// Box-Muller on explicit uniforms keeps the stream identical across
// standard libraries.
double gaussian(std::mt19937_64& rng) {
  double u1 = unit_uniform(rng);
  double u2 = unit_uniform(rng);
  if (u1 <= 0.0) u1 = 1e-12;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

constexpr const char* kEdgeTypes[] = {"RELATES", "CITES", "LINKS", "KNOWS"};

}  // namespace

SyntheticKg generate_synthetic_kg(std::uint64_t nodes, std::uint64_t edges,
                                  const std::vector<ModalitySpec>& modalities,
                                  std::uint64_t seed) {
  if (nodes == 0 && edges > 0)
    throw ParameterError("edges without nodes");
  if (nodes > 0 && edges > nodes * (nodes - 1))
    throw ParameterError("edge count exceeds n*(n-1)");
  if (modalities.empty())
    throw ParameterError("at least one modality spec required");
  double total_share = 0.0;
  for (const ModalitySpec& spec : modalities) {
    if (spec.dim == 0 || spec.clusters == 0 || spec.share <= 0.0)
      throw ParameterError("modality spec needs dim, clusters, share > 0");
    total_share += spec.share;
  }

  std::mt19937_64 rng(seed);
  SyntheticKg kg;
  kg.nodes.reserve(nodes);

  // Mixture centers per modality; separation large against the noise scale
  // so planted clusters are recoverable.
  std::vector<std::vector<std::vector<double>>> centers(modalities.size());
  for (std::size_t m = 0; m < modalities.size(); ++m) {
    centers[m].resize(modalities[m].clusters);
    for (auto& center : centers[m]) {
      center.resize(modalities[m].dim);
      for (double& c : center) c = gaussian(rng);
    }
  }

  for (std::uint64_t i = 0; i < nodes; ++i) {
    // Deterministic modality assignment by cumulative share.
    const double pick = (static_cast<double>(i) + 0.5) / nodes * total_share;
    std::size_t m = 0;
    double acc = 0.0;
    for (std::size_t s = 0; s < modalities.size(); ++s) {
      acc += modalities[s].share;
      if (pick <= acc) {
        m = s;
        break;
      }
      m = s;
    }
    const ModalitySpec& spec = modalities[m];
    const std::uint32_t cluster =
        static_cast<std::uint32_t>(unit_uniform(rng) * spec.clusters);

    SyntheticNode node;
    node.modality = spec.modality;
    node.planted_cluster = cluster;
    node.labels.insert("Entity");
    node.labels.insert(spec.modality.name());
    node.embedding.resize(spec.dim);
    for (std::uint32_t d = 0; d < spec.dim; ++d)
      node.embedding[d] = static_cast<float>(centers[m][cluster][d] +
                                             0.08 * gaussian(rng));
    node.props["cluster"] = static_cast<std::int64_t>(cluster);
    node.props["ord"] = static_cast<std::int64_t>(i);
    kg.nodes.push_back(std::move(node));
  }

  // Preferential attachment: destination drawn proportional to degree + 1.
  if (nodes >= 2) {
    std::vector<std::uint64_t> degree(nodes, 0);
    std::uint64_t degree_total = 0;
    std::set<std::tuple<NodeId, NodeId, std::string>> present;
    std::uint64_t made = 0;
    std::uint64_t attempts = 0;
    const std::uint64_t max_attempts = edges * 20 + 100;
    while (made < edges && attempts < max_attempts) {
      ++attempts;
      NodeId src = static_cast<NodeId>(unit_uniform(rng) * nodes);
      NodeId dst;
      const double r = unit_uniform(rng) * (degree_total + nodes);
      if (r < static_cast<double>(nodes) || degree_total == 0) {
        dst = static_cast<NodeId>(unit_uniform(rng) * nodes);
      } else {
        // Walk the degree table; nodes with higher degree attract more.
        double target = unit_uniform(rng) * degree_total;
        double acc = 0.0;
        dst = nodes - 1;
        for (NodeId v = 0; v < nodes; ++v) {
          acc += static_cast<double>(degree[v]);
          if (acc >= target) {
            dst = v;
            break;
          }
        }
      }
      if (src == dst) continue;
      const std::string type =
          kEdgeTypes[static_cast<std::size_t>(unit_uniform(rng) * 4)];
      if (!present.emplace(src, dst, type).second) continue;
      const float weight = static_cast<float>(0.05 + 0.95 * unit_uniform(rng));
      kg.edges.emplace_back(src, dst, type, weight);
      degree[src]++;
      degree[dst]++;
      degree_total += 2;
      ++made;
    }
    if (made < edges)
      throw ParameterError("could not place requested edge count");
  }
  return kg;
}

namespace {

std::string float_text(float v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

void write_graph_jsonl(const std::string& path, const SyntheticKg& kg) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open " + path);
  for (std::size_t i = 0; i < kg.nodes.size(); ++i) {
    const SyntheticNode& n = kg.nodes[i];
    // Hand-rolled embedding array keeps float formatting bit-stable.
    f << "{\"kind\":\"node\",\"id\":" << i << ",\"labels\":[";
    bool first = true;
    for (const std::string& l : n.labels) {
      if (!first) f << ",";
      first = false;
      f << "\"" << l << "\"";
    }
    f << "],\"modality\":\"" << n.modality.name() << "\",\"embedding\":[";
    for (std::size_t d = 0; d < n.embedding.size(); ++d) {
      if (d > 0) f << ",";
      f << float_text(n.embedding[d]);
    }
    f << "],\"props\":{";
    first = true;
    for (const auto& [k, v] : n.props) {
      if (!first) f << ",";
      first = false;
      f << "\"" << k << "\":";
      if (std::holds_alternative<std::int64_t>(v))
        f << std::get<std::int64_t>(v);
      else if (std::holds_alternative<bool>(v))
        f << (std::get<bool>(v) ? "true" : "false");
      else if (std::holds_alternative<double>(v))
        f << std::get<double>(v);
      else
        f << "\"" << std::get<std::string>(v) << "\"";
    }
    f << "}}\n";
  }
  for (const auto& [src, dst, type, weight] : kg.edges) {
    f << "{\"kind\":\"edge\",\"src\":" << src << ",\"dst\":" << dst
      << ",\"type\":\"" << type << "\",\"weight\":" << float_text(weight)
      << "}\n";
  }
  if (!f) throw IoFailure("short write to " + path);
}

}  // namespace hmgi::bench
