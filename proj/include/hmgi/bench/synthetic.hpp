#pragma once
// Synthetic knowledge-graph generator: preferential-attachment edges and
// per-modality Gaussian-mixture embeddings with planted clusters, so
// partition recovery is measurable. Deterministic under seed.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hmgi/types.hpp"

namespace hmgi::bench {

struct ModalitySpec {
  Modality modality = Modality::text();
  std::uint32_t dim = 64;
  double share = 1.0;           // fraction of nodes
  std::uint32_t clusters = 2;   // planted mixture components
};

struct SyntheticNode {
  std::set<std::string> labels;
  Modality modality;
  std::vector<float> embedding;
  std::map<std::string, PropertyValue> props;  // includes planted "cluster"
  std::uint32_t planted_cluster = 0;
};

struct SyntheticKg {
  std::vector<SyntheticNode> nodes;  // node id = index
  std::vector<std::tuple<NodeId, NodeId, std::string, float>> edges;
};

SyntheticKg generate_synthetic_kg(std::uint64_t nodes, std::uint64_t edges,
                                  const std::vector<ModalitySpec>& modalities,
                                  std::uint64_t seed);

// Canonical jsonl dump (node lines then edge lines); identical bytes for
// identical inputs.
void write_graph_jsonl(const std::string& path, const SyntheticKg& kg);

}  // namespace hmgi::bench
