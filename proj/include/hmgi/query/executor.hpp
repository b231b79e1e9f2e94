#pragma once
// Score fusion and query-vector dimension handling.
//
// Fused score: S = w_v * (1 - d_v) + w_g * (1/h) * sum(s_g_i). A candidate
// reached only by traversal carries d_v = 1 (neutral similarity); h = 0
// makes the graph term 0.

#include <cstdint>
#include <span>
#include <vector>

#include "hmgi/errors.hpp"
#include "hmgi/types.hpp"

namespace hmgi::query {

double fuse_score(double d_v, std::span<const double> hop_scores, double w_v,
                  double w_g);

// Pads with zeros or truncates to target_d, then re-normalizes.
std::vector<float> adjust_dimension(std::span<const float> query,
                                    std::uint32_t target_d);

struct FusedResult {
  NodeId id = kInvalidNode;
  double score = 0.0;  // S
  double d_v = 1.0;
  std::vector<double> hop_scores;
  std::int64_t community = -1;  // -1 when not computed

  bool operator==(const FusedResult&) const = default;
};

inline bool fused_order(const FusedResult& a, const FusedResult& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

}  // namespace hmgi::query
