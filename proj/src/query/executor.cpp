#include "hmgi/query/executor.hpp"

#include <cmath>

namespace hmgi::query {

double fuse_score(double d_v, std::span<const double> hop_scores, double w_v,
                  double w_g) {
  double graph_term = 0.0;
  if (!hop_scores.empty()) {
    double sum = 0.0;
    for (double s : hop_scores) sum += s;
    graph_term = sum / static_cast<double>(hop_scores.size());
  }
  return w_v * (1.0 - d_v) + w_g * graph_term;
}

std::vector<float> adjust_dimension(std::span<const float> query,
                                    std::uint32_t target_d) {
  if (query.empty()) throw ZeroVectorAfterAdjust("empty query vector");
  std::vector<float> out(query.begin(),
                         query.begin() + std::min<std::size_t>(query.size(),
                                                               target_d));
  out.resize(target_d, 0.0f);
  double norm_sq = 0.0;
  for (float x : out) norm_sq += double{x} * x;
  if (norm_sq <= 0.0)
    throw ZeroVectorAfterAdjust("adjusted query has zero norm");
  const float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
  for (float& x : out) x *= inv;
  return out;
}

}  // namespace hmgi::query
