#pragma once
// Test-only oracles, written independently of the library code paths they
// check: double-precision exhaustive cosine top-k, direct evaluations of
// the fusion and cost formulas, and deterministic random data helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

inline double uniform01(std::mt19937_64& rng) {
  return (rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim,
                                        double lo = -1.0, double hi = 1.0) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(lo + (hi - lo) * uniform01(rng));
  return v;
}

inline std::vector<double> normalize(const std::vector<float>& v) {
  double norm = 0.0;
  for (float x : v) norm += double(x) * x;
  norm = std::sqrt(norm);
  std::vector<double> out(v.size(), 0.0);
  if (norm <= 0.0) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
  return out;
}

inline double cosine_distance(const std::vector<float>& a,
                              const std::vector<float>& b) {
  auto ua = normalize(a);
  auto ub = normalize(b);
  double dot = 0.0;
  for (std::size_t i = 0; i < ua.size() && i < ub.size(); ++i)
    dot += ua[i] * ub[i];
  return 1.0 - dot;
}

// Exhaustive cosine top-k over (id, vector) pairs; ties by smaller id.
inline std::vector<std::uint64_t> brute_topk(
    const std::vector<std::pair<std::uint64_t, std::vector<float>>>& data,
    const std::vector<float>& query, std::size_t k) {
  std::vector<std::pair<double, std::uint64_t>> scored;
  scored.reserve(data.size());
  for (const auto& [id, v] : data)
    scored.emplace_back(cosine_distance(v, query), id);
  std::sort(scored.begin(), scored.end());
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i)
    out.push_back(scored[i].second);
  return out;
}

inline double recall(const std::vector<std::uint64_t>& got,
                     const std::vector<std::uint64_t>& truth, std::size_t k) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size() && i < k; ++i)
    for (std::size_t j = 0; j < got.size() && j < k; ++j)
      if (truth[i] == got[j]) {
        ++hit;
        break;
      }
  return double(hit) / double(k);
}

// Fusion formula, evaluated directly.
inline double fuse(double d_v, const std::vector<double>& hop_scores,
                   double w_v, double w_g) {
  double graph = 0.0;
  if (!hop_scores.empty()) {
    double s = 0.0;
    for (double x : hop_scores) s += x;
    graph = s / double(hop_scores.size());
  }
  return w_v * (1.0 - d_v) + w_g * graph;
}

// Cost formula, evaluated directly.
inline double cost(double alpha, double beta, double gamma, double n, double d,
                   double h, double p) {
  return alpha * std::log(n) + beta * (d * h) + gamma * p * std::log(n / p);
}

}  // namespace oracle
