#pragma once
// Modality-aware K-means partitioning of embeddings and workload-aware
// repartitioning. Assignment is argmin over squared Euclidean distance to
// the fitted centroids, ties to the smallest index.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmgi/errors.hpp"
#include "hmgi/types.hpp"

namespace hmgi {

struct PartitionModel {
  Modality modality;
  std::uint32_t k = 1;
  std::uint32_t dim = 0;
  std::uint64_t model_version = 0;
  std::vector<std::vector<float>> centroids;       // k rows of length dim
  std::vector<std::uint64_t> assignment_counts;    // per cluster

  std::string to_json() const;
  static PartitionModel from_json(const std::string& text);
};

// Lloyd's K-means with k-means++ seeding; iterates until the total centroid
// shift drops below 1e-6 or 100 iterations. Deterministic under seed.
PartitionModel fit_partitions(const std::vector<std::vector<float>>& sample,
                              std::uint32_t k, std::uint64_t seed,
                              const Modality& modality = Modality::text());

std::uint32_t assign_partition(std::span<const float> e,
                               const PartitionModel& model);

// Within-cluster sum of squared distances under the model's centroids.
double kmeans_distortion(const std::vector<std::vector<float>>& points,
                         const PartitionModel& model);

// Rolling window of per-cluster query observations.
class WorkloadStats {
 public:
  WorkloadStats(std::uint32_t clusters, std::size_t window_capacity)
      : counts_(clusters, 0), latency_sums_(clusters, 0.0),
        capacity_(window_capacity) {}

  void record(std::uint32_t cluster, double latency_ms);

  bool window_full() const noexcept { return events_.size() >= capacity_; }
  std::uint32_t clusters() const noexcept {
    return static_cast<std::uint32_t>(counts_.size());
  }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  double mean_latency(std::uint32_t cluster) const {
    return counts_[cluster] == 0 ? 0.0
                                 : latency_sums_[cluster] / counts_[cluster];
  }

  // max(cluster count) / mean(cluster count); 0 when the window is empty.
  double imbalance_ratio() const;

 private:
  std::deque<std::pair<std::uint32_t, double>> events_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> latency_sums_;
  std::size_t capacity_;
};

struct RepartitionPlan {
  std::uint64_t base_model_version = 0;
  PartitionModel refit;
  // Embeddings whose cluster assignment changes: (node id, old, new).
  std::vector<std::tuple<NodeId, std::uint32_t, std::uint32_t>> moves;
};

inline constexpr double kDefaultImbalanceThreshold = 2.0;
inline constexpr std::size_t kRefitSampleCap = 10000;

// Emits a plan when the imbalance ratio strictly exceeds the threshold and
// there is more than one cluster. The caller supplies the current
// population as (node id, embedding) pairs; the refit samples at most
// kRefitSampleCap of them (reservoir, seeded).
std::optional<RepartitionPlan> check_rebalance(
    const WorkloadStats& stats, double threshold, const PartitionModel& model,
    const std::vector<std::pair<NodeId, std::vector<float>>>& population,
    std::uint64_t seed);

}  // namespace hmgi
