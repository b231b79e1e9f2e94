#pragma once
// Learned HNSW parameter prediction: workload features feed an ensemble of
// variance-split regression trees (one ensemble per target, M and ef).
// Without a trained model the engine falls back to the fixed defaults
// (M=32, ef=200) with confidence 0.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmgi/binary_io.hpp"
#include "hmgi/errors.hpp"

namespace hmgi {

inline constexpr std::uint32_t kTunerFeatureCount = 7;

struct WorkloadFeatures {
  double mu_e = 0.0;        // mean embedding component
  double sigma_e = 0.0;     // population std of components
  double query_norm = 0.0;  // mean pre-normalization query norm
  double dim = 0.0;
  double n = 0.0;           // partition size
  double query_rate = 0.0;  // queries in the window
  double k_typical = 0.0;   // median requested k

  std::array<double, kTunerFeatureCount> as_array() const {
    return {mu_e, sigma_e, query_norm, dim, n, query_rate, k_typical};
  }
};

struct QueryObservation {
  double query_norm = 0.0;
  std::uint32_t k = 10;
};

// Statistics over at most 10 000 sampled embeddings; an empty query window
// leaves the query-derived fields at zero.
WorkloadFeatures extract_features(
    const std::vector<std::vector<float>>& embedding_sample, std::uint32_t dim,
    std::uint64_t n, const std::vector<QueryObservation>& window);

struct TunedObservation {
  WorkloadFeatures features;
  std::uint32_t m = 32;
  std::uint32_t ef = 200;
  double recall = 0.0;
  double latency_ms = 0.0;
};

class TrainingLog {
 public:
  TrainingLog() = default;
  explicit TrainingLog(std::string path);  // replays an existing JSONL log

  void record(const WorkloadFeatures& features, std::uint32_t m,
              std::uint32_t ef, double recall, double latency_ms);

  const std::vector<TunedObservation>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<TunedObservation> entries_;
  std::string path_;
};

struct ForestParams {
  std::uint32_t trees = 50;
  std::uint32_t max_depth = 8;
  std::uint32_t min_leaf = 5;
  std::uint64_t seed = 42;
};

class RegressionForest {
 public:
  static RegressionForest train(
      const std::vector<std::array<double, kTunerFeatureCount>>& x,
      const std::vector<double>& y, const ForestParams& params);

  double predict(const std::array<double, kTunerFeatureCount>& x) const;
  // Fraction of trees within +-20% of the ensemble mean.
  double confidence(const std::array<double, kTunerFeatureCount>& x) const;

  void serialize(BinaryWriter& w) const;
  static RegressionForest deserialize(BinaryReader& r);

  std::size_t tree_count() const { return trees_.size(); }

 private:
  struct Node {
    std::int32_t feature = -1;  // -1: leaf
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

  double predict_tree(const Tree& tree,
                      const std::array<double, kTunerFeatureCount>& x) const;

  std::vector<Tree> trees_;
};

struct TunerModel {
  RegressionForest m_forest;
  RegressionForest ef_forest;

  void save(const std::string& path) const;
  static TunerModel load(const std::string& path);
};

inline constexpr double kDefaultLatencyTargetMs = 50.0;

// Labels are the (M, ef) of the Pareto-best observation per feature bucket:
// max recall subject to latency <= target, falling back to min latency.
// Buckets quantize (log10 N, d, k_typical).
std::vector<std::pair<WorkloadFeatures, std::pair<double, double>>>
pareto_labels(const std::vector<TunedObservation>& entries,
              double latency_target_ms);

// Requires at least 20 labeled buckets.
TunerModel train_tuner(const TrainingLog& log,
                       double latency_target_ms = kDefaultLatencyTargetMs,
                       const ForestParams& params = {});

struct ParamPrediction {
  std::uint32_t m = 32;
  std::uint32_t ef = 200;
  double confidence = 0.0;
  bool clamped = false;
  bool fallback = false;
};

inline constexpr std::uint32_t kMinM = 4, kMaxM = 64;
inline constexpr std::uint32_t kMinEf = 16, kMaxEf = 1024;

ParamPrediction predict_params(const WorkloadFeatures& features,
                               const TunerModel* model);

}  // namespace hmgi
