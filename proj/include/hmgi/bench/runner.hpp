#pragma once
// Benchmark harness: dataset build, query workloads, metric aggregation
// and versioned CSV emission.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmgi/bench/synthetic.hpp"
#include "hmgi/engine.hpp"

namespace hmgi::bench {

inline constexpr const char* kCsvSchemaVersion = "hmgi_csv_v1";

struct BenchConfig {
  std::string name = "default";
  std::string dataset_name = "synthetic";
  std::optional<std::string> fvecs_path;  // overrides the synthetic dataset
  std::uint64_t synthetic_nodes = 1000;
  std::uint64_t synthetic_edges = 2000;
  std::vector<ModalitySpec> modalities = {ModalitySpec{}};

  std::uint32_t query_count = 100;
  std::uint32_t k = 10;
  std::optional<std::uint32_t> ef;
  std::uint32_t hops = 0;
  double w_v = 1.0;
  double w_g = 0.0;
  std::uint32_t trials = 5;  // first trial is warmup, excluded
  std::uint32_t concurrency = 1;
  std::optional<double> budget_ms;
  std::uint64_t seed = 42;

  EngineConfig engine;
  std::string csv_path;
  std::string cache_dir = ".hmgi_cache";

  void validate() const;
};

struct MetricsReport {
  std::string config_name;
  std::string dataset;
  std::uint64_t vectors = 0;
  std::uint32_t dim = 0;
  double recall_at_k = 0.0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double p99_ms = 0.0;
  double qps = 0.0;
  double build_seconds = 0.0;
  std::uint64_t embedding_bytes = 0;
  std::uint64_t peak_rss_bytes = 0;
  double cache_hit_rate = 0.0;  // share of returned hits served by stable
  std::vector<double> per_query_recall;
};

struct UpdateReport {
  double staging_p50_us = 0.0;
  double staging_p95_us = 0.0;
  double staging_p99_us = 0.0;
  double query_success_rate = 0.0;
  double recall_vs_rebuilt = 0.0;
  std::uint64_t churn_ops = 0;
};

// Executes build + workload; appends one CSV row per run when csv_path is
// set. Recall is measured against the exact cosine oracle.
MetricsReport run_benchmark(const BenchConfig& config);

// Interleaves staged churn (delete + insert) with queries.
UpdateReport run_update_benchmark(const BenchConfig& config,
                                  double churn_fraction,
                                  bool delete_only = false);

std::string csv_header();
std::string csv_row(const BenchConfig& config, const MetricsReport& report);
void append_csv(const std::string& path, const BenchConfig& config,
                const MetricsReport& report);

// VmHWM from /proc/self/status, in bytes (0 when unavailable).
std::uint64_t peak_rss_bytes();

}  // namespace hmgi::bench
