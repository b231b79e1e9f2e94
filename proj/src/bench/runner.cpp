#include "hmgi/bench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "hmgi/bench/formats.hpp"
#include "hmgi/bench/ground_truth.hpp"

namespace hmgi::bench {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

double unit_uniform(std::mt19937_64& rng) {
  return (rng() >> 11) * (1.0 / 9007199254740992.0);
}

double gaussian(std::mt19937_64& rng) {
  double u1 = unit_uniform(rng);
  double u2 = unit_uniform(rng);
  if (u1 <= 0.0) u1 = 1e-12;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double idx = p * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = idx - lo;
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

struct BuiltDataset {
  std::unique_ptr<HmgiEngine> engine;
  std::vector<std::pair<NodeId, std::vector<float>>> logical;  // target modality
  std::vector<std::vector<float>> queries;
  Modality target;
  std::uint32_t dim = 0;
  double build_seconds = 0.0;
};

BuiltDataset build_dataset(const BenchConfig& config) {
  BuiltDataset built;
  const auto t0 = Clock::now();
  built.engine = std::make_unique<HmgiEngine>(config.engine);
  HmgiEngine& engine = *built.engine;

  std::mt19937_64 rng(config.seed ^ 0x5bd1e995u);

  if (config.fvecs_path.has_value()) {
    auto raw = load_fvecs(*config.fvecs_path);
    if (raw.empty()) throw ConfigError("fvecs dataset is empty");
    built.target = Modality::text();
    built.dim = static_cast<std::uint32_t>(raw[0].size());
    engine.register_modality(built.target, built.dim);
    for (auto& v : raw)
      engine.add_node({"Entity"}, built.target, std::move(v), {});
  } else {
    SyntheticKg kg =
        generate_synthetic_kg(config.synthetic_nodes, config.synthetic_edges,
                              config.modalities, config.seed);
    for (const ModalitySpec& spec : config.modalities)
      engine.register_modality(spec.modality, spec.dim);
    for (auto& node : kg.nodes)
      engine.add_node(node.labels, node.modality, std::move(node.embedding),
                      node.props);
    for (const auto& [src, dst, type, weight] : kg.edges)
      engine.add_edge(src, dst, type, weight);
    built.target = config.modalities.front().modality;
    built.dim = config.modalities.front().dim;
  }

  if (config.engine.vectors.partitioning && config.engine.kmeans_k > 1)
    engine.fit_all_partitions(config.engine.kmeans_k, config.seed);
  engine.vacuum();
  built.build_seconds = ms_between(t0, Clock::now()) / 1000.0;

  auto snapshot = engine.open_snapshot();
  built.logical = engine.vectors().logical_entries(snapshot, built.target);
  if (built.logical.empty()) throw ConfigError("dataset has no vectors");

  // Queries: dataset points of the target modality plus small noise.
  built.queries.reserve(config.query_count);
  for (std::uint32_t i = 0; i < config.query_count; ++i) {
    const auto& base =
        built.logical[static_cast<std::size_t>(unit_uniform(rng) *
                                               built.logical.size())]
            .second;
    std::vector<float> q(base.size());
    for (std::size_t d = 0; d < base.size(); ++d)
      q[d] = base[d] + static_cast<float>(0.02 * gaussian(rng));
    built.queries.push_back(std::move(q));
  }
  return built;
}

}  // namespace

void BenchConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (query_count < 1) throw ConfigError("query_count must be >= 1");
  if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
  if (!fvecs_path.has_value() && modalities.empty())
    throw ConfigError("synthetic dataset needs modality specs");
}

std::uint64_t peak_rss_bytes() {
  std::ifstream f("/proc/self/status");
  std::string line;
  while (std::getline(f, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream is(line.substr(6));
      std::uint64_t kb = 0;
      is >> kb;
      return kb * 1024;
    }
  }
  return 0;
}

MetricsReport run_benchmark(const BenchConfig& config) {
  config.validate();
  BuiltDataset built = build_dataset(config);
  HmgiEngine& engine = *built.engine;

  auto truth = exact_topk_cached(config.cache_dir, built.logical,
                                 built.queries, config.k);

  // Queries ask TOP k so recall against the vector oracle is well-defined.
  std::ostringstream query_text;
  query_text << "VECTOR_SEARCH(" << built.target.name() << ", $q, k="
             << config.k;
  if (config.ef) query_text << ", ef=" << *config.ef;
  query_text << ")";
  if (config.hops > 0) query_text << " TRAVERSE hops=" << config.hops;
  query_text << " SIMILARITY_WEIGHT v=" << config.w_v << " g=" << config.w_g
             << " RETURN TOP " << config.k;
  query::HybridQueryAst ast = query::parse(query_text.str());
  query::HybridQueryPlan plan = engine.plan_query(ast);

  MetricsReport report;
  report.config_name = config.name;
  report.dataset = config.fvecs_path.value_or(config.dataset_name);
  report.vectors = built.logical.size();
  report.dim = built.dim;
  report.build_seconds = built.build_seconds;
  report.per_query_recall.assign(built.queries.size(), 0.0);

  std::vector<double> latencies;
  std::uint64_t stable_hits = 0;
  std::uint64_t total_hits = 0;
  double workload_seconds = 0.0;

  for (std::uint32_t trial = 0; trial < config.trials; ++trial) {
    const bool warmup = trial == 0 && config.trials > 1;
    auto snapshot = engine.open_snapshot();
    std::vector<double> trial_latency(built.queries.size(), 0.0);
    std::vector<double> trial_recall(built.queries.size(), 0.0);
    std::vector<std::uint64_t> trial_stable(built.queries.size(), 0);
    std::vector<std::uint64_t> trial_hits(built.queries.size(), 0);

    const auto t0 = Clock::now();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const std::size_t qi = next.fetch_add(1);
        if (qi >= built.queries.size()) break;
        ParamMap params{{"q", built.queries[qi]}};
        QueryStats stats;
        const auto q0 = Clock::now();
        auto results = engine.execute(plan, snapshot, params, &stats);
        trial_latency[qi] = ms_between(q0, Clock::now());
        std::vector<NodeId> ids;
        ids.reserve(results.size());
        for (const auto& r : results) ids.push_back(r.id);
        trial_recall[qi] = recall_at_k(ids, truth[qi], config.k);
        trial_stable[qi] = stats.stable_hits;
        trial_hits[qi] = stats.stable_hits + stats.delta_hits;
      }
    };
    std::vector<std::thread> pool;
    for (std::uint32_t w = 1; w < config.concurrency; ++w)
      pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    const double trial_seconds = ms_between(t0, Clock::now()) / 1000.0;

    if (warmup) continue;
    workload_seconds += trial_seconds;
    for (std::size_t qi = 0; qi < built.queries.size(); ++qi) {
      latencies.push_back(trial_latency[qi]);
      report.per_query_recall[qi] = trial_recall[qi];
      stable_hits += trial_stable[qi];
      total_hits += trial_hits[qi];
    }
  }

  double recall_sum = 0.0;
  for (double r : report.per_query_recall) recall_sum += r;
  report.recall_at_k = recall_sum / report.per_query_recall.size();
  report.mean_ms =
      std::accumulate(latencies.begin(), latencies.end(), 0.0) /
      std::max<std::size_t>(1, latencies.size());
  report.median_ms = percentile(latencies, 0.50);
  report.p95_ms = percentile(latencies, 0.95);
  report.p99_ms = percentile(latencies, 0.99);
  report.qps = workload_seconds > 0.0
                   ? static_cast<double>(latencies.size()) / workload_seconds
                   : 0.0;
  report.embedding_bytes = engine.vectors().embedding_payload_bytes();
  report.peak_rss_bytes = peak_rss_bytes();
  report.cache_hit_rate =
      total_hits > 0 ? static_cast<double>(stable_hits) / total_hits : 0.0;

  if (!config.csv_path.empty()) append_csv(config.csv_path, config, report);
  return report;
}

UpdateReport run_update_benchmark(const BenchConfig& config,
                                  double churn_fraction, bool delete_only) {
  config.validate();
  if (churn_fraction < 0.0 || churn_fraction > 1.0)
    throw ConfigError("churn fraction must be in [0, 1]");
  BuiltDataset built = build_dataset(config);
  HmgiEngine& engine = *built.engine;

  std::mt19937_64 rng(config.seed ^ 0xda3e39cb94b95bdbULL);
  const auto churn_count =
      static_cast<std::uint64_t>(churn_fraction * built.logical.size());

  UpdateReport report;
  report.churn_ops = churn_count;
  std::vector<double> stage_us;
  std::uint64_t query_ok = 0;
  std::uint64_t query_total = 0;

  // Interleave: one churn op, then one query, round-robin.
  std::size_t qi = 0;
  for (std::uint64_t op = 0; op < churn_count; ++op) {
    const std::size_t victim_idx =
        static_cast<std::size_t>(unit_uniform(rng) * built.logical.size());
    const NodeId victim = built.logical[victim_idx].first;
    const auto t0 = Clock::now();
    if (engine.graph().has_node(victim)) engine.remove_node(victim);
    if (!delete_only) {
      std::vector<float> fresh(built.dim);
      for (auto& x : fresh) x = static_cast<float>(gaussian(rng));
      engine.add_node({"Entity"}, built.target, std::move(fresh), {});
    }
    stage_us.push_back(
        std::chrono::duration<double, std::micro>(Clock::now() - t0).count());

    if (!built.queries.empty()) {
      ++query_total;
      try {
        auto snapshot = engine.open_snapshot();
        auto hits = engine.vector_search(snapshot, built.target,
                                         built.queries[qi % built.queries.size()],
                                         config.k, config.ef);
        if (delete_only) {
          // Deleted ids must never resurface.
          for (const SearchHit& h : hits)
            if (!engine.vectors().contains(h.id)) throw UnknownId("ghost hit");
        }
        ++query_ok;
      } catch (const Error&) {
        // counted as a failed query
      }
      ++qi;
    }
  }

  report.staging_p50_us = percentile(stage_us, 0.50);
  report.staging_p95_us = percentile(stage_us, 0.95);
  report.staging_p99_us = percentile(stage_us, 0.99);
  report.query_success_rate =
      query_total > 0 ? static_cast<double>(query_ok) / query_total : 1.0;

  // Recall during churn, judged against a rebuilt exact oracle.
  auto snapshot = engine.open_snapshot();
  auto logical_now = engine.vectors().logical_entries(snapshot, built.target);
  if (!logical_now.empty() && !built.queries.empty()) {
    auto truth = exact_topk(logical_now, built.queries, config.k);
    double recall_sum = 0.0;
    for (std::size_t i = 0; i < built.queries.size(); ++i) {
      auto hits = engine.vector_search(snapshot, built.target,
                                       built.queries[i], config.k, config.ef);
      std::vector<NodeId> ids;
      for (const SearchHit& h : hits) ids.push_back(h.id);
      recall_sum += recall_at_k(ids, truth[i], config.k);
    }
    report.recall_vs_rebuilt = recall_sum / built.queries.size();
  }
  return report;
}

std::string csv_header() {
  return "schema,config,dataset,vectors,dim,k,ef,hops,quant,partitioning,"
         "fusion,delta,tuner,seed,trials,recall_at_k,mean_ms,median_ms,"
         "p95_ms,p99_ms,qps,build_s,embedding_bytes,peak_rss_bytes,"
         "cache_hit_rate";
}

std::string csv_row(const BenchConfig& config, const MetricsReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  os << kCsvSchemaVersion << ',' << config.name << ',' << report.dataset << ','
     << report.vectors << ',' << report.dim << ',' << config.k << ','
     << (config.ef ? std::to_string(*config.ef) : "default") << ','
     << config.hops << ',' << static_cast<int>(config.engine.vectors.quant)
     << ',' << (config.engine.vectors.partitioning ? 1 : 0) << ','
     << (config.engine.fusion ? 1 : 0) << ','
     << (config.engine.vectors.use_delta ? 1 : 0) << ','
     << (config.engine.tuner_enabled ? 1 : 0) << ',' << config.seed << ','
     << config.trials << ',' << report.recall_at_k << ',' << report.mean_ms
     << ',' << report.median_ms << ',' << report.p95_ms << ',' << report.p99_ms
     << ',' << report.qps << ',' << report.build_seconds << ','
     << report.embedding_bytes << ',' << report.peak_rss_bytes << ','
     << report.cache_hit_rate;
  return os.str();
}

void append_csv(const std::string& path, const BenchConfig& config,
                const MetricsReport& report) {
  namespace fs = std::filesystem;
  const bool fresh = !fs::exists(path);
  std::ofstream f(path, std::ios::app);
  if (!f) throw IoFailure("cannot open " + path);
  if (fresh) f << csv_header() << "\n";
  f << csv_row(config, report) << "\n";
}

}  // namespace hmgi::bench
