// hmgi command-line harness: ingest/build/query/explain plus the benchmark
// verbs. Engine state lives under --data-dir (HMGI_DATA_DIR by default).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "hmgi/bench/formats.hpp"
#include "hmgi/bench/runner.hpp"
#include "hmgi/engine.hpp"

namespace {

using namespace hmgi;

std::string default_data_dir() {
  const char* env = std::getenv("HMGI_DATA_DIR");
  return env != nullptr && *env != '\0' ? env : ".hmgi_data";
}

QuantBits parse_quant(const std::string& text) {
  if (text == "4") return QuantBits::B4;
  if (text == "8") return QuantBits::B8;
  if (text == "16") return QuantBits::B16;
  if (text == "off" || text == "adaptive") return QuantBits::None;
  throw ConfigError("--quant must be 4, 8, 16, off, or adaptive");
}

struct CommonFlags {
  std::string data_dir = default_data_dir();
  std::uint64_t seed = 42;
  std::string quant = "off";
  bool no_partition = false;
  bool no_fusion = false;
  bool no_delta = false;
  std::string tuner = "off";
  std::uint32_t kmeans_k = 2;
  std::uint32_t m = 32;
  std::uint32_t ef_construction = 200;
};

EngineConfig engine_config(const CommonFlags& flags) {
  EngineConfig config;
  config.seed = flags.seed;
  config.kmeans_k = flags.kmeans_k;
  config.vectors.hnsw.M = flags.m;
  config.vectors.hnsw.ef_construction =
      std::max(flags.ef_construction, flags.m);
  config.vectors.hnsw.seed = flags.seed;
  config.vectors.quant = parse_quant(flags.quant);
  config.vectors.partitioning = !flags.no_partition;
  config.vectors.use_delta = !flags.no_delta;
  config.fusion = !flags.no_fusion;
  config.tuner_enabled = flags.tuner == "on";
  return config;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--data-dir", flags.data_dir,
                  "engine state directory (HMGI_DATA_DIR)");
  cmd->add_option("--seed", flags.seed, "deterministic seed");
  cmd->add_option("--quant", flags.quant, "4|8|16|off|adaptive");
  cmd->add_flag("--no-partition", flags.no_partition,
                "single shared partition");
  cmd->add_flag("--no-fusion", flags.no_fusion, "vector-only scoring");
  cmd->add_flag("--no-delta", flags.no_delta, "apply writes synchronously");
  cmd->add_option("--tuner", flags.tuner, "on|off");
  cmd->add_option("--kmeans-k", flags.kmeans_k, "clusters per modality");
  cmd->add_option("--hnsw-m", flags.m, "HNSW M");
  cmd->add_option("--hnsw-efc", flags.ef_construction, "HNSW efConstruction");
}

ParamMap parse_params(const std::vector<std::string>& raw) {
  ParamMap params;
  for (const std::string& item : raw) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--param expects name=v1,v2,... or name=@file.fvecs");
    std::string name = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    if (!value.empty() && value[0] == '@') {
      auto vectors = bench::load_fvecs(value.substr(1));
      if (vectors.empty()) throw ConfigError("empty fvecs for $" + name);
      params[name] = vectors[0];
    } else {
      std::vector<float> v;
      std::stringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) v.push_back(std::stof(tok));
      params[name] = std::move(v);
    }
  }
  return params;
}

void print_results(const std::vector<query::FusedResult>& results) {
  for (const auto& r : results) {
    std::ostringstream os;
    os << "{\"id\":" << r.id << ",\"S\":" << r.score << ",\"d_v\":" << r.d_v
       << ",\"hops\":[";
    for (std::size_t i = 0; i < r.hop_scores.size(); ++i) {
      if (i > 0) os << ",";
      os << r.hop_scores[i];
    }
    os << "]";
    if (r.community >= 0) os << ",\"community\":" << r.community;
    os << "}";
    std::cout << os.str() << "\n";
  }
}

bench::BenchConfig bench_config(const CommonFlags& flags,
                                const std::string& dataset,
                                std::uint64_t nodes, std::uint64_t edges,
                                std::uint32_t dim, std::uint32_t queries,
                                std::uint32_t k, std::uint32_t ef,
                                std::uint32_t hops, const std::string& weights,
                                std::uint32_t trials, std::uint32_t workers,
                                const std::string& csv) {
  bench::BenchConfig config;
  config.engine = engine_config(flags);
  config.seed = flags.seed;
  if (dataset != "synthetic") config.fvecs_path = dataset;
  config.synthetic_nodes = nodes;
  config.synthetic_edges = edges;
  config.modalities = {{Modality::text(), dim, 1.0, flags.kmeans_k}};
  config.query_count = queries;
  config.k = k;
  if (ef > 0) config.ef = ef;
  config.hops = hops;
  if (!weights.empty()) {
    auto comma = weights.find(',');
    if (comma == std::string::npos)
      throw ConfigError("--weights expects v,g");
    config.w_v = std::stod(weights.substr(0, comma));
    config.w_g = std::stod(weights.substr(comma + 1));
  }
  config.trials = trials;
  config.concurrency = workers;
  config.csv_path = csv;
  config.cache_dir = flags.data_dir + "/cache";
  return config;
}

void print_report(const bench::MetricsReport& report) {
  std::cout << "dataset=" << report.dataset << " vectors=" << report.vectors
            << " dim=" << report.dim << "\n"
            << "recall@k=" << report.recall_at_k
            << " mean_ms=" << report.mean_ms
            << " median_ms=" << report.median_ms << " p95_ms=" << report.p95_ms
            << " p99_ms=" << report.p99_ms << " qps=" << report.qps << "\n"
            << "build_s=" << report.build_seconds
            << " embedding_bytes=" << report.embedding_bytes
            << " peak_rss_bytes=" << report.peak_rss_bytes
            << " stable_hit_share=" << report.cache_hit_rate << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hmgi: hybrid vector-graph index engine"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* ingest = app.add_subcommand("ingest", "load a jsonl graph dataset");
  std::string ingest_input;
  ingest->add_option("--input", ingest_input, "jsonl file")->required();
  add_common(ingest, flags);

  auto* build = app.add_subcommand("build", "fit partitions and merge deltas");
  add_common(build, flags);

  auto* query_cmd = app.add_subcommand("query", "run a hybrid query");
  std::string query_text;
  std::vector<std::string> query_params;
  double progressive_budget = 0.0;
  query_cmd->add_option("text", query_text, "query text ('-' reads stdin)")
      ->required();
  query_cmd->add_option("--param", query_params,
                        "bind $name=v1,v2,... or $name=@file.fvecs");
  query_cmd->add_option("--progressive-budget", progressive_budget,
                        "progressive execution budget in ms");
  add_common(query_cmd, flags);

  auto* explain = app.add_subcommand("explain", "show the query plan");
  std::string explain_text;
  explain->add_option("text", explain_text, "query text")->required();
  add_common(explain, flags);

  std::string dataset = "synthetic";
  std::uint64_t nodes = 10000, edges = 20000;
  std::uint32_t dim = 64, queries = 200, k = 10, ef = 0, hops = 0;
  std::string weights;
  std::uint32_t trials = 5, workers = 1;
  std::string csv;
  double churn = 0.10;
  bool delete_only = false;

  auto add_bench_flags = [&](CLI::App* cmd) {
    cmd->add_option("--dataset", dataset, "'synthetic' or an fvecs path");
    cmd->add_option("--nodes", nodes, "synthetic node count");
    cmd->add_option("--edges", edges, "synthetic edge count");
    cmd->add_option("--dim", dim, "synthetic embedding dimension");
    cmd->add_option("--queries", queries, "queries per trial");
    cmd->add_option("--k", k, "top-k");
    cmd->add_option("--ef", ef, "search ef (0 = engine default)");
    cmd->add_option("--hops", hops, "traversal hops");
    cmd->add_option("--weights", weights, "fusion weights v,g");
    cmd->add_option("--trials", trials, "trials (first is warmup)");
    cmd->add_option("--workers", workers, "concurrent query workers");
    cmd->add_option("--csv", csv, "append a CSV row here");
    add_common(cmd, flags);
  };
  auto* bench_cmd = app.add_subcommand("bench", "query benchmark");
  add_bench_flags(bench_cmd);
  auto* bench_update = app.add_subcommand("bench-update", "churn benchmark");
  bench_update->add_option("--churn", churn, "fraction of vectors churned");
  bench_update->add_flag("--delete-only", delete_only, "churn deletes only");
  add_bench_flags(bench_update);

  auto* snapshot = app.add_subcommand("snapshot", "save engine state");
  std::string snap_out;
  snapshot->add_option("--out", snap_out, "target directory")->required();
  add_common(snapshot, flags);

  auto* restore = app.add_subcommand("restore", "load engine state");
  std::string restore_from;
  restore->add_option("--from", restore_from, "source directory")->required();
  add_common(restore, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      auto engine = std::make_unique<HmgiEngine>(engine_config(flags));
      std::filesystem::create_directories(flags.data_dir);
      engine->attach_delta_log(flags.data_dir + "/delta.log");
      auto summary = bench::load_graph_jsonl(ingest_input, *engine);
      engine->save(flags.data_dir);
      std::cout << "ingested nodes=" << summary.nodes
                << " edges=" << summary.edges << " into " << flags.data_dir
                << "\n";
    } else if (build->parsed()) {
      auto engine = HmgiEngine::load(flags.data_dir);
      engine->fit_all_partitions(flags.kmeans_k, flags.seed);
      auto report = engine->vacuum();
      engine->save(flags.data_dir);
      std::cout << "merged inserts=" << report.inserted
                << " updates=" << report.updated
                << " deletes=" << report.deleted
                << " compactions=" << report.compacted_partitions << "\n";
    } else if (query_cmd->parsed()) {
      if (query_text == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        query_text = buf.str();
      }
      auto engine = HmgiEngine::load(flags.data_dir);
      auto ast = query::parse(query_text);
      auto plan = engine->plan_query(ast);
      auto params = parse_params(query_params);
      if (progressive_budget > 0.0) {
        auto rounds = engine->execute_progressive(plan, engine->open_snapshot(),
                                                  progressive_budget, params);
        for (const auto& round : rounds) {
          std::cout << "# ef=" << round.ef << " elapsed_ms=" << round.elapsed_ms
                    << "\n";
          print_results(round.results);
        }
      } else {
        print_results(engine->execute(plan, engine->open_snapshot(), params));
      }
    } else if (explain->parsed()) {
      auto engine = HmgiEngine::load(flags.data_dir);
      auto ast = query::parse(explain_text);
      auto plan = engine->plan_query(ast);
      std::cout << plan.explain(engine->config().cost);
    } else if (bench_cmd->parsed()) {
      auto config = bench_config(flags, dataset, nodes, edges, dim, queries, k,
                                 ef, hops, weights, trials, workers, csv);
      print_report(bench::run_benchmark(config));
    } else if (bench_update->parsed()) {
      auto config = bench_config(flags, dataset, nodes, edges, dim, queries, k,
                                 ef, hops, weights, trials, workers, csv);
      auto report = bench::run_update_benchmark(config, churn, delete_only);
      std::cout << "churn_ops=" << report.churn_ops
                << " staging_p50_us=" << report.staging_p50_us
                << " staging_p95_us=" << report.staging_p95_us
                << " staging_p99_us=" << report.staging_p99_us << "\n"
                << "query_success_rate=" << report.query_success_rate
                << " recall_vs_rebuilt=" << report.recall_vs_rebuilt << "\n";
    } else if (snapshot->parsed()) {
      auto engine = HmgiEngine::load(flags.data_dir);
      engine->save(snap_out);
      std::cout << "snapshot written to " << snap_out << "\n";
    } else if (restore->parsed()) {
      auto engine = HmgiEngine::load(restore_from);
      engine->save(flags.data_dir);
      std::cout << "restored " << restore_from << " into " << flags.data_dir
                << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
