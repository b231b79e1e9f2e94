#include "hmgi/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

namespace hmgi {

namespace {
constexpr std::size_t kFeatureSampleCap = 10000;
constexpr char kModelMagic[] = "HMGT";
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

WorkloadFeatures extract_features(
    const std::vector<std::vector<float>>& embedding_sample, std::uint32_t dim,
    std::uint64_t n, const std::vector<QueryObservation>& window) {
  WorkloadFeatures f;
  f.dim = dim;
  f.n = static_cast<double>(n);

  std::size_t take = std::min(embedding_sample.size(), kFeatureSampleCap);
  std::uint64_t components = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i)
    for (float x : embedding_sample[i]) {
      sum += x;
      ++components;
    }
  if (components > 0) {
    f.mu_e = sum / static_cast<double>(components);
    double sq = 0.0;
    for (std::size_t i = 0; i < take; ++i)
      for (float x : embedding_sample[i]) {
        double d = x - f.mu_e;
        sq += d * d;
      }
    f.sigma_e = std::sqrt(sq / static_cast<double>(components));
  }

  if (!window.empty()) {
    double norm_sum = 0.0;
    std::vector<std::uint32_t> ks;
    ks.reserve(window.size());
    for (const QueryObservation& q : window) {
      norm_sum += q.query_norm;
      ks.push_back(q.k);
    }
    f.query_norm = norm_sum / static_cast<double>(window.size());
    f.query_rate = static_cast<double>(window.size());
    std::sort(ks.begin(), ks.end());
    f.k_typical = ks[ks.size() / 2];
  }
  return f;
}

TrainingLog::TrainingLog(std::string path) : path_(std::move(path)) {
  std::ifstream f(path_);
  if (!f) return;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;  // tolerate a torn tail line
    TunedObservation obs;
    obs.features.mu_e = j.value("mu_e", 0.0);
    obs.features.sigma_e = j.value("sigma_e", 0.0);
    obs.features.query_norm = j.value("q_norm", 0.0);
    obs.features.dim = j.value("dim", 0.0);
    obs.features.n = j.value("n", 0.0);
    obs.features.query_rate = j.value("rate", 0.0);
    obs.features.k_typical = j.value("k", 0.0);
    obs.m = j.value("m", 32u);
    obs.ef = j.value("ef", 200u);
    obs.recall = j.value("recall", 0.0);
    obs.latency_ms = j.value("latency_ms", 0.0);
    entries_.push_back(obs);
  }
}

void TrainingLog::record(const WorkloadFeatures& features, std::uint32_t m,
                         std::uint32_t ef, double recall, double latency_ms) {
  if (recall < 0.0 || recall > 1.0)
    throw ParameterError("recall must be in [0, 1]");
  if (latency_ms <= 0.0) throw ParameterError("latency must be positive");
  TunedObservation obs{features, m, ef, recall, latency_ms};
  entries_.push_back(obs);
  if (path_.empty()) return;
  nlohmann::json j{{"mu_e", features.mu_e},     {"sigma_e", features.sigma_e},
                   {"q_norm", features.query_norm}, {"dim", features.dim},
                   {"n", features.n},           {"rate", features.query_rate},
                   {"k", features.k_typical},   {"m", m},
                   {"ef", ef},                  {"recall", recall},
                   {"latency_ms", latency_ms}};
  std::ofstream f(path_, std::ios::app);
  if (!f) throw IoFailure("cannot append to training log " + path_);
  f << j.dump() << "\n";
}

std::vector<std::pair<WorkloadFeatures, std::pair<double, double>>>
pareto_labels(const std::vector<TunedObservation>& entries,
              double latency_target_ms) {
  using BucketKey = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
  auto key_of = [](const WorkloadFeatures& f) {
    double log_n = std::log10(std::max(f.n, 1.0));
    return BucketKey{static_cast<std::int64_t>(std::llround(log_n * 10.0)),
                     static_cast<std::int64_t>(std::llround(f.dim)),
                     static_cast<std::int64_t>(std::llround(f.k_typical))};
  };

  std::map<BucketKey, const TunedObservation*> best;
  for (const TunedObservation& obs : entries) {
    auto [it, inserted] = best.try_emplace(key_of(obs.features), &obs);
    if (inserted) continue;
    const TunedObservation* cur = it->second;
    const bool obs_ok = obs.latency_ms <= latency_target_ms;
    const bool cur_ok = cur->latency_ms <= latency_target_ms;
    bool replace;
    if (obs_ok != cur_ok) {
      replace = obs_ok;
    } else if (obs_ok) {
      replace = obs.recall > cur->recall ||
                (obs.recall == cur->recall && obs.latency_ms < cur->latency_ms);
    } else {
      replace = obs.latency_ms < cur->latency_ms ||
                (obs.latency_ms == cur->latency_ms && obs.recall > cur->recall);
    }
    if (replace) it->second = &obs;
  }

  std::vector<std::pair<WorkloadFeatures, std::pair<double, double>>> labels;
  labels.reserve(best.size());
  for (const auto& [key, obs] : best)
    labels.emplace_back(obs->features,
                        std::make_pair(static_cast<double>(obs->m),
                                       static_cast<double>(obs->ef)));
  return labels;
}

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return (rng() >> 11) * (1.0 / 9007199254740992.0);
}

struct TreeBuilder {
  const std::vector<std::array<double, kTunerFeatureCount>>& x;
  const std::vector<double>& y;
  const ForestParams& params;
  std::mt19937_64& rng;
  std::vector<std::array<double, 5>>* nodes;  // staging: f, thr, l, r, value

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  Split best_split(const std::vector<std::uint32_t>& idx,
                   const std::vector<int>& features) const {
    Split best;
    double total = 0.0, total_sq = 0.0;
    for (std::uint32_t i : idx) {
      total += y[i];
      total_sq += y[i] * y[i];
    }
    const double parent_sse =
        total_sq - total * total / static_cast<double>(idx.size());

    for (int f : features) {
      std::vector<std::uint32_t> order = idx;
      std::sort(order.begin(), order.end(),
                [&](std::uint32_t a, std::uint32_t b) {
                  if (x[a][f] != x[b][f]) return x[a][f] < x[b][f];
                  return a < b;
                });
      double left_sum = 0.0, left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const double yi = y[order[i]];
        left_sum += yi;
        left_sq += yi * yi;
        const std::size_t nl = i + 1;
        const std::size_t nr = order.size() - nl;
        if (x[order[i]][f] == x[order[i + 1]][f]) continue;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        const double right_sum = total - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / nl) +
                           (right_sq - right_sum * right_sum / nr);
        const double gain = parent_sse - sse;
        if (gain > best.gain + 1e-12) {
          best.feature = f;
          best.threshold = 0.5 * (x[order[i]][f] + x[order[i + 1]][f]);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  std::uint32_t build(std::vector<std::uint32_t> idx, std::uint32_t depth) {
    const std::uint32_t node_id = static_cast<std::uint32_t>(nodes->size());
    nodes->push_back({});
    double mean = 0.0;
    for (std::uint32_t i : idx) mean += y[i];
    mean /= static_cast<double>(idx.size());

    if (depth >= params.max_depth || idx.size() < 2 * params.min_leaf) {
      (*nodes)[node_id] = {-1, 0, 0, 0, mean};
      return node_id;
    }

    // Feature subsample of size ~sqrt(total); if nothing splits, retry with
    // every feature before giving up.
    std::vector<int> all(kTunerFeatureCount);
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> sampled = all;
    for (std::size_t i = sampled.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(unit_uniform(rng) * (i + 1));
      std::swap(sampled[i], sampled[j]);
    }
    sampled.resize(3);
    std::sort(sampled.begin(), sampled.end());

    Split split = best_split(idx, sampled);
    if (split.feature < 0) split = best_split(idx, all);
    if (split.feature < 0) {
      (*nodes)[node_id] = {-1, 0, 0, 0, mean};
      return node_id;
    }

    std::vector<std::uint32_t> left, right;
    for (std::uint32_t i : idx)
      (x[i][split.feature] <= split.threshold ? left : right).push_back(i);
    const std::uint32_t l = build(std::move(left), depth + 1);
    const std::uint32_t r = build(std::move(right), depth + 1);
    (*nodes)[node_id] = {static_cast<double>(split.feature), split.threshold,
                         static_cast<double>(l), static_cast<double>(r), 0.0};
    return node_id;
  }
};

}  // namespace

RegressionForest RegressionForest::train(
    const std::vector<std::array<double, kTunerFeatureCount>>& x,
    const std::vector<double>& y, const ForestParams& params) {
  if (x.empty() || x.size() != y.size())
    throw ParameterError("training data empty or mismatched");
  RegressionForest forest;
  std::mt19937_64 rng(params.seed);
  for (std::uint32_t t = 0; t < params.trees; ++t) {
    std::vector<std::uint32_t> bootstrap(x.size());
    for (auto& i : bootstrap)
      i = static_cast<std::uint32_t>(unit_uniform(rng) * x.size());
    std::sort(bootstrap.begin(), bootstrap.end());
    std::vector<std::array<double, 5>> staged;
    TreeBuilder builder{x, y, params, rng, &staged};
    builder.build(std::move(bootstrap), 0);
    Tree tree(staged.size());
    for (std::size_t i = 0; i < staged.size(); ++i) {
      tree[i].feature = static_cast<std::int32_t>(staged[i][0]);
      tree[i].threshold = staged[i][1];
      tree[i].left = static_cast<std::uint32_t>(staged[i][2]);
      tree[i].right = static_cast<std::uint32_t>(staged[i][3]);
      tree[i].value = staged[i][4];
    }
    forest.trees_.push_back(std::move(tree));
  }
  return forest;
}

double RegressionForest::predict_tree(
    const Tree& tree, const std::array<double, kTunerFeatureCount>& x) const {
  std::uint32_t node = 0;
  while (tree[node].feature >= 0)
    node = x[tree[node].feature] <= tree[node].threshold ? tree[node].left
                                                         : tree[node].right;
  return tree[node].value;
}

double RegressionForest::predict(
    const std::array<double, kTunerFeatureCount>& x) const {
  if (trees_.empty()) throw ParameterError("forest not trained");
  double sum = 0.0;
  for (const Tree& t : trees_) sum += predict_tree(t, x);
  return sum / static_cast<double>(trees_.size());
}

double RegressionForest::confidence(
    const std::array<double, kTunerFeatureCount>& x) const {
  if (trees_.empty()) return 0.0;
  const double mean = predict(x);
  const double band = 0.2 * std::abs(mean);
  std::size_t within = 0;
  for (const Tree& t : trees_) {
    double p = predict_tree(t, x);
    if (std::abs(p - mean) <= band + 1e-12) ++within;
  }
  return static_cast<double>(within) / static_cast<double>(trees_.size());
}

void RegressionForest::serialize(BinaryWriter& w) const {
  w.put_u32(static_cast<std::uint32_t>(trees_.size()));
  for (const Tree& tree : trees_) {
    w.put_u32(static_cast<std::uint32_t>(tree.size()));
    for (const Node& n : tree) {
      w.put_u32(static_cast<std::uint32_t>(n.feature));
      w.put_f64(n.threshold);
      w.put_u32(n.left);
      w.put_u32(n.right);
      w.put_f64(n.value);
    }
  }
}

RegressionForest RegressionForest::deserialize(BinaryReader& r) {
  RegressionForest forest;
  std::uint32_t trees = r.get_u32();
  forest.trees_.resize(trees);
  for (auto& tree : forest.trees_) {
    std::uint32_t nodes = r.get_u32();
    tree.resize(nodes);
    for (Node& n : tree) {
      n.feature = static_cast<std::int32_t>(r.get_u32());
      n.threshold = r.get_f64();
      n.left = r.get_u32();
      n.right = r.get_u32();
      n.value = r.get_f64();
    }
  }
  return forest;
}

void TunerModel::save(const std::string& path) const {
  SnapshotWriter snap(kModelMagic, kModelVersion);
  BinaryWriter m;
  m_forest.serialize(m);
  snap.add_section(1, m);
  BinaryWriter e;
  ef_forest.serialize(e);
  snap.add_section(2, e);
  snap.write_file(path);
}

TunerModel TunerModel::load(const std::string& path) {
  SnapshotReader snap(path, kModelMagic, kModelVersion);
  TunerModel model;
  BinaryReader m(snap.section(1));
  model.m_forest = RegressionForest::deserialize(m);
  BinaryReader e(snap.section(2));
  model.ef_forest = RegressionForest::deserialize(e);
  return model;
}

TunerModel train_tuner(const TrainingLog& log, double latency_target_ms,
                       const ForestParams& params) {
  auto labels = pareto_labels(log.entries(), latency_target_ms);
  if (labels.size() < 20)
    throw InsufficientData(std::to_string(labels.size()) +
                           " labeled buckets, need 20");
  std::vector<std::array<double, kTunerFeatureCount>> x;
  std::vector<double> ym, yef;
  x.reserve(labels.size());
  for (const auto& [features, targets] : labels) {
    x.push_back(features.as_array());
    ym.push_back(targets.first);
    yef.push_back(targets.second);
  }
  TunerModel model;
  model.m_forest = RegressionForest::train(x, ym, params);
  ForestParams ef_params = params;
  ef_params.seed = params.seed + 1;
  model.ef_forest = RegressionForest::train(x, yef, ef_params);
  return model;
}

ParamPrediction predict_params(const WorkloadFeatures& features,
                               const TunerModel* model) {
  ParamPrediction out;
  if (model == nullptr || model->m_forest.tree_count() == 0) {
    out.fallback = true;
    return out;  // defaults M=32, ef=200, confidence 0
  }
  const auto x = features.as_array();
  const double m_raw = model->m_forest.predict(x);
  const double ef_raw = model->ef_forest.predict(x);
  const double m_clamped =
      std::clamp(m_raw, static_cast<double>(kMinM), static_cast<double>(kMaxM));
  const double ef_clamped = std::clamp(ef_raw, static_cast<double>(kMinEf),
                                       static_cast<double>(kMaxEf));
  out.m = static_cast<std::uint32_t>(std::llround(m_clamped));
  out.ef = static_cast<std::uint32_t>(std::llround(ef_clamped));
  out.clamped = m_clamped != m_raw || ef_clamped != ef_raw;
  out.confidence =
      0.5 * (model->m_forest.confidence(x) + model->ef_forest.confidence(x));
  return out;
}

}  // namespace hmgi
