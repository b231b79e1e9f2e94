#include "hmgi/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

namespace hmgi {

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return (rng() >> 11) * (1.0 / 9007199254740992.0);
}

double sq_dist(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = double{a[i]} - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

PartitionModel fit_partitions(const std::vector<std::vector<float>>& sample,
                              std::uint32_t k, std::uint64_t seed,
                              const Modality& modality) {
  if (sample.empty()) throw EmptySample("fit requires at least one embedding");
  if (k < 1) throw ParameterError("K must be >= 1");
  if (k > sample.size())
    throw KTooLarge("K=" + std::to_string(k) + " > sample size " +
                    std::to_string(sample.size()));
  const std::size_t dim = sample[0].size();
  for (const auto& v : sample)
    if (v.size() != dim)
      throw DimensionMismatch("mixed dimensions in K-means sample");

  std::mt19937_64 rng(seed);

  // k-means++ seeding.
  std::vector<std::vector<float>> centroids;
  centroids.reserve(k);
  centroids.push_back(
      sample[static_cast<std::size_t>(unit_uniform(rng) * sample.size())]);
  std::vector<double> d2(sample.size());
  for (std::uint32_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      double best = sq_dist(sample[i], centroids[0]);
      for (std::size_t j = 1; j < centroids.size(); ++j)
        best = std::min(best, sq_dist(sample[i], centroids[j]));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = unit_uniform(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < sample.size(); ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      // All points coincide with existing centroids; any choice is exact.
      pick = c % sample.size();
    }
    centroids.push_back(sample[pick]);
  }

  // Lloyd iterations.
  std::vector<std::uint32_t> assign(sample.size(), 0);
  std::vector<std::uint64_t> counts(k, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < sample.size(); ++i) {
      std::uint32_t best = 0;
      double best_d = sq_dist(sample[i], centroids[0]);
      for (std::uint32_t c = 1; c < k; ++c) {
        double d = sq_dist(sample[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[i] = best;
    }
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < sample.size(); ++i) {
      counts[assign[i]]++;
      for (std::size_t j = 0; j < dim; ++j) sums[assign[i]][j] += sample[i][j];
    }
    double shift = 0.0;
    for (std::uint32_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      std::vector<float> next(dim);
      for (std::size_t j = 0; j < dim; ++j)
        next[j] = static_cast<float>(sums[c][j] / counts[c]);
      shift += std::sqrt(sq_dist(next, centroids[c]));
      centroids[c] = std::move(next);
    }
    if (shift < 1e-6) break;
  }

  PartitionModel model;
  model.modality = modality;
  model.k = k;
  model.dim = static_cast<std::uint32_t>(dim);
  model.centroids = std::move(centroids);
  model.assignment_counts.assign(k, 0);
  return model;
}

std::uint32_t assign_partition(std::span<const float> e,
                               const PartitionModel& model) {
  if (e.size() != model.dim)
    throw DimensionMismatch("embedding length " + std::to_string(e.size()) +
                            " != model dim " + std::to_string(model.dim));
  std::uint32_t best = 0;
  double best_d = sq_dist(e, model.centroids[0]);
  for (std::uint32_t c = 1; c < model.k; ++c) {
    double d = sq_dist(e, model.centroids[c]);
    if (d < best_d) {  // ties keep the smaller c
      best_d = d;
      best = c;
    }
  }
  return best;
}

double kmeans_distortion(const std::vector<std::vector<float>>& points,
                         const PartitionModel& model) {
  double acc = 0.0;
  for (const auto& p : points)
    acc += sq_dist(p, model.centroids[assign_partition(p, model)]);
  return acc;
}

void WorkloadStats::record(std::uint32_t cluster, double latency_ms) {
  events_.emplace_back(cluster, latency_ms);
  counts_[cluster]++;
  latency_sums_[cluster] += latency_ms;
  while (events_.size() > capacity_) {
    auto [c, l] = events_.front();
    events_.pop_front();
    counts_[c]--;
    latency_sums_[c] -= l;
  }
}

double WorkloadStats::imbalance_ratio() const {
  std::uint64_t total = 0;
  std::uint64_t max_count = 0;
  for (std::uint64_t c : counts_) {
    total += c;
    max_count = std::max(max_count, c);
  }
  if (total == 0) return 0.0;
  const double mean = static_cast<double>(total) / counts_.size();
  return static_cast<double>(max_count) / mean;
}

std::optional<RepartitionPlan> check_rebalance(
    const WorkloadStats& stats, double threshold, const PartitionModel& model,
    const std::vector<std::pair<NodeId, std::vector<float>>>& population,
    std::uint64_t seed) {
  if (model.k <= 1) return std::nullopt;
  if (stats.imbalance_ratio() <= threshold) return std::nullopt;
  if (population.empty()) return std::nullopt;

  // Reservoir sample for the refit.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<float>> sample;
  sample.reserve(std::min(kRefitSampleCap, population.size()));
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (sample.size() < kRefitSampleCap) {
      sample.push_back(population[i].second);
    } else {
      std::size_t j = static_cast<std::size_t>(unit_uniform(rng) * (i + 1));
      if (j < kRefitSampleCap) sample[j] = population[i].second;
    }
  }

  RepartitionPlan plan;
  plan.base_model_version = model.model_version;
  plan.refit = fit_partitions(sample, model.k, seed, model.modality);
  plan.refit.model_version = model.model_version + 1;
  for (const auto& [id, e] : population) {
    std::uint32_t old_c = assign_partition(e, model);
    std::uint32_t new_c = assign_partition(e, plan.refit);
    if (old_c != new_c) plan.moves.emplace_back(id, old_c, new_c);
  }
  return plan;
}

std::string PartitionModel::to_json() const {
  nlohmann::json j;
  j["modality"] = modality.name();
  j["k"] = k;
  j["dim"] = dim;
  j["model_version"] = model_version;
  j["centroids"] = centroids;
  j["assignment_counts"] = assignment_counts;
  return j.dump();
}

PartitionModel PartitionModel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PartitionModel m;
  m.modality = Modality::from_name(j.at("modality").get<std::string>());
  m.k = j.at("k").get<std::uint32_t>();
  m.dim = j.at("dim").get<std::uint32_t>();
  m.model_version = j.at("model_version").get<std::uint64_t>();
  m.centroids = j.at("centroids").get<std::vector<std::vector<float>>>();
  m.assignment_counts =
      j.at("assignment_counts").get<std::vector<std::uint64_t>>();
  return m;
}

}  // namespace hmgi
