#include <doctest.h>

#include <random>

#include "hmgi/partitioner.hpp"
#include "support/oracle.hpp"

using namespace hmgi;

namespace {

std::vector<std::vector<float>> scalar_points(std::initializer_list<float> xs) {
  std::vector<std::vector<float>> out;
  for (float x : xs) out.push_back({x});
  return out;
}

// Exhaustive 2-partition enumeration minimizing within-cluster SSE.
double best_two_partition_sse(const std::vector<std::vector<float>>& points) {
  const std::size_t n = points.size();
  double best_sse = 1e300;
  for (int mask = 1; mask < (1 << n) - 1; ++mask) {
    std::vector<std::vector<double>> sums(2,
                                          std::vector<double>(points[0].size()));
    std::vector<int> counts(2, 0);
    for (std::size_t i = 0; i < n; ++i) {
      int c = (mask >> i) & 1;
      counts[c]++;
      for (std::size_t d = 0; d < points[i].size(); ++d)
        sums[c][d] += points[i][d];
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int c = (mask >> i) & 1;
      for (std::size_t d = 0; d < points[i].size(); ++d) {
        double mean = sums[c][d] / counts[c];
        double diff = points[i][d] - mean;
        sse += diff * diff;
      }
    }
    best_sse = std::min(best_sse, sse);
  }
  return best_sse;
}

}  // namespace

TEST_CASE("fit recovers the optimal 2-partition of separated scalars") {
  auto sample = scalar_points({0.0f, 0.1f, 10.0f, 10.1f});
  PartitionModel model = fit_partitions(sample, 2, 1);
  REQUIRE(model.centroids.size() == 2);

  std::vector<float> centers{model.centroids[0][0], model.centroids[1][0]};
  std::sort(centers.begin(), centers.end());
  CHECK(centers[0] == doctest::Approx(0.05).epsilon(1e-4));
  CHECK(centers[1] == doctest::Approx(10.05).epsilon(1e-4));

  CHECK(kmeans_distortion(sample, model) ==
        doctest::Approx(best_two_partition_sse(sample)).epsilon(1e-6));
}

TEST_CASE("fit K=1 yields the component-wise mean") {
  std::vector<std::vector<float>> sample{{1.f, 2.f}, {3.f, 4.f}, {5.f, 0.f}};
  PartitionModel model = fit_partitions(sample, 1, 9);
  REQUIRE(model.centroids.size() == 1);
  CHECK(model.centroids[0][0] == doctest::Approx(3.0f));
  CHECK(model.centroids[0][1] == doctest::Approx(2.0f));
}

TEST_CASE("fit K=|sample| gives zero distortion") {
  auto sample = scalar_points({1.0f, 5.0f, 9.0f});
  PartitionModel model = fit_partitions(sample, 3, 3);
  CHECK(kmeans_distortion(sample, model) == doctest::Approx(0.0));
}

TEST_CASE("fit validates inputs") {
  CHECK_THROWS_AS(fit_partitions({}, 1, 0), EmptySample);
  CHECK_THROWS_AS(fit_partitions(scalar_points({1.f}), 2, 0), KTooLarge);
  std::vector<std::vector<float>> mixed{{1.f}, {1.f, 2.f}};
  CHECK_THROWS_AS(fit_partitions(mixed, 1, 0), DimensionMismatch);
}

TEST_CASE("assign matches brute-force argmin on random points") {
  std::mt19937_64 rng(101);
  std::vector<std::vector<float>> sample;
  for (int i = 0; i < 200; ++i) sample.push_back(oracle::random_vector(rng, 8));
  PartitionModel model = fit_partitions(sample, 4, 7);

  for (int i = 0; i < 1000; ++i) {
    auto p = oracle::random_vector(rng, 8);
    std::uint32_t got = assign_partition(p, model);
    std::uint32_t want = 0;
    double best = 1e300;
    for (std::uint32_t c = 0; c < model.k; ++c) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) {
        double diff = double(p[j]) - model.centroids[c][j];
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        want = c;
      }
    }
    CHECK(got == want);
  }
}

TEST_CASE("assign tie-breaks toward the smaller index") {
  PartitionModel model;
  model.k = 2;
  model.dim = 1;
  model.centroids = {{0.0f}, {10.0f}};
  model.assignment_counts = {0, 0};
  CHECK(assign_partition(std::vector<float>{1.0f}, model) == 0);
  CHECK(assign_partition(std::vector<float>{5.0f}, model) == 0);  // equidistant
  CHECK(assign_partition(std::vector<float>{9.0f}, model) == 1);
  CHECK_THROWS_AS(assign_partition(std::vector<float>{1.f, 2.f}, model),
                  DimensionMismatch);
}

TEST_CASE("assign is a pure function of embedding and centroids") {
  std::mt19937_64 rng(5);
  std::vector<std::vector<float>> sample;
  for (int i = 0; i < 64; ++i) sample.push_back(oracle::random_vector(rng, 4));
  PartitionModel model = fit_partitions(sample, 3, 11);
  auto p = oracle::random_vector(rng, 4);
  std::uint32_t first = assign_partition(p, model);
  for (int i = 0; i < 10; ++i) CHECK(assign_partition(p, model) == first);
}

TEST_CASE("fit is deterministic and improves on its seeding") {
  std::mt19937_64 rng(303);
  std::vector<std::vector<float>> sample;
  for (int i = 0; i < 300; ++i) sample.push_back(oracle::random_vector(rng, 6));
  PartitionModel a = fit_partitions(sample, 5, 42);
  PartitionModel b = fit_partitions(sample, 5, 42);
  CHECK(a.centroids == b.centroids);

  PartitionModel raw;
  raw.k = 5;
  raw.dim = 6;
  raw.modality = Modality::text();
  raw.centroids.assign(sample.begin(), sample.begin() + 5);
  raw.assignment_counts.assign(5, 0);
  CHECK(kmeans_distortion(sample, a) <= kmeans_distortion(sample, raw) + 1e-9);
}

TEST_CASE("workload stats ratio arithmetic") {
  // With two clusters, max/mean never exceeds 2.0, so the default
  // threshold cannot fire there: [90,10] -> 1.8, [150,10] -> 1.875,
  // [190,10] -> 1.9, [210,10] -> 1.909...
  auto ratio_of = [](std::vector<std::uint64_t> counts) {
    WorkloadStats stats(static_cast<std::uint32_t>(counts.size()), 1u << 20);
    for (std::uint32_t c = 0; c < counts.size(); ++c)
      for (std::uint64_t i = 0; i < counts[c]; ++i) stats.record(c, 1.0);
    return stats.imbalance_ratio();
  };
  CHECK(ratio_of({90, 10}) == doctest::Approx(1.8));
  CHECK(ratio_of({150, 10}) == doctest::Approx(1.875));
  CHECK(ratio_of({190, 10}) == doctest::Approx(1.9));
  CHECK(ratio_of({210, 10}) == doctest::Approx(210.0 / 110.0));
  CHECK(ratio_of({50, 50}) == doctest::Approx(1.0));
  CHECK(ratio_of({210, 10, 10, 10}) == doctest::Approx(3.5));
}

TEST_CASE("workload stats window is rolling") {
  WorkloadStats stats(2, 4);
  for (int i = 0; i < 4; ++i) stats.record(0, 1.0);
  CHECK(stats.imbalance_ratio() == doctest::Approx(2.0));
  for (int i = 0; i < 4; ++i) stats.record(1, 3.0);
  CHECK(stats.counts()[0] == 0);  // old events evicted
  CHECK(stats.counts()[1] == 4);
  CHECK(stats.mean_latency(1) == doctest::Approx(3.0));
}

TEST_CASE("check_rebalance plan emission") {
  std::mt19937_64 rng(77);
  std::vector<std::pair<NodeId, std::vector<float>>> population;
  std::vector<std::vector<float>> sample;
  for (int i = 0; i < 100; ++i) {
    auto v = oracle::random_vector(rng, 4);
    population.emplace_back(i, v);
    sample.push_back(v);
  }

  SUBCASE("uniform counts never plan") {
    PartitionModel model = fit_partitions(sample, 2, 5);
    WorkloadStats stats(2, 16);
    for (int i = 0; i < 16; ++i) stats.record(i % 2, 1.0);
    CHECK(stats.window_full());
    CHECK_FALSE(check_rebalance(stats, 2.0, model, population, 1).has_value());
  }

  SUBCASE("two clusters cannot exceed the default threshold") {
    PartitionModel model = fit_partitions(sample, 2, 5);
    WorkloadStats stats(2, 200);
    for (int i = 0; i < 190; ++i) stats.record(0, 1.0);
    for (int i = 0; i < 10; ++i) stats.record(1, 1.0);
    CHECK_FALSE(check_rebalance(stats, 2.0, model, population, 1).has_value());
  }

  SUBCASE("four clusters with a hot spot emit a plan") {
    PartitionModel model = fit_partitions(sample, 4, 5);
    model.model_version = 3;
    WorkloadStats stats(4, 240);
    for (int i = 0; i < 210; ++i) stats.record(0, 2.0);
    for (int c = 1; c < 4; ++c)
      for (int i = 0; i < 10; ++i) stats.record(c, 1.0);
    auto plan = check_rebalance(stats, 2.0, model, population, 1);
    REQUIRE(plan.has_value());
    CHECK(plan->base_model_version == 3);
    CHECK(plan->refit.model_version == 4);
    CHECK(plan->refit.k == 4);
    for (const auto& [id, from, to] : plan->moves) {
      CHECK(from != to);
      CHECK(assign_partition(population[id].second, plan->refit) == to);
    }
  }

  SUBCASE("single cluster never plans") {
    PartitionModel model = fit_partitions(sample, 1, 5);
    WorkloadStats stats(1, 8);
    for (int i = 0; i < 8; ++i) stats.record(0, 1.0);
    CHECK_FALSE(check_rebalance(stats, 2.0, model, population, 1).has_value());
  }
}

TEST_CASE("model JSON round trip") {
  std::mt19937_64 rng(9);
  std::vector<std::vector<float>> sample;
  for (int i = 0; i < 32; ++i) sample.push_back(oracle::random_vector(rng, 3));
  PartitionModel model = fit_partitions(sample, 2, 13, Modality::image());
  model.model_version = 7;
  model.assignment_counts = {20, 12};
  PartitionModel back = PartitionModel::from_json(model.to_json());
  CHECK(back.modality == model.modality);
  CHECK(back.k == model.k);
  CHECK(back.dim == model.dim);
  CHECK(back.model_version == 7);
  CHECK(back.centroids == model.centroids);
  CHECK(back.assignment_counts == model.assignment_counts);
}
