#include "hmgi/bench/ground_truth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "hmgi/binary_io.hpp"

namespace hmgi::bench {

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t state) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    state ^= p[i];
    state *= 1099511628211ULL;
  }
  return state;
}

std::vector<std::vector<NodeId>> exact_topk(
    const std::vector<std::pair<NodeId, std::vector<float>>>& dataset,
    const std::vector<std::vector<float>>& queries, std::uint32_t k,
    std::uint32_t threads) {
  // Pre-normalize once.
  std::vector<std::vector<float>> unit;
  unit.reserve(dataset.size());
  for (const auto& [id, v] : dataset) {
    double norm = 0.0;
    for (float x : v) norm += double{x} * x;
    norm = std::sqrt(norm);
    std::vector<float> u(v.size());
    const double inv = norm > 0 ? 1.0 / norm : 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      u[i] = static_cast<float>(v[i] * inv);
    unit.push_back(std::move(u));
  }

  std::vector<std::vector<NodeId>> results(queries.size());
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t qi = begin; qi < end; ++qi) {
      const std::vector<float>& raw = queries[qi];
      double norm = 0.0;
      for (float x : raw) norm += double{x} * x;
      norm = std::sqrt(norm);
      std::vector<float> q(raw.size());
      const double inv = norm > 0 ? 1.0 / norm : 0.0;
      for (std::size_t i = 0; i < raw.size(); ++i)
        q[i] = static_cast<float>(raw[i] * inv);

      // (distance, id) pairs; partial sort for top-k.
      std::vector<std::pair<float, NodeId>> scored(dataset.size());
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        const std::vector<float>& u = unit[i];
        double dot = 0.0;
        const std::size_t d = std::min(u.size(), q.size());
        for (std::size_t j = 0; j < d; ++j) dot += double{u[j]} * q[j];
        scored[i] = {1.0f - static_cast<float>(dot), dataset[i].first};
      }
      const std::size_t take = std::min<std::size_t>(k, scored.size());
      std::partial_sort(scored.begin(), scored.begin() + take, scored.end());
      results[qi].reserve(take);
      for (std::size_t i = 0; i < take; ++i)
        results[qi].push_back(scored[i].second);
    }
  };

  if (threads <= 1 || queries.size() < 2) {
    work(0, queries.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (queries.size() + threads - 1) / threads;
    for (std::uint32_t t = 0; t < threads; ++t) {
      std::size_t begin = t * chunk;
      std::size_t end = std::min(queries.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return results;
}

std::vector<std::vector<NodeId>> exact_topk_cached(
    const std::string& cache_dir,
    const std::vector<std::pair<NodeId, std::vector<float>>>& dataset,
    const std::vector<std::vector<float>>& queries, std::uint32_t k) {
  std::uint64_t h = fnv1a(&k, sizeof k);
  for (const auto& [id, v] : dataset) {
    h = fnv1a(&id, sizeof id, h);
    h = fnv1a(v.data(), v.size() * sizeof(float), h);
  }
  for (const auto& q : queries) h = fnv1a(q.data(), q.size() * sizeof(float), h);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cache_dir, ec);
  char name[32];
  std::snprintf(name, sizeof name, "gt_%016llx.bin",
                static_cast<unsigned long long>(h));
  const std::string path = cache_dir + "/" + name;

  if (fs::exists(path)) {
    std::ifstream f(path, std::ios::binary);
    std::string raw((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
    BinaryReader r(raw);
    std::uint64_t nq = r.get_u64();
    if (nq == queries.size()) {
      std::vector<std::vector<NodeId>> out(nq);
      for (auto& list : out) {
        std::uint64_t n = r.get_u64();
        list.resize(n);
        for (auto& id : list) id = r.get_u64();
      }
      return out;
    }
  }

  auto out = exact_topk(dataset, queries, k);
  BinaryWriter w;
  w.put_u64(out.size());
  for (const auto& list : out) {
    w.put_u64(list.size());
    for (NodeId id : list) w.put_u64(id);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  return out;
}

double recall_at_k(const std::vector<NodeId>& got,
                   const std::vector<NodeId>& truth, std::uint32_t k) {
  if (k == 0) return 0.0;
  std::size_t hits = 0;
  const std::size_t upto = std::min<std::size_t>(k, truth.size());
  for (std::size_t i = 0; i < upto; ++i)
    for (std::size_t j = 0; j < got.size() && j < k; ++j)
      if (truth[i] == got[j]) {
        ++hits;
        break;
      }
  return static_cast<double>(hits) / static_cast<double>(k);
}

}  // namespace hmgi::bench
