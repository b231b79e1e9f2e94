#pragma once
// Exhaustive cosine top-k oracle with deterministic tie-breaks and a
// content-addressed disk cache.

#include <cstdint>
#include <string>
#include <vector>

#include "hmgi/types.hpp"

namespace hmgi::bench {

// Exact cosine top-k; ties broken by smaller id. Runs on raw vectors
// (normalization happens inside, independent of the index path).
std::vector<std::vector<NodeId>> exact_topk(
    const std::vector<std::pair<NodeId, std::vector<float>>>& dataset,
    const std::vector<std::vector<float>>& queries, std::uint32_t k,
    std::uint32_t threads = 0);

// Cache keyed by FNV-1a of dataset + queries + k under cache_dir.
std::vector<std::vector<NodeId>> exact_topk_cached(
    const std::string& cache_dir,
    const std::vector<std::pair<NodeId, std::vector<float>>>& dataset,
    const std::vector<std::vector<float>>& queries, std::uint32_t k);

double recall_at_k(const std::vector<NodeId>& got,
                   const std::vector<NodeId>& truth, std::uint32_t k);

std::uint64_t fnv1a(const void* data, std::size_t len,
                    std::uint64_t state = 1469598103934665603ULL);

}  // namespace hmgi::bench
