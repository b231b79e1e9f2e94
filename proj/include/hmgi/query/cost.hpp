#pragma once
// Query cost model C = alpha*log(N) + beta*(d*h) + gamma*p*log(N/p)
// (natural logarithms) and greedy plan selection between the two pipeline
// orders: vector-first with traversal expansion, or traversal-first with a
// vector rerank over the seed set (only legal when the MATCH pattern binds
// seeds).

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "hmgi/errors.hpp"
#include "hmgi/query/ast.hpp"

namespace hmgi::query {

struct CostCoefficients {
  double alpha = 1.0;
  double beta = 0.01;
  double gamma = 0.1;
};

struct CostEstimate {
  double total = 0.0;
  double term_anns = 0.0;       // alpha * log N
  double term_traversal = 0.0;  // beta * (d * h)
  double term_partition = 0.0;  // gamma * p * log(N / p)
};

CostEstimate estimate_cost(std::uint64_t n, std::uint32_t d, std::uint32_t h,
                           std::uint64_t p, const CostCoefficients& coeff);

struct Catalog {
  std::map<std::string, std::uint64_t> vectors_per_modality;
  std::map<std::string, std::uint32_t> dim_per_modality;
  std::map<std::string, std::uint64_t> partitions_per_modality;
  std::map<std::string, std::uint64_t> label_counts;
  std::uint64_t total_nodes = 0;
};

enum class PipelineOrder { VectorFirst, TraversalFirst };

struct HybridQueryPlan {
  HybridQueryAst ast;
  PipelineOrder order = PipelineOrder::VectorFirst;
  CostEstimate vector_first;
  std::optional<CostEstimate> traversal_first;
  std::uint64_t seed_estimate = 0;

  std::string explain(const CostCoefficients& coeff) const;
};

HybridQueryPlan plan(const HybridQueryAst& ast, const Catalog& catalog,
                     const CostCoefficients& coeff,
                     std::optional<PipelineOrder> force = std::nullopt);

}  // namespace hmgi::query
