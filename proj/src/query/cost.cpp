#include "hmgi/query/cost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hmgi::query {

CostEstimate estimate_cost(std::uint64_t n, std::uint32_t d, std::uint32_t h,
                           std::uint64_t p, const CostCoefficients& coeff) {
  if (n < 1) throw DomainError("N must be >= 1");
  if (d < 1) throw DomainError("d must be >= 1");
  if (p < 1) throw DomainError("p must be >= 1");
  if (p > n) throw DomainError("p must be <= N");
  CostEstimate est;
  est.term_anns = coeff.alpha * std::log(static_cast<double>(n));
  est.term_traversal = coeff.beta * (static_cast<double>(d) * h);
  est.term_partition =
      coeff.gamma * static_cast<double>(p) *
      std::log(static_cast<double>(n) / static_cast<double>(p));
  est.total = est.term_anns + est.term_traversal + est.term_partition;
  return est;
}

HybridQueryPlan plan(const HybridQueryAst& ast, const Catalog& catalog,
                     const CostCoefficients& coeff,
                     std::optional<PipelineOrder> force) {
  const std::string& modality = ast.vector.modality.name();
  auto nv = catalog.vectors_per_modality.find(modality);
  auto dv = catalog.dim_per_modality.find(modality);
  if (nv == catalog.vectors_per_modality.end() ||
      dv == catalog.dim_per_modality.end())
    throw UnknownModality(modality);

  const std::uint64_t n = std::max<std::uint64_t>(nv->second, 1);
  const std::uint32_t d = std::max<std::uint32_t>(dv->second, 1);
  std::uint64_t p = 1;
  if (auto it = catalog.partitions_per_modality.find(modality);
      it != catalog.partitions_per_modality.end())
    p = std::max<std::uint64_t>(it->second, 1);
  p = std::min(p, n);

  HybridQueryPlan out;
  out.ast = ast;
  out.vector_first = estimate_cost(n, d, ast.traverse.hops, p, coeff);

  if (ast.pattern.binds_seeds()) {
    std::uint64_t seeds = catalog.total_nodes;
    if (ast.pattern.label) {
      auto lc = catalog.label_counts.find(*ast.pattern.label);
      seeds = lc == catalog.label_counts.end() ? 0 : lc->second;
    }
    out.seed_estimate = seeds;
    // Rerank over the seed set: no partition pruning applies there.
    out.traversal_first = estimate_cost(std::max<std::uint64_t>(seeds, 1), d,
                                        ast.traverse.hops, 1, coeff);
  }

  if (force.has_value()) {
    if (*force == PipelineOrder::TraversalFirst && !out.traversal_first)
      throw UnplannableQuery(
          "traversal-first requires a MATCH pattern that binds a seed set");
    out.order = *force;
    return out;
  }
  // Ties prefer vector-first.
  out.order = (out.traversal_first.has_value() &&
               out.traversal_first->total < out.vector_first.total)
                  ? PipelineOrder::TraversalFirst
                  : PipelineOrder::VectorFirst;
  return out;
}

std::string HybridQueryPlan::explain(const CostCoefficients& coeff) const {
  std::ostringstream os;
  os.precision(6);
  os << "plan: "
     << (order == PipelineOrder::VectorFirst ? "vector-first"
                                             : "traversal-first")
     << "\n";
  auto dump = [&](const char* name, const CostEstimate& est) {
    os << "  " << name << ": C=" << est.total
       << "  [alpha*logN=" << est.term_anns
       << ", beta*(d*h)=" << est.term_traversal
       << ", gamma*p*log(N/p)=" << est.term_partition << "]\n";
  };
  dump("vector-first", vector_first);
  if (traversal_first.has_value()) {
    dump("traversal-first", *traversal_first);
    os << "  seed estimate: " << seed_estimate << "\n";
  } else {
    os << "  traversal-first: unavailable (no seed binding)\n";
  }
  os << "  coefficients: alpha=" << coeff.alpha << " beta=" << coeff.beta
     << " gamma=" << coeff.gamma << "\n";
  return os.str();
}

}  // namespace hmgi::query
