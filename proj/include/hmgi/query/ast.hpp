#pragma once
// Parsed form of the hybrid query DSL.
//
//   MATCH (n:Label {p: 1}) WHERE n.x > 3
//   VECTOR_SEARCH(text, $q, k=100, ef=200)
//   TRAVERSE hops=2 types=(KNOWS, CITES) dir=out
//   SIMILARITY_WEIGHT v=0.5 g=0.5
//   BUDGET 50
//   RETURN TOP 10
//
// MATCH, WHERE, TRAVERSE, SIMILARITY_WEIGHT and BUDGET are optional.
// Weights are normalized to w_v + w_g = 1 at parse time.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hmgi/graph_store.hpp"
#include "hmgi/types.hpp"

namespace hmgi::query {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

struct PropertyPredicate {
  std::string var;
  std::string property;
  CompareOp op = CompareOp::Eq;
  PropertyValue value;

  bool operator==(const PropertyPredicate&) const = default;
};

struct MatchPattern {
  std::string var = "n";
  std::optional<std::string> label;
  std::map<std::string, PropertyValue> equals;

  // A pattern with a label or property constraint can enumerate a seed set.
  bool binds_seeds() const { return label.has_value() || !equals.empty(); }

  bool operator==(const MatchPattern&) const = default;
};

// Query vector source: an inline literal, a $parameter, or node(id)
// meaning "the stored embedding of that node".
using VectorSource = std::variant<std::vector<float>, std::string, NodeId>;

struct VectorClause {
  Modality modality = Modality::text();
  VectorSource source;
  std::uint32_t k = 10;
  std::optional<std::uint32_t> ef;

  bool operator==(const VectorClause&) const = default;
};

struct TraverseClause {
  std::uint32_t hops = 0;
  std::optional<std::set<std::string>> types;
  Direction dir = Direction::Out;

  bool operator==(const TraverseClause&) const = default;
};

struct HybridQueryAst {
  MatchPattern pattern;
  std::vector<PropertyPredicate> predicates;
  VectorClause vector;
  TraverseClause traverse;
  double w_v = 1.0;
  double w_g = 0.0;
  bool auto_weights = false;
  std::optional<double> budget_ms;
  std::uint32_t top_n = 10;

  bool operator==(const HybridQueryAst&) const = default;
};

HybridQueryAst parse(const std::string& text);

// Canonical text form; parse(print(ast)) == ast.
std::string print(const HybridQueryAst& ast);

}  // namespace hmgi::query
