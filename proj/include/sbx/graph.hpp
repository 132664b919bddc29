// Copyright 2026 The sbx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Per-operation decision graphs recovered from a blob, their normalization
// and their reduction to a single filter expression.

#ifndef SBX_GRAPH_HPP_
#define SBX_GRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sbx/blob.hpp"
#include "sbx/model.hpp"
#include "sbx/vocab.hpp"

namespace sbx {

// Index into OpGraph::nodes, or one of the two terminals.
using NodeRef = std::int32_t;
inline constexpr NodeRef kAllowRef = -1;
inline constexpr NodeRef kDenyRef = -2;

constexpr NodeRef terminal_ref(Decision d) noexcept {
  return d == Decision::allow ? kAllowRef : kDenyRef;
}
constexpr bool is_terminal_ref(NodeRef r) noexcept { return r < 0; }

struct GraphNode {
  FilterExpr filter;
  NodeRef match = kDenyRef;
  NodeRef unmatch = kDenyRef;
  std::uint16_t unit = 0;  // record offset in the blob, 0 for synthetic nodes
};

// Nodes are stored in discovery order (pre-order, match first).
struct OpGraph {
  std::vector<GraphNode> nodes;
  NodeRef entry = kDenyRef;
};

// Patterns of every regex in a blob, recovered through state removal.
// Failures are kept and rethrown by pattern().
class RegexPatterns {
 public:
  explicit RegexPatterns(const BinaryProfile& bp, bool parallel = true);
  const std::string& pattern(std::uint16_t index) const;
  std::size_t size() const noexcept { return patterns_.size(); }

 private:
  std::vector<std::string> patterns_;
  std::vector<std::exception_ptr> errors_;
};

// The filter atom a non-terminal record tests.
FilterExpr record_atom(const BinaryProfile& bp, const NodeRecord& r, const Vocabulary& vocab,
                       const RegexPatterns& patterns);

// Throws DecodeError(cycle_detected | dangling_offset) and
// Error(unknown_filter_key | unknown_filter_value).
OpGraph build_graph(const BinaryProfile& bp, std::size_t op, const Vocabulary& vocab,
                    const RegexPatterns* patterns = nullptr);

// Rewrites nodes so that, for a deny default, no match edge reaches deny and
// no unmatch edge reaches allow (roles swapped for an allow default). A
// rewritten node tests not(filter) with its successors exchanged. Nodes whose
// two successors coincide are bypassed, and unreachable nodes dropped.
OpGraph normalize_graph(OpGraph g, Decision default_decision);

// Empty when the invariant above holds, else the first offending node.
std::optional<std::string> match_graph_violation(const OpGraph& g, Decision default_decision);

// When does a walk from the entry reach `target`?
struct Condition {
  enum class Kind : std::uint8_t { never, always, when };
  Kind kind = Kind::never;
  std::optional<FilterExpr> filter;  // set iff kind == when, canonical

  static Condition never() { return {}; }
  static Condition always() { return {Kind::always, std::nullopt}; }
  static Condition when(FilterExpr f) { return {Kind::when, std::move(f)}; }
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct AggregateOptions {
  std::size_t max_atoms = 1u << 20;  // budget for the produced expression
  std::size_t max_depth = 1u << 14;  // recursion budget
};

// Collapses the graph by node removal. Throws Error(irreducible_graph) when a
// budget is exhausted or a walk reaches neither terminal.
Condition aggregate(const OpGraph& g, Decision target, const AggregateOptions& opts = {});

// Graph traversal; `holds` decides each node's filter.
Decision walk(const OpGraph& g, const std::function<bool(const FilterExpr&)>& holds);

// Graphviz rendering: match edges solid, unmatch edges dashed, terminals
// drawn with a thick border. `summary`, when given, receives
// "N non-terminal, 2 terminal; E edges".
std::string to_dot(const OpGraph& g, const FilterVocabulary& filters, std::string_view name,
                   std::string* summary = nullptr);

}  // namespace sbx

#endif  // SBX_GRAPH_HPP_
