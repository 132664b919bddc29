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

#include "sbx/graph.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "sbx/error.hpp"
#include "sbx/nfa.hpp"
#include "sbx/regex.hpp"
#include "sbx/sbpl.hpp"

namespace sbx {

RegexPatterns::RegexPatterns(const BinaryProfile& bp, bool parallel)
    : patterns_(bp.regex_count), errors_(bp.regex_count) {
  const auto n = static_cast<std::int64_t>(bp.regex_count);
#pragma omp parallel for schedule(dynamic) if (parallel && n > 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto index = static_cast<std::uint16_t>(i);
    try {
      patterns_[index] = to_pattern(nfa_to_regex(deserialize_nfa(bp.regex_program(index))));
    } catch (...) {
      errors_[index] = std::current_exception();
    }
  }
}

const std::string& RegexPatterns::pattern(std::uint16_t index) const {
  if (index >= patterns_.size())
    throw Error(ErrorKind::malformed_blob, "regex index " + std::to_string(index) + " out of range");
  if (errors_[index]) std::rethrow_exception(errors_[index]);
  return patterns_[index];
}

FilterExpr record_atom(const BinaryProfile& bp, const NodeRecord& r, const Vocabulary& vocab,
                       const RegexPatterns& patterns) {
  const FilterKey* key = vocab.filters.by_code(r.key);
  if (!key)
    throw Error(ErrorKind::unknown_filter_key,
                "filter key code " + std::to_string(r.key) + " not in vocabulary");
  switch (key->kind) {
    case ValueKind::regex_index: return FilterExpr::atom(key->name, patterns.pattern(r.value));
    case ValueKind::literal_string: return FilterExpr::atom(key->name, bp.pool_string(r.value));
    case ValueKind::network_endpoint: {
      std::string text = bp.pool_string(r.value);
      auto sp = text.find(' ');
      if (sp == std::string::npos)
        throw Error(ErrorKind::malformed_blob, "endpoint entry without protocol");
      return FilterExpr::atom(key->name, Endpoint{text.substr(0, sp), text.substr(sp + 1)});
    }
    case ValueKind::enum_named: {
      const std::string* name = key->name_for(r.value);
      if (!name)
        throw Error(ErrorKind::unknown_filter_value,
                    key->name + " has no value " + std::to_string(r.value));
      return FilterExpr::atom(key->name, Symbol{*name});
    }
    case ValueKind::numeric: return FilterExpr::atom(key->name, std::int64_t{r.value});
  }
  throw Error(ErrorKind::unknown_filter_key, key->name);
}

OpGraph build_graph(const BinaryProfile& bp, std::size_t op, const Vocabulary& vocab,
                    const RegexPatterns* patterns) {
  if (op >= bp.op_pointers.size())
    throw Error(ErrorKind::unknown_operation, "operation index " + std::to_string(op));
  std::optional<RegexPatterns> local;
  if (!patterns) patterns = &local.emplace(bp, false);

  OpGraph g;
  std::unordered_map<std::uint16_t, NodeRef> index;
  enum : std::uint8_t { kOpen = 1, kDone = 2 };
  std::unordered_map<std::uint16_t, std::uint8_t> colour;

  auto ref_of = [&](std::uint16_t unit) -> NodeRef {
    const NodeRecord& r = bp.node_at(unit);
    if (r.is_terminal()) return terminal_ref(r.decision());
    return index.at(unit);
  };
  auto discover = [&](std::uint16_t unit) -> bool {
    const NodeRecord& r = bp.node_at(unit);
    if (r.is_terminal() || colour.count(unit)) return false;
    index.emplace(unit, static_cast<NodeRef>(g.nodes.size()));
    g.nodes.push_back({record_atom(bp, r, vocab, *patterns), kDenyRef, kDenyRef, unit});
    colour[unit] = kOpen;
    return true;
  };

  // Iterative DFS; an edge into an open node is a cycle.
  const std::uint16_t root = bp.op_pointers[op];
  struct Frame {
    std::uint16_t unit;
    int next;
  };
  std::vector<Frame> stack;
  if (discover(root)) stack.push_back({root, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    const NodeRecord& r = bp.node_at(f.unit);
    if (f.next == 2) {
      GraphNode& n = g.nodes[static_cast<std::size_t>(index.at(f.unit))];
      n.match = ref_of(r.match);
      n.unmatch = ref_of(r.unmatch);
      colour[f.unit] = kDone;
      stack.pop_back();
      continue;
    }
    const std::uint16_t succ = f.next++ == 0 ? r.match : r.unmatch;
    auto it = colour.find(succ);
    if (it != colour.end() && it->second == kOpen)
      throw DecodeError(ErrorKind::cycle_detected, std::size_t{f.unit} * kRecordSize,
                        "edge back to offset " + std::to_string(std::size_t{succ} * kRecordSize));
    if (discover(succ)) stack.push_back({succ, 0});
  }
  g.entry = ref_of(root);
  return g;
}

OpGraph normalize_graph(OpGraph g, Decision default_decision) {
  const NodeRef def = terminal_ref(default_decision);
  const NodeRef other = terminal_ref(negate(default_decision));
  auto resolve = [&](NodeRef r) {
    // Follow bypassed nodes. Chains are acyclic, so this terminates.
    while (!is_terminal_ref(r)) {
      const GraphNode& n = g.nodes[static_cast<std::size_t>(r)];
      if (n.match != n.unmatch) break;
      r = n.match;
    }
    return r;
  };
  // Bypassing one node can make its predecessor degenerate.
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& n : g.nodes) {
      const NodeRef m = resolve(n.match), u = resolve(n.unmatch);
      changed = changed || m != n.match || u != n.unmatch;
      n.match = m;
      n.unmatch = u;
    }
  }
  g.entry = resolve(g.entry);

  // Keep the nodes still reachable from the entry, in their original order.
  std::vector<NodeRef> remap(g.nodes.size(), kDenyRef);
  std::vector<char> seen(g.nodes.size(), 0);
  std::vector<NodeRef> stack;
  if (!is_terminal_ref(g.entry)) stack.push_back(g.entry);
  while (!stack.empty()) {
    const NodeRef r = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(r)]) continue;
    seen[static_cast<std::size_t>(r)] = 1;
    for (NodeRef next : {g.nodes[static_cast<std::size_t>(r)].match,
                         g.nodes[static_cast<std::size_t>(r)].unmatch})
      if (!is_terminal_ref(next)) stack.push_back(next);
  }
  OpGraph out;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (seen[i]) {
      remap[i] = static_cast<NodeRef>(out.nodes.size());
      out.nodes.push_back(std::move(g.nodes[i]));
    }
  auto moved = [&](NodeRef r) { return is_terminal_ref(r) ? r : remap[static_cast<std::size_t>(r)]; };
  out.entry = moved(g.entry);
  for (auto& n : out.nodes) {
    n.match = moved(n.match);
    n.unmatch = moved(n.unmatch);
    const bool flip = (n.match == def && (n.unmatch == other || !is_terminal_ref(n.unmatch))) ||
                      (!is_terminal_ref(n.match) && n.unmatch == other);
    if (!flip) continue;
    n.filter = n.filter.kind() == FilterExpr::Kind::require_not ? n.filter.child()
                                                                : FilterExpr::negate(n.filter);
    std::swap(n.match, n.unmatch);
  }
  return out;
}

std::optional<std::string> match_graph_violation(const OpGraph& g, Decision default_decision) {
  const NodeRef def = terminal_ref(default_decision);
  const NodeRef other = terminal_ref(negate(default_decision));
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const GraphNode& n = g.nodes[i];
    if (n.match == def)
      return "node " + std::to_string(i) + ": match edge reaches the default terminal";
    if (n.unmatch == other)
      return "node " + std::to_string(i) + ": unmatch edge reaches the opposite terminal";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Node removal

namespace {

// Boolean formula with constant folding.
struct Formula {
  int constant = 0;  // 0 false, 1 true, -1 expression
  std::optional<FilterExpr> expr;

  static Formula of(bool b) { return {b ? 1 : 0, std::nullopt}; }
  static Formula of(FilterExpr e) { return {-1, std::move(e)}; }
};

Formula f_not(const FilterExpr& f) { return Formula::of(FilterExpr::negate(f)); }

Formula f_and(Formula a, Formula b) {
  if (a.constant == 0 || b.constant == 0) return Formula::of(false);
  if (a.constant == 1) return b;
  if (b.constant == 1) return a;
  return Formula::of(FilterExpr::all({std::move(*a.expr), std::move(*b.expr)}));
}

Formula f_or(Formula a, Formula b) {
  if (a.constant == 1 || b.constant == 1) return Formula::of(true);
  if (a.constant == 0) return b;
  if (b.constant == 0) return a;
  return Formula::of(FilterExpr::any({std::move(*a.expr), std::move(*b.expr)}));
}

std::size_t atoms_in(const Formula& f) { return f.expr ? f.expr->atom_count() : 0; }

class Aggregator {
 public:
  Aggregator(const OpGraph& g, const AggregateOptions& opts) : g_(g), opts_(opts) {}

  Formula reach(NodeRef n, NodeRef t, NodeRef f) {
    if (n == t) return Formula::of(true);
    if (n == f) return Formula::of(false);
    if (is_terminal_ref(n))
      throw Error(ErrorKind::irreducible_graph,
                  "walk reaches a terminal outside the region of node " + std::to_string(n));
    const auto key = std::make_tuple(n, t, f);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (++depth_ > opts_.max_depth)
      throw Error(ErrorKind::irreducible_graph, "recursion budget exhausted");
    Formula out = reduce(n, t, f);
    --depth_;
    if (atoms_in(out) > opts_.max_atoms)
      throw Error(ErrorKind::irreducible_graph, "expression budget exhausted");
    memo_.emplace(key, out);
    return out;
  }

 private:
  Formula reduce(NodeRef n, NodeRef t, NodeRef f) {
    const GraphNode& node = g_.nodes[static_cast<std::size_t>(n)];
    const NodeRef m = node.match, u = node.unmatch;
    const FilterExpr& x = node.filter;
    if (m == u) return reach(m, t, f);
    if (u == f) return f_and(Formula::of(x), reach(m, t, f));
    if (m == t) return f_or(Formula::of(x), reach(u, t, f));
    if (m == f) return f_and(f_not(x), reach(u, t, f));
    if (u == t) return f_or(f_not(x), reach(m, t, f));
    // A node every path to f (or t) crosses splits the region in two.
    const auto [zf, zt] = split_points(n, t, f);
    if (zf >= 0) return f_or(reach(n, t, zf), reach(zf, t, f));
    if (zt >= 0) return f_and(reach(n, zt, f), reach(zt, t, f));
    return f_or(f_and(Formula::of(x), reach(m, t, f)), f_and(f_not(x), reach(u, t, f)));
  }

  // For the region rooted at n with sinks t and f: the dominator of f (and
  // of t) nearest to n other than n itself, or -1.
  std::pair<NodeRef, NodeRef> split_points(NodeRef n, NodeRef t, NodeRef f) const {
    // Local numbering in reverse post-order; sinks included.
    std::unordered_map<NodeRef, int> local;
    std::vector<NodeRef> order;
    std::vector<std::pair<NodeRef, int>> stack{{n, 0}};
    std::unordered_map<NodeRef, bool> seen{{n, true}};
    std::vector<NodeRef> post;
    auto succs = [&](NodeRef r) -> std::pair<NodeRef, NodeRef> {
      if (r == t || r == f || is_terminal_ref(r)) return {r, r};
      const GraphNode& x = g_.nodes[static_cast<std::size_t>(r)];
      return {x.match, x.unmatch};
    };
    while (!stack.empty()) {
      auto& [r, next] = stack.back();
      auto [a, b] = succs(r);
      if (a == r || next == 2) {
        post.push_back(r);
        stack.pop_back();
        continue;
      }
      const NodeRef s = next++ == 0 ? a : b;
      if (!seen[s]) {
        seen[s] = true;
        stack.push_back({s, 0});
      }
    }
    order.assign(post.rbegin(), post.rend());
    for (std::size_t i = 0; i < order.size(); ++i) local[order[i]] = static_cast<int>(i);

    std::vector<std::vector<int>> preds(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto [a, b] = succs(order[i]);
      if (a == order[i]) continue;
      preds[static_cast<std::size_t>(local[a])].push_back(static_cast<int>(i));
      if (b != a) preds[static_cast<std::size_t>(local[b])].push_back(static_cast<int>(i));
    }
    // Cooper, Harvey and Kennedy over the RPO numbering.
    std::vector<int> idom(order.size(), -1);
    idom[0] = 0;
    auto intersect = [&](int a, int b) {
      while (a != b) {
        while (a > b) a = idom[static_cast<std::size_t>(a)];
        while (b > a) b = idom[static_cast<std::size_t>(b)];
      }
      return a;
    };
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 1; i < order.size(); ++i) {
        int d = -1;
        for (int p : preds[i]) {
          if (idom[static_cast<std::size_t>(p)] < 0) continue;
          d = d < 0 ? p : intersect(p, d);
        }
        if (d != idom[i]) {
          idom[i] = d;
          changed = true;
        }
      }
    }
    auto nearest = [&](NodeRef sink) -> NodeRef {
      auto it = local.find(sink);
      if (it == local.end()) return -1;
      int z = it->second, prev = -1;
      while (z != 0) {
        prev = z;
        z = idom[static_cast<std::size_t>(z)];
      }
      if (prev < 0) return -1;
      const NodeRef r = order[static_cast<std::size_t>(prev)];
      return r == sink ? -1 : r;
    };
    return {nearest(f), nearest(t)};
  }

  const OpGraph& g_;
  const AggregateOptions& opts_;
  std::map<std::tuple<NodeRef, NodeRef, NodeRef>, Formula> memo_;
  std::size_t depth_ = 0;
};

}  // namespace

Condition aggregate(const OpGraph& g, Decision target, const AggregateOptions& opts) {
  Aggregator agg(g, opts);
  Formula f = agg.reach(g.entry, terminal_ref(target), terminal_ref(negate(target)));
  if (f.constant == 1) return Condition::always();
  if (f.constant == 0) return Condition::never();
  return Condition::when(canonicalize(*f.expr));
}

Decision walk(const OpGraph& g, const std::function<bool(const FilterExpr&)>& holds) {
  NodeRef cur = g.entry;
  for (std::size_t steps = 0; !is_terminal_ref(cur); ++steps) {
    if (steps > g.nodes.size())
      throw Error(ErrorKind::cycle_detected, "walk exceeded the node count");
    const GraphNode& n = g.nodes[static_cast<std::size_t>(cur)];
    cur = holds(n.filter) ? n.match : n.unmatch;
  }
  return cur == kAllowRef ? Decision::allow : Decision::deny;
}

// ---------------------------------------------------------------------------

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string dot_id(NodeRef r) {
  if (r == kAllowRef) return "allow";
  if (r == kDenyRef) return "deny";
  return "n" + std::to_string(r);
}

}  // namespace

std::string to_dot(const OpGraph& g, const FilterVocabulary& filters, std::string_view name,
                   std::string* summary) {
  std::ostringstream out;
  out << "digraph \"" << dot_escape(name) << "\" {\n";
  out << "  node [shape=box];\n";
  out << "  entry [shape=point];\n";
  out << "  allow [label=\"allow\", penwidth=3];\n";
  out << "  deny [label=\"deny\", penwidth=3];\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    out << "  " << dot_id(static_cast<NodeRef>(i)) << " [label=\""
        << dot_escape(print_filter(g.nodes[i].filter, filters)) << "\"];\n";
  out << "  entry -> " << dot_id(g.entry) << ";\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const GraphNode& n = g.nodes[i];
    out << "  " << dot_id(static_cast<NodeRef>(i)) << " -> " << dot_id(n.match) << ";\n";
    out << "  " << dot_id(static_cast<NodeRef>(i)) << " -> " << dot_id(n.unmatch)
        << " [style=dashed];\n";
  }
  out << "}\n";
  if (summary)
    *summary = std::to_string(g.nodes.size()) + " non-terminal, 2 terminal; " +
               std::to_string(2 * g.nodes.size()) + " edges";
  return out.str();
}

}  // namespace sbx
