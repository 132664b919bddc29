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

#include <doctest.h>

#include <random>

#include "sbx/error.hpp"
#include "sbx/graph.hpp"
#include "support.hpp"

using namespace sbx;
using namespace sbx::test;

namespace {

FilterExpr vnode(const char* v) { return FilterExpr::atom("vnode-type", Symbol{v}); }
FilterExpr sock(const char* v) { return FilterExpr::atom("socket-type", Symbol{v}); }
FilterExpr target(const char* v) { return FilterExpr::atom("target", Symbol{v}); }

const FilterExpr kPool[] = {vnode("REGULAR-FILE"), vnode("DIRECTORY"), sock("SOCK_STREAM"),
                            sock("SOCK_RAW"), target("self"), target("others")};
constexpr std::size_t kPoolSize = std::size(kPool);

std::size_t pool_index(const FilterExpr& atom) {
  for (std::size_t i = 0; i < kPoolSize; ++i)
    if (kPool[i] == atom) return i;
  FAIL("atom outside the pool");
  return 0;
}

// Truth of an expression under a bitmask over kPool.
bool holds(const FilterExpr& e, unsigned mask) {
  switch (e.kind()) {
    case FilterExpr::Kind::atom: return (mask >> pool_index(e)) & 1u;
    case FilterExpr::Kind::require_not: return !holds(e.child(), mask);
    case FilterExpr::Kind::require_all:
      for (const auto& c : e.children())
        if (!holds(c, mask)) return false;
      return true;
    case FilterExpr::Kind::require_any:
      for (const auto& c : e.children())
        if (holds(c, mask)) return true;
      return false;
  }
  return false;
}

bool condition_holds(const Condition& c, unsigned mask) {
  switch (c.kind) {
    case Condition::Kind::never: return false;
    case Condition::Kind::always: return true;
    case Condition::Kind::when: return holds(*c.filter, mask);
  }
  return false;
}

Decision walk_mask(const OpGraph& g, unsigned mask) {
  return walk(g, [mask](const FilterExpr& f) { return holds(f, mask); });
}

// Random DAG: successors of node i are later nodes or terminals. Atoms may
// repeat along a path.
OpGraph random_dag(std::mt19937_64& rng) {
  OpGraph g;
  const int n = std::uniform_int_distribution<int>(1, 9)(rng);
  for (int i = 0; i < n; ++i) {
    auto succ = [&]() -> NodeRef {
      const int later = n - 1 - i;
      const int pick = std::uniform_int_distribution<int>(0, later + 1)(rng);
      if (pick < later) return static_cast<NodeRef>(i + 1 + pick);
      return pick == later ? kAllowRef : kDenyRef;
    };
    GraphNode node{kPool[std::uniform_int_distribution<std::size_t>(0, kPoolSize - 1)(rng)],
                   succ(), succ()};
    g.nodes.push_back(std::move(node));
  }
  g.entry = 0;
  return g;
}

}  // namespace

TEST_CASE("a negated node feeding require-all") {
  OpGraph g;
  g.nodes = {{vnode("REGULAR-FILE"), 1, kDenyRef}, {sock("SOCK_STREAM"), kDenyRef, kAllowRef}};
  g.entry = 0;
  CHECK(match_graph_violation(g, Decision::deny).has_value());
  const OpGraph n = normalize_graph(g, Decision::deny);
  CHECK_FALSE(match_graph_violation(n, Decision::deny));
  CHECK(n.nodes[1].filter == FilterExpr::negate(sock("SOCK_STREAM")));
  CHECK(n.nodes[1].match == kAllowRef);
  CHECK(n.nodes[1].unmatch == kDenyRef);
  const Condition c = aggregate(n, Decision::allow);
  REQUIRE(c.kind == Condition::Kind::when);
  CHECK(*c.filter ==
        canonicalize(FilterExpr::all({vnode("REGULAR-FILE"), FilterExpr::negate(sock("SOCK_STREAM"))})));
}

TEST_CASE("three-node graph from a hand blob") {
  const BinaryProfile bp = decode_blob(three_node_blob());
  const OpGraph g = build_graph(bp, small_vocab().operations.lookup("file-read*"), small_vocab());
  REQUIRE(g.nodes.size() == 3);
  CHECK(g.nodes[0].filter == vnode("REGULAR-FILE"));
  CHECK(g.nodes[1].filter == target("self"));
  CHECK(g.nodes[2].filter == sock("SOCK_STREAM"));
  const OpGraph n = normalize_graph(g, Decision::deny);
  CHECK_FALSE(match_graph_violation(n, Decision::deny));
  const Condition c = aggregate(n, Decision::allow);
  REQUIRE(c.kind == Condition::Kind::when);
  CHECK(*c.filter ==
        canonicalize(FilterExpr::all({vnode("REGULAR-FILE"),
                                      FilterExpr::any({FilterExpr::negate(sock("SOCK_STREAM")),
                                                       target("self")})})));
  // Operations without rules reach deny directly.
  const OpGraph empty = build_graph(bp, 0, small_vocab());
  CHECK(empty.nodes.empty());
  CHECK(empty.entry == kDenyRef);
  CHECK(aggregate(empty, Decision::allow).kind == Condition::Kind::never);
  CHECK(aggregate(empty, Decision::deny).kind == Condition::Kind::always);
}

TEST_CASE("graph builder rejects cycles and unknown keys") {
  const std::size_t ops = small_vocab().operations.size();
  const std::uint16_t b = first_node_unit(ops);
  std::vector<std::uint16_t> ptrs(ops, b);
  const BinaryProfile cyc = decode_blob(
      hand_blob(ptrs, {node(0x1d, 1, b + 1, b + 2), node(0x1d, 2, b, b + 2),
                       NodeRecord::terminal(Decision::allow), NodeRecord::terminal(Decision::deny)}),
      {.verify_graph = false});
  try {
    build_graph(cyc, 0, small_vocab());
    FAIL("expected a cycle");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::cycle_detected);
  }
  const BinaryProfile unknown = decode_blob(
      hand_blob(ptrs, {node(0x7e, 1, b + 1, b + 2), node(0x1d, 2, b + 2, b + 3),
                       NodeRecord::terminal(Decision::allow), NodeRecord::terminal(Decision::deny)}));
  CHECK_THROWS_AS(build_graph(unknown, 0, small_vocab()), Error);
  const BinaryProfile bad_value = decode_blob(
      hand_blob(ptrs, {node(0x1d, 99, b + 1, b + 2), node(0x1d, 2, b + 2, b + 3),
                       NodeRecord::terminal(Decision::allow), NodeRecord::terminal(Decision::deny)}));
  CHECK_THROWS_AS(build_graph(bad_value, 0, small_vocab()), Error);
}

TEST_CASE("normalization keeps walk verdicts on 500 random graphs") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 500; ++i) {
    const OpGraph g = random_dag(rng);
    for (Decision def : {Decision::deny, Decision::allow}) {
      const OpGraph n = normalize_graph(g, def);
      CHECK_FALSE(match_graph_violation(n, def));
      for (unsigned m = 0; m < (1u << kPoolSize); ++m)
        REQUIRE(walk_mask(n, m) == walk_mask(g, m));
    }
  }
}

TEST_CASE("aggregation agrees with graph walks") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 500; ++i) {
    const OpGraph g = normalize_graph(random_dag(rng), Decision::deny);
    for (Decision target : {Decision::allow, Decision::deny}) {
      const Condition c = aggregate(g, target);
      if (c.filter) CHECK(canonicalize(*c.filter) == *c.filter);
      for (unsigned m = 0; m < (1u << kPoolSize); ++m)
        REQUIRE((walk_mask(g, m) == target) == condition_holds(c, m));
    }
  }
}

TEST_CASE("aggregation budget") {
  std::mt19937_64 rng(33);
  OpGraph g = random_dag(rng);
  while (g.nodes.size() < 6) g = random_dag(rng);
  AggregateOptions tight;
  tight.max_atoms = 1;
  const Condition full = aggregate(g, Decision::allow);
  if (full.filter && full.filter->atom_count() > 1)
    CHECK_THROWS_AS(aggregate(g, Decision::allow, tight), Error);
}

TEST_CASE("walk on degenerate graphs") {
  OpGraph g;
  g.nodes = {{vnode("FIFO"), kAllowRef, kAllowRef}};
  g.entry = 0;
  CHECK(walk(g, [](const FilterExpr&) { return false; }) == Decision::allow);
  const OpGraph n = normalize_graph(g, Decision::deny);
  CHECK(n.entry == kAllowRef);
  CHECK(aggregate(g, Decision::allow).kind == Condition::Kind::always);
}

TEST_CASE("dot rendering") {
  const BinaryProfile bp = decode_blob(three_node_blob());
  const OpGraph g = build_graph(bp, small_vocab().operations.lookup("file-read*"), small_vocab());
  std::string summary;
  const std::string dot = to_dot(g, small_vocab().filters, "file-read*", &summary);
  CHECK(summary == "3 non-terminal, 2 terminal; 6 edges");
  CHECK(dot.rfind("digraph \"file-read*\" {", 0) == 0);
  CHECK(dot.find("penwidth=3") != std::string::npos);
  CHECK(dot.find("(vnode-type REGULAR-FILE)") != std::string::npos);
  std::size_t dashed = 0;
  for (std::size_t at = 0; (at = dot.find("style=dashed", at)) != std::string::npos; ++at) ++dashed;
  CHECK(dashed == 3);
}

TEST_CASE("regex patterns of a blob") {
  const BinaryProfile bp = decode_blob(compile_profile(fixture("pty-extension"), small_vocab()));
  const RegexPatterns serial(bp, false);
  const RegexPatterns parallel(bp, true);
  REQUIRE(serial.size() == 1);
  CHECK(serial.pattern(0) == parallel.pattern(0));
  CHECK(serial.pattern(0).front() == '^');
}
