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

// Reference semantics for profiles and compiled blobs, and the equivalence
// checker built on them.

#ifndef SBX_EVALUATOR_HPP_
#define SBX_EVALUATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sbx/blob.hpp"
#include "sbx/model.hpp"
#include "sbx/nfa.hpp"
#include "sbx/vocab.hpp"

namespace sbx {

// Binding name -> value. literal and regex both read "path"; enum values
// are their names, numbers are decimal, endpoints are "proto address".
using QueryContext = std::map<std::string, std::string>;

// Parses "key=value" lines (blank lines and '#' comments skipped).
// Throws Error(syntax) on a line without '='.
QueryContext parse_context(std::string_view text);
std::string format_context(const QueryContext& ctx);

// One filter atom bound to its vocabulary entry, regexes precompiled.
class AtomMatcher {
 public:
  AtomMatcher(const FilterKey& key, FilterValue value);
  // Regex atoms taken from a blob carry their program instead of a pattern.
  AtomMatcher(const FilterKey& key, Nfa program);

  bool operator()(const QueryContext& ctx) const;
  const FilterKey& key() const noexcept { return *key_; }

 private:
  const FilterKey* key_;
  std::string expected_;
  std::shared_ptr<const Nfa> nfa_;
};

// Operation lookup with inheritance: an operation without rules uses its
// parent's, up to "default".
const std::vector<Rule>* effective_rules(const Profile& p, const OperationTable& ops,
                                         std::size_t op);

Decision evaluate_ast(const Profile& p, std::string_view op, const QueryContext& ctx,
                      const Vocabulary& vocab);

// Walks the node DAG of one operation. `trace`, when given, receives the
// unit offsets visited, terminal last.
Decision evaluate(const BinaryProfile& bp, std::string_view op, const QueryContext& ctx,
                  const Vocabulary& vocab, std::vector<std::uint16_t>* trace = nullptr);

// Reusable evaluators: atoms are resolved once.
class ProfileEvaluator {
 public:
  ProfileEvaluator(const Profile& p, const Vocabulary& vocab);
  Decision operator()(std::size_t op, const QueryContext& ctx) const;

 private:
  struct CompiledRule {
    Decision decision;
    int root;  // -1 = unconditional
  };
  bool eval(int node, const QueryContext& ctx) const;

  const Vocabulary* vocab_;
  Decision default_;
  std::vector<std::vector<CompiledRule>> ops_;  // effective rules per op
  std::vector<AtomMatcher> atoms_;
  struct NodeData {
    FilterExpr::Kind kind;
    int atom;
    std::vector<int> children;
  };
  std::vector<NodeData> nodes_;
};

class BlobEvaluator {
 public:
  BlobEvaluator(const BinaryProfile& bp, const Vocabulary& vocab);
  Decision operator()(std::size_t op, const QueryContext& ctx,
                      std::vector<std::uint16_t>* trace = nullptr) const;

 private:
  const BinaryProfile* bp_;
  std::vector<std::optional<AtomMatcher>> atoms_;  // per node record
};

// A profile or a decoded blob.
using PolicySource = std::variant<const Profile*, const BinaryProfile*>;

// Atoms of a source, regex atoms of blobs rendered back to patterns.
std::vector<FilterExpr> collect_atoms(const PolicySource& src, const Vocabulary& vocab);

// Finite set of contexts: for every binding, "unbound" plus a handful of
// values derived from the atoms (literals, regex witnesses and near misses,
// enum names, numbers, endpoints, and one value matching nothing).
class ContextUniverse {
 public:
  ContextUniverse(const std::vector<FilterExpr>& atoms, const Vocabulary& vocab);

  // Product of per-binding choice counts, saturating at SIZE_MAX.
  std::size_t size() const noexcept { return size_; }
  QueryContext at(std::size_t index) const;
  QueryContext from_choices(const std::vector<std::size_t>& choice) const;
  const std::vector<std::string>& bindings() const noexcept { return bindings_; }
  // values()[b][0] is the unbound marker.
  const std::vector<std::vector<std::optional<std::string>>>& values() const noexcept {
    return values_;
  }

 private:
  std::vector<std::string> bindings_;
  std::vector<std::vector<std::optional<std::string>>> values_;
  std::size_t size_ = 1;
};

struct EquivalenceOptions {
  std::uint64_t seed = 1;
  std::size_t samples = 10000;             // used when the universe is larger
  std::size_t exhaustive_limit = 1u << 16;  // universes up to this size are enumerated
  std::vector<std::string> ops;            // empty = every operation
};

struct Disagreement {
  std::string op;
  QueryContext context;
  Decision a = Decision::deny;
  Decision b = Decision::deny;
};

struct EquivalenceReport {
  bool equivalent = true;
  bool exhaustive = true;
  std::size_t contexts = 0;
  std::optional<Disagreement> witness;  // lowest (context, op) disagreement
  std::vector<std::string> disagreeing_ops;  // table order
};

// Parallel over contexts with per-context atom truth tables.
EquivalenceReport check_equivalence(const PolicySource& a, const PolicySource& b,
                                    const Vocabulary& vocab,
                                    const EquivalenceOptions& opts = {});

// Serial reference: evaluates every context directly, no precomputation.
EquivalenceReport check_equivalence_serial(const PolicySource& a, const PolicySource& b,
                                           const Vocabulary& vocab,
                                           const EquivalenceOptions& opts = {});

}  // namespace sbx

#endif  // SBX_EVALUATOR_HPP_
