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

#include "sbx/evaluator.hpp"

#include <omp.h>

#include <algorithm>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <functional>
#include <unordered_map>

#include "sbx/error.hpp"
#include "sbx/regex.hpp"

namespace sbx {

QueryContext parse_context(std::string_view text) {
  QueryContext ctx;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::syntax,
                  "context line " + std::to_string(line_no) + ": expected key=value");
    std::string key = line.substr(first, eq - first);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (key.empty())
      throw Error(ErrorKind::syntax, "context line " + std::to_string(line_no) + ": empty key");
    ctx[key] = line.substr(eq + 1);
  }
  return ctx;
}

std::string format_context(const QueryContext& ctx) {
  if (ctx.empty()) return "{}";
  std::string out = "{";
  for (const auto& [k, v] : ctx) {
    if (out.size() > 1) out += ", ";
    out += k + "=" + v;
  }
  return out + "}";
}

// ---------------------------------------------------------------------------

namespace {

std::string value_string(const FilterValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) return x;
        else if constexpr (std::is_same_v<T, Symbol>) return x.name;
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
        else return x.text();
      },
      v);
}

}  // namespace

AtomMatcher::AtomMatcher(const FilterKey& key, FilterValue value) : key_(&key) {
  if (key.kind == ValueKind::regex_index) {
    const auto* pattern = std::get_if<std::string>(&value);
    if (!pattern) throw Error(ErrorKind::unknown_filter_value, key.name + " expects a pattern");
    nfa_ = std::make_shared<const Nfa>(build_nfa(parse_regex(*pattern)));
  } else {
    expected_ = value_string(value);
  }
}

AtomMatcher::AtomMatcher(const FilterKey& key, Nfa program)
    : key_(&key), nfa_(std::make_shared<const Nfa>(std::move(program))) {}

bool AtomMatcher::operator()(const QueryContext& ctx) const {
  auto it = ctx.find(key_->binding);
  if (it == ctx.end()) return false;
  if (nfa_) return nfa_match(*nfa_, it->second, MatchMode::search);
  return it->second == expected_;
}

const std::vector<Rule>* effective_rules(const Profile& p, const OperationTable& ops,
                                         std::size_t op) {
  for (std::size_t cur = op;; cur = ops.parent(cur)) {
    auto it = p.rules.find(ops.name(cur));
    if (it != p.rules.end() && !it->second.empty()) return &it->second;
    if (cur == 0) return nullptr;
  }
}

namespace {

bool eval_expr(const FilterExpr& e, const QueryContext& ctx, const Vocabulary& vocab) {
  switch (e.kind()) {
    case FilterExpr::Kind::atom:
      return AtomMatcher(vocab.filters.lookup(e.key()), e.value())(ctx);
    case FilterExpr::Kind::require_not: return !eval_expr(e.child(), ctx, vocab);
    case FilterExpr::Kind::require_all:
      for (const auto& c : e.children())
        if (!eval_expr(c, ctx, vocab)) return false;
      return true;
    case FilterExpr::Kind::require_any:
      for (const auto& c : e.children())
        if (eval_expr(c, ctx, vocab)) return true;
      return false;
  }
  return false;
}

}  // namespace

Decision evaluate_ast(const Profile& p, std::string_view op, const QueryContext& ctx,
                      const Vocabulary& vocab) {
  const std::size_t index = vocab.operations.lookup(op);
  const Decision fallback = p.default_decision();
  if (index == 0) return fallback;
  if (const auto* rules = effective_rules(p, vocab.operations, index)) {
    for (const Rule& r : *rules)
      if (!r.filter || eval_expr(*r.filter, ctx, vocab)) return r.decision;
  }
  return fallback;
}

// ---------------------------------------------------------------------------

ProfileEvaluator::ProfileEvaluator(const Profile& p, const Vocabulary& vocab)
    : vocab_(&vocab), default_(p.default_decision()) {
  std::map<std::pair<std::string, std::string>, int> atom_ids;
  auto compile = [&](auto& self, const FilterExpr& e) -> int {
    NodeData n{e.kind(), -1, {}};
    if (e.is_atom()) {
      auto key = std::make_pair(e.key(), describe(e.value()));
      auto it = atom_ids.find(key);
      if (it == atom_ids.end()) {
        atoms_.emplace_back(vocab.filters.lookup(e.key()), e.value());
        it = atom_ids.emplace(key, static_cast<int>(atoms_.size() - 1)).first;
      }
      n.atom = it->second;
    } else {
      for (const auto& c : e.children()) n.children.push_back(self(self, c));
    }
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size() - 1);
  };
  const auto* default_rules = effective_rules(p, vocab.operations, 0);
  ops_.resize(vocab.operations.size());
  for (std::size_t op = 1; op < ops_.size(); ++op) {
    const auto* rules = effective_rules(p, vocab.operations, op);
    if (!rules || rules == default_rules) continue;
    for (const Rule& r : *rules)
      ops_[op].push_back({r.decision, r.filter ? compile(compile, *r.filter) : -1});
  }
}

bool ProfileEvaluator::eval(int node, const QueryContext& ctx) const {
  const NodeData& n = nodes_[static_cast<std::size_t>(node)];
  switch (n.kind) {
    case FilterExpr::Kind::atom: return atoms_[static_cast<std::size_t>(n.atom)](ctx);
    case FilterExpr::Kind::require_not: return !eval(n.children.front(), ctx);
    case FilterExpr::Kind::require_all:
      for (int c : n.children)
        if (!eval(c, ctx)) return false;
      return true;
    case FilterExpr::Kind::require_any:
      for (int c : n.children)
        if (eval(c, ctx)) return true;
      return false;
  }
  return false;
}

Decision ProfileEvaluator::operator()(std::size_t op, const QueryContext& ctx) const {
  for (const auto& r : ops_.at(op))
    if (r.root < 0 || eval(r.root, ctx)) return r.decision;
  return default_;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<AtomMatcher> resolve_atom(const BinaryProfile& bp, const NodeRecord& r,
                                        const Vocabulary& vocab, std::size_t at) {
  const FilterKey* key = vocab.filters.by_code(r.key);
  if (!key)
    throw DecodeError(ErrorKind::unknown_filter_key, at,
                      "filter key " + std::to_string(r.key) + " not in vocabulary");
  switch (key->kind) {
    case ValueKind::regex_index: return AtomMatcher(*key, deserialize_nfa(bp.regex_program(r.value)));
    case ValueKind::literal_string: return AtomMatcher(*key, bp.pool_string(r.value));
    case ValueKind::network_endpoint: {
      std::string text = bp.pool_string(r.value);
      auto sp = text.find(' ');
      if (sp == std::string::npos)
        throw DecodeError(ErrorKind::malformed_blob, at, "endpoint entry without protocol");
      return AtomMatcher(*key, Endpoint{text.substr(0, sp), text.substr(sp + 1)});
    }
    case ValueKind::enum_named: {
      const std::string* name = key->name_for(r.value);
      if (!name)
        throw DecodeError(ErrorKind::unknown_filter_value, at,
                          key->name + " has no value " + std::to_string(r.value));
      return AtomMatcher(*key, Symbol{*name});
    }
    case ValueKind::numeric: return AtomMatcher(*key, std::int64_t{r.value});
  }
  return std::nullopt;
}

}  // namespace

BlobEvaluator::BlobEvaluator(const BinaryProfile& bp, const Vocabulary& vocab) : bp_(&bp) {
  if (bp.op_count != vocab.operations.size())
    throw Error(ErrorKind::malformed_blob,
                "blob has " + std::to_string(bp.op_count) + " operations, vocabulary " +
                    std::to_string(vocab.operations.size()));
  atoms_.resize(bp.nodes.size());
  for (std::size_t i = 0; i < bp.nodes.size(); ++i)
    if (!bp.nodes[i].is_terminal())
      atoms_[i] = resolve_atom(bp, bp.nodes[i], vocab, (bp.node_begin + i) * kRecordSize);
}

Decision BlobEvaluator::operator()(std::size_t op, const QueryContext& ctx,
                                   std::vector<std::uint16_t>* trace) const {
  std::uint16_t cur = bp_->op_pointers.at(op);
  for (std::size_t steps = 0; steps <= bp_->nodes.size(); ++steps) {
    const NodeRecord& r = bp_->node_at(cur);
    if (trace) trace->push_back(cur);
    if (r.is_terminal()) return r.decision();
    cur = (*atoms_[cur - bp_->node_begin])(ctx) ? r.match : r.unmatch;
  }
  throw DecodeError(ErrorKind::cycle_detected, std::size_t{cur} * kRecordSize,
                    "walk exceeded the node count");
}

Decision evaluate(const BinaryProfile& bp, std::string_view op, const QueryContext& ctx,
                  const Vocabulary& vocab, std::vector<std::uint16_t>* trace) {
  const std::size_t index = vocab.operations.lookup(op);
  return BlobEvaluator(bp, vocab)(index, ctx, trace);
}

// ---------------------------------------------------------------------------
// Context universes

namespace {

void gather(const FilterExpr& e, std::vector<FilterExpr>& out) {
  if (e.is_atom()) {
    out.push_back(e);
    return;
  }
  for (const auto& c : e.children()) gather(c, out);
}

}  // namespace

std::vector<FilterExpr> collect_atoms(const PolicySource& src, const Vocabulary& vocab) {
  std::vector<FilterExpr> out;
  if (const auto* p = std::get_if<const Profile*>(&src)) {
    for (const auto& [op, rules] : (*p)->rules)
      for (const auto& r : rules)
        if (r.filter) gather(*r.filter, out);
  } else {
    const BinaryProfile& bp = *std::get<const BinaryProfile*>(src);
    std::map<std::uint16_t, std::string> patterns;
    for (std::size_t i = 0; i < bp.nodes.size(); ++i) {
      const NodeRecord& r = bp.nodes[i];
      if (r.is_terminal()) continue;
      const FilterKey* key = vocab.filters.by_code(r.key);
      if (!key) continue;
      if (key->kind == ValueKind::regex_index) {
        auto it = patterns.find(r.value);
        if (it == patterns.end())
          it = patterns
                   .emplace(r.value,
                            to_pattern(nfa_to_regex(deserialize_nfa(bp.regex_program(r.value)))))
                   .first;
        out.push_back(FilterExpr::atom(key->name, it->second));
        continue;
      }
      switch (key->kind) {
        case ValueKind::literal_string:
          out.push_back(FilterExpr::atom(key->name, bp.pool_string(r.value)));
          break;
        case ValueKind::network_endpoint: {
          std::string text = bp.pool_string(r.value);
          auto sp = text.find(' ');
          out.push_back(FilterExpr::atom(key->name, Endpoint{text.substr(0, sp), text.substr(sp + 1)}));
          break;
        }
        case ValueKind::enum_named:
          out.push_back(FilterExpr::atom(key->name, Symbol{*key->name_for(r.value)}));
          break;
        case ValueKind::numeric:
          out.push_back(FilterExpr::atom(key->name, std::int64_t{r.value}));
          break;
        case ValueKind::regex_index: break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ContextUniverse::ContextUniverse(const std::vector<FilterExpr>& atoms, const Vocabulary& vocab) {
  std::map<std::string, std::size_t> slot;
  auto values_for = [&](const std::string& binding) -> std::vector<std::optional<std::string>>& {
    auto it = slot.find(binding);
    if (it == slot.end()) {
      it = slot.emplace(binding, bindings_.size()).first;
      bindings_.push_back(binding);
      values_.push_back({std::nullopt, std::string("~other~")});
    }
    return values_[it->second];
  };
  auto add = [](std::vector<std::optional<std::string>>& vs, std::string v) {
    if (std::find(vs.begin(), vs.end(), std::optional<std::string>(v)) == vs.end())
      vs.emplace_back(std::move(v));
  };
  for (const auto& a : atoms) {
    const FilterKey& key = vocab.filters.lookup(a.key());
    auto& vs = values_for(key.binding);
    if (key.kind == ValueKind::regex_index) {
      const auto& pattern = std::get<std::string>(a.value());
      for (const auto& w : sample_accepted(build_nfa(parse_regex(pattern)), 2, 16)) {
        add(vs, w);
        add(vs, "~" + w);
        add(vs, w + "~");
      }
    } else {
      add(vs, value_string(a.value()));
    }
  }
  for (const auto& vs : values_) {
    if (size_ > std::numeric_limits<std::size_t>::max() / vs.size()) {
      size_ = std::numeric_limits<std::size_t>::max();
      break;
    }
    size_ *= vs.size();
  }
}

QueryContext ContextUniverse::from_choices(const std::vector<std::size_t>& choice) const {
  QueryContext ctx;
  for (std::size_t b = 0; b < bindings_.size(); ++b)
    if (const auto& v = values_[b][choice[b]]) ctx.emplace(bindings_[b], *v);
  return ctx;
}

QueryContext ContextUniverse::at(std::size_t index) const {
  std::vector<std::size_t> choice(bindings_.size());
  for (std::size_t b = 0; b < bindings_.size(); ++b) {
    choice[b] = index % values_[b].size();
    index /= values_[b].size();
  }
  return from_choices(choice);
}

// ---------------------------------------------------------------------------
// Equivalence

namespace {

std::vector<std::size_t> selected_ops(const Vocabulary& vocab, const EquivalenceOptions& opts) {
  std::vector<std::size_t> ops;
  if (opts.ops.empty()) {
    for (std::size_t i = 0; i < vocab.operations.size(); ++i) ops.push_back(i);
  } else {
    for (const auto& name : opts.ops) ops.push_back(vocab.operations.lookup(name));
    std::sort(ops.begin(), ops.end());
    ops.erase(std::unique(ops.begin(), ops.end()), ops.end());
  }
  return ops;
}

// The contexts to visit, as choice vectors.
struct Plan {
  ContextUniverse universe;
  bool exhaustive;
  std::vector<std::vector<std::size_t>> samples;

  std::size_t count() const { return exhaustive ? universe.size() : samples.size(); }
  QueryContext context(std::size_t i) const {
    return exhaustive ? universe.at(i) : universe.from_choices(samples[i]);
  }
  void choices(std::size_t i, std::vector<std::size_t>& out) const {
    if (!exhaustive) {
      out = samples[i];
      return;
    }
    const auto& values = universe.values();
    out.resize(values.size());
    for (std::size_t b = 0; b < values.size(); ++b) {
      out[b] = i % values[b].size();
      i /= values[b].size();
    }
  }
};

Plan make_plan(const PolicySource& a, const PolicySource& b, const Vocabulary& vocab,
               const EquivalenceOptions& opts) {
  auto atoms = collect_atoms(a, vocab);
  auto more = collect_atoms(b, vocab);
  atoms.insert(atoms.end(), more.begin(), more.end());
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  Plan plan{ContextUniverse(atoms, vocab), true, {}};
  if (plan.universe.size() > opts.exhaustive_limit) {
    plan.exhaustive = false;
    std::mt19937_64 rng(opts.seed);
    const auto& values = plan.universe.values();
    plan.samples.resize(opts.samples);
    for (auto& choice : plan.samples) {
      choice.resize(values.size());
      for (std::size_t v = 0; v < values.size(); ++v)
        choice[v] = std::uniform_int_distribution<std::size_t>(0, values[v].size() - 1)(rng);
    }
  }
  return plan;
}

using Verdicts = std::function<Decision(std::size_t, const QueryContext&)>;

Verdicts direct(const PolicySource& src, const Vocabulary& vocab) {
  if (const auto* p = std::get_if<const Profile*>(&src)) {
    const Profile* profile = *p;
    return [profile, &vocab](std::size_t op, const QueryContext& ctx) {
      return evaluate_ast(*profile, vocab.operations.name(op), ctx, vocab);
    };
  }
  auto ev = std::make_shared<BlobEvaluator>(*std::get<const BinaryProfile*>(src), vocab);
  return [ev](std::size_t op, const QueryContext& ctx) { return (*ev)(op, ctx); };
}

// Atom table shared by both sides. An atom reads one binding only, so its
// truth is tabulated once per candidate value of that binding.
class TruthTable {
 public:
  int intern(std::string id, std::function<AtomMatcher()> make) {
    auto it = index_.find(id);
    if (it != index_.end()) return it->second;
    atoms_.push_back(make());
    return index_.emplace(std::move(id), static_cast<int>(atoms_.size() - 1)).first->second;
  }

  void prepare(const ContextUniverse& universe) {
    const auto& bindings = universe.bindings();
    const auto& values = universe.values();
    binding_.assign(atoms_.size(), -1);
    columns_.assign(atoms_.size(), {});
    const auto n = static_cast<std::int64_t>(atoms_.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto a = static_cast<std::size_t>(i);
      const auto& name = atoms_[a].key().binding;
      auto it = std::find(bindings.begin(), bindings.end(), name);
      if (it == bindings.end()) continue;
      const auto b = static_cast<std::size_t>(it - bindings.begin());
      binding_[a] = static_cast<int>(b);
      auto& column = columns_[a];
      column.resize(values[b].size());
      for (std::size_t v = 0; v < values[b].size(); ++v) {
        QueryContext ctx;
        if (values[b][v]) ctx.emplace(name, *values[b][v]);
        column[v] = atoms_[a](ctx) ? 1 : 0;
      }
    }
  }

  void fill(const std::vector<std::size_t>& choice, std::vector<std::uint8_t>& truth) const {
    truth.resize(atoms_.size());
    for (std::size_t a = 0; a < atoms_.size(); ++a)
      truth[a] = binding_[a] < 0 ? 0 : columns_[a][choice[static_cast<std::size_t>(binding_[a])]];
  }

 private:
  std::vector<AtomMatcher> atoms_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> binding_;
  std::vector<std::vector<std::uint8_t>> columns_;
};

class Program {
 public:
  virtual ~Program() = default;
  virtual Decision decide(std::size_t op, const std::vector<std::uint8_t>& truth) const = 0;
};

class AstProgram : public Program {
 public:
  AstProgram(const Profile& p, const Vocabulary& vocab, TruthTable& table)
      : default_(p.default_decision()), ops_(vocab.operations.size()) {
    const auto* default_rules = effective_rules(p, vocab.operations, 0);
    auto compile = [&](auto& self, const FilterExpr& e) -> int {
      Node n{e.kind(), -1, {}};
      if (e.is_atom()) {
        n.atom = table.intern(e.key() + "\x1f" + describe(e.value()), [&] {
          return AtomMatcher(vocab.filters.lookup(e.key()), e.value());
        });
      } else {
        for (const auto& c : e.children()) n.children.push_back(self(self, c));
      }
      nodes_.push_back(std::move(n));
      return static_cast<int>(nodes_.size() - 1);
    };
    for (std::size_t op = 1; op < ops_.size(); ++op) {
      const auto* rules = effective_rules(p, vocab.operations, op);
      if (!rules || rules == default_rules) continue;
      for (const Rule& r : *rules)
        ops_[op].emplace_back(r.decision, r.filter ? compile(compile, *r.filter) : -1);
    }
  }

  Decision decide(std::size_t op, const std::vector<std::uint8_t>& truth) const override {
    for (const auto& [d, root] : ops_[op])
      if (root < 0 || eval(root, truth)) return d;
    return default_;
  }

 private:
  struct Node {
    FilterExpr::Kind kind;
    int atom;
    std::vector<int> children;
  };

  bool eval(int i, const std::vector<std::uint8_t>& truth) const {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.kind) {
      case FilterExpr::Kind::atom: return truth[static_cast<std::size_t>(n.atom)] != 0;
      case FilterExpr::Kind::require_not: return !eval(n.children.front(), truth);
      case FilterExpr::Kind::require_all:
        return std::all_of(n.children.begin(), n.children.end(),
                           [&](int c) { return eval(c, truth); });
      case FilterExpr::Kind::require_any:
        return std::any_of(n.children.begin(), n.children.end(),
                           [&](int c) { return eval(c, truth); });
    }
    return false;
  }

  Decision default_;
  std::vector<std::vector<std::pair<Decision, int>>> ops_;
  std::vector<Node> nodes_;
};

class BlobProgram : public Program {
 public:
  BlobProgram(const BinaryProfile& bp, const Vocabulary& vocab, TruthTable& table) : bp_(bp) {
    if (bp.op_count != vocab.operations.size())
      throw Error(ErrorKind::malformed_blob, "operation count differs from the vocabulary");
    atom_.assign(bp.nodes.size(), -1);
    for (std::size_t i = 0; i < bp.nodes.size(); ++i) {
      const NodeRecord& r = bp.nodes[i];
      if (r.is_terminal()) continue;
      const std::size_t at = (bp.node_begin + i) * kRecordSize;
      const FilterKey* key = vocab.filters.by_code(r.key);
      std::string id;
      if (key && key->kind == ValueKind::regex_index) {
        auto prog = bp.regex_program(r.value);
        id = std::to_string(r.key) + "\x1fprog:" + std::string(prog.begin(), prog.end());
      } else if (key && key->uses_pool()) {
        id = std::to_string(r.key) + "\x1fpool:" + bp.pool_string(r.value);
      } else {
        id = std::to_string(r.key) + "\x1fimm:" + std::to_string(r.value);
      }
      atom_[i] = table.intern(id, [&] { return *resolve_atom(bp, r, vocab, at); });
    }
  }

  Decision decide(std::size_t op, const std::vector<std::uint8_t>& truth) const override {
    std::uint16_t cur = bp_.op_pointers[op];
    for (std::size_t steps = 0; steps <= bp_.nodes.size(); ++steps) {
      const std::size_t i = cur - bp_.node_begin;
      const NodeRecord& r = bp_.node_at(cur);
      if (r.is_terminal()) return r.decision();
      cur = truth[static_cast<std::size_t>(atom_[i])] ? r.match : r.unmatch;
    }
    throw DecodeError(ErrorKind::cycle_detected, std::size_t{cur} * kRecordSize,
                      "walk exceeded the node count");
  }

 private:
  const BinaryProfile& bp_;
  std::vector<int> atom_;
};

std::unique_ptr<Program> make_program(const PolicySource& src, const Vocabulary& vocab,
                                      TruthTable& table) {
  if (const auto* p = std::get_if<const Profile*>(&src))
    return std::make_unique<AstProgram>(**p, vocab, table);
  return std::make_unique<BlobProgram>(*std::get<const BinaryProfile*>(src), vocab, table);
}

EquivalenceReport finish(const Plan& plan, const Vocabulary& vocab,
                         const std::vector<std::size_t>& ops,
                         const std::vector<std::uint8_t>& bad_ops, std::size_t first_ctx,
                         std::size_t first_op, Decision da, Decision db) {
  EquivalenceReport report;
  report.exhaustive = plan.exhaustive;
  report.contexts = plan.count();
  for (std::size_t k = 0; k < ops.size(); ++k)
    if (bad_ops[k]) report.disagreeing_ops.push_back(vocab.operations.name(ops[k]));
  report.equivalent = report.disagreeing_ops.empty();
  if (!report.equivalent)
    report.witness = Disagreement{vocab.operations.name(first_op), plan.context(first_ctx), da, db};
  return report;
}

}  // namespace

EquivalenceReport check_equivalence_serial(const PolicySource& a, const PolicySource& b,
                                           const Vocabulary& vocab,
                                           const EquivalenceOptions& opts) {
  const auto ops = selected_ops(vocab, opts);
  const Plan plan = make_plan(a, b, vocab, opts);
  Verdicts va = direct(a, vocab), vb = direct(b, vocab);
  std::vector<std::uint8_t> bad(ops.size(), 0);
  std::size_t first_ctx = SIZE_MAX, first_op = 0;
  Decision da = Decision::deny, db = Decision::deny;
  for (std::size_t c = 0; c < plan.count(); ++c) {
    const QueryContext ctx = plan.context(c);
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const Decision x = va(ops[k], ctx), y = vb(ops[k], ctx);
      if (x == y) continue;
      bad[k] = 1;
      if (first_ctx == SIZE_MAX) {
        first_ctx = c;
        first_op = ops[k];
        da = x;
        db = y;
      }
    }
  }
  return finish(plan, vocab, ops, bad, first_ctx, first_op, da, db);
}

EquivalenceReport check_equivalence(const PolicySource& a, const PolicySource& b,
                                    const Vocabulary& vocab, const EquivalenceOptions& opts) {
  const auto ops = selected_ops(vocab, opts);
  const Plan plan = make_plan(a, b, vocab, opts);
  TruthTable table;
  auto pa = make_program(a, vocab, table);
  auto pb = make_program(b, vocab, table);
  table.prepare(plan.universe);

  const auto n = static_cast<std::int64_t>(plan.count());
  std::vector<std::uint8_t> bad(ops.size(), 0);
  std::size_t first = SIZE_MAX;  // context * ops.size() + op slot
  std::string error;

#pragma omp parallel
  {
    std::vector<std::uint8_t> truth;
    std::vector<std::size_t> choice;
    std::vector<std::uint8_t> local_bad(ops.size(), 0);
    std::size_t local_first = SIZE_MAX;
    std::string local_error;
#pragma omp for schedule(dynamic, 64) nowait
    for (std::int64_t c = 0; c < n; ++c) {
      if (!local_error.empty()) continue;
      try {
        plan.choices(static_cast<std::size_t>(c), choice);
        table.fill(choice, truth);
        for (std::size_t k = 0; k < ops.size(); ++k) {
          if (pa->decide(ops[k], truth) == pb->decide(ops[k], truth)) continue;
          local_bad[k] = 1;
          local_first = std::min(local_first, static_cast<std::size_t>(c) * ops.size() + k);
        }
      } catch (const std::exception& e) {
        local_error = e.what();
      }
    }
#pragma omp critical
    {
      for (std::size_t k = 0; k < ops.size(); ++k) bad[k] |= local_bad[k];
      first = std::min(first, local_first);
      if (error.empty()) error = local_error;
    }
  }
  if (!error.empty()) throw Error(ErrorKind::malformed_blob, error);

  if (first == SIZE_MAX) return finish(plan, vocab, ops, bad, 0, 0, Decision::deny, Decision::deny);
  const std::size_t c = first / ops.size(), op = ops[first % ops.size()];
  std::vector<std::uint8_t> truth;
  std::vector<std::size_t> choice;
  plan.choices(c, choice);
  table.fill(choice, truth);
  return finish(plan, vocab, ops, bad, c, op, pa->decide(op, truth), pb->decide(op, truth));
}

}  // namespace sbx
