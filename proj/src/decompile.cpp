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

#include "sbx/decompile.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sbx/error.hpp"
#include "sbx/nfa.hpp"
#include "sbx/regex.hpp"
#include "sbx/sbpl.hpp"
#include "sbx/sexpr.hpp"

namespace sbx {

std::vector<Rule> rules_for(const Condition& c, Decision default_decision) {
  const Decision grant = negate(default_decision);
  switch (c.kind) {
    case Condition::Kind::never: return {Rule{default_decision, std::nullopt}};
    case Condition::Kind::always: return {Rule{grant, std::nullopt}};
    case Condition::Kind::when: break;
  }
  const FilterExpr& e = *c.filter;
  auto any_of = [](std::vector<FilterExpr> xs) {
    return xs.size() == 1 ? std::move(xs.front()) : FilterExpr::any(std::move(xs));
  };
  if (e.kind() == FilterExpr::Kind::require_not)
    return {Rule{default_decision, e.child()}, Rule{grant, std::nullopt}};
  if (e.kind() == FilterExpr::Kind::require_all) {
    std::vector<FilterExpr> excluded, rest;
    for (const auto& x : e.children()) {
      if (x.kind() == FilterExpr::Kind::require_not) excluded.push_back(x.child());
      else rest.push_back(x);
    }
    if (!excluded.empty()) {
      std::vector<Rule> out{Rule{default_decision, canonicalize(any_of(std::move(excluded)))}};
      if (rest.empty()) out.push_back(Rule{grant, std::nullopt});
      else if (rest.size() == 1) out.push_back(Rule{grant, std::move(rest.front())});
      else out.push_back(Rule{grant, FilterExpr::all(std::move(rest))});
      return out;
    }
  }
  return {Rule{grant, e}};
}

Profile emit_rules(const BinaryProfile& bp, const Vocabulary& vocab, const DecompileOptions& opts,
                   std::vector<OperationError>* errors) {
  const OperationTable& ops = vocab.operations;
  if (bp.op_count != ops.size())
    throw Error(ErrorKind::malformed_blob,
                "blob has " + std::to_string(bp.op_count) + " operations, vocabulary " +
                    std::to_string(ops.size()));
  const NodeRecord& root = bp.node_at(bp.op_pointers[0]);
  if (!root.is_terminal())
    throw Error(ErrorKind::malformed_blob, "default operation does not point at a terminal");
  const Decision def = root.decision();

  const RegexPatterns patterns(bp, opts.parallel);
  const auto n = static_cast<std::int64_t>(ops.size());
  std::vector<std::optional<std::vector<Rule>>> rules(ops.size());
  std::vector<std::optional<std::pair<ErrorKind, std::string>>> failures(ops.size());

#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (std::int64_t i = 1; i < n; ++i) {
    const auto op = static_cast<std::size_t>(i);
    if (bp.op_pointers[op] == bp.op_pointers[ops.parent(op)]) continue;
    try {
      OpGraph g = normalize_graph(build_graph(bp, op, vocab, &patterns), def);
      if (auto why = match_graph_violation(g, def))
        throw Error(ErrorKind::irreducible_graph, *why);
      rules[op] = rules_for(aggregate(g, negate(def), opts.aggregate), def);
    } catch (const Error& e) {
      failures[op] = std::make_pair(e.kind(), std::string(e.what()));
    } catch (const std::exception& e) {
      failures[op] = std::make_pair(ErrorKind::malformed_blob, std::string(e.what()));
    }
  }

  Profile p;
  p.name = bp.name;
  p.set_default(def);
  for (std::size_t op = 1; op < ops.size(); ++op) {
    if (failures[op]) {
      const std::string message = "operation " + ops.name(op) + ": " + failures[op]->second;
      if (!opts.permissive) throw Error(failures[op]->first, message);
      if (errors) errors->push_back({ops.name(op), failures[op]->second});
      continue;
    }
    if (rules[op]) p.rules[ops.name(op)] = std::move(*rules[op]);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Implicit rules

namespace {

[[noreturn]] void unsupported(const SExpr& form, const std::string& what) {
  throw Error(ErrorKind::unsupported_construct, std::to_string(form.span.line) + ":" +
                                                    std::to_string(form.span.column) + ": " + what);
}

std::string op_symbol(const SExpr& s) {
  if (s.kind != SExpr::Kind::symbol) unsupported(s, "expected an operation name");
  std::string name = s.text;
  if (!name.empty() && name.front() == '\'') name.erase(0, 1);
  return name;
}

ImplicitCondition parse_condition(const SExpr& form, bool negated) {
  const auto head = form.head();
  if (head == "not" && form.children.size() == 2) {
    ImplicitCondition c = parse_condition(form.children[1], !negated);
    return c;
  }
  if ((head == "allowed?" || head == "denied?") && form.children.size() == 2)
    return {head == "allowed?" ? Decision::allow : Decision::deny, op_symbol(form.children[1]),
            negated};
  unsupported(form, "condition must be (allowed? op), (denied? op) or (not ...)");
}

void parse_body(const SExpr& form, std::vector<ImplicitCondition> conditions, ImplicitRules& out) {
  const auto head = form.head();
  if (head == "if") {
    if (form.children.size() != 3) unsupported(form, "if takes a condition and one form");
    conditions.push_back(parse_condition(form.children[1], false));
    parse_body(form.children[2], std::move(conditions), out);
    return;
  }
  if (head == "allow" || head == "deny") {
    for (auto& [op, rule] : parse_rule_form(form))
      out.rules.push_back({conditions, std::move(op), std::move(rule)});
    return;
  }
  unsupported(form, "unexpected form in implicit rules");
}

}  // namespace

ImplicitRules parse_implicit_rules(std::string_view text) {
  ImplicitRules out;
  for (const SExpr& form : read_sexprs(text)) {
    const auto head = form.head();
    if (head == "version") {
      if (form.children.size() != 2 || form.children[1].kind != SExpr::Kind::integer ||
          form.children[1].number != 1)
        throw Error(ErrorKind::unsupported_version, "only (version 1) is supported");
      continue;
    }
    if (head == "define") {
      const auto sig = form.children.size() > 1 ? form.children[1].head() : std::string_view{};
      if (sig != "allowed?" && sig != "denied?")
        unsupported(form, "only the allowed? and denied? helpers may be defined");
      continue;
    }
    parse_body(form, {}, out);
  }
  return out;
}

ImplicitRules load_implicit_rules(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_implicit_rules(text.str());
}

bool can_return(const Profile& p, const OperationTable& ops, std::size_t op, Decision d) {
  if (const auto* rules = effective_rules(p, ops, op)) {
    for (const Rule& r : *rules) {
      if (r.decision == d) return true;
      if (!r.filter) return false;
    }
  }
  return p.default_decision() == d;
}

Profile with_implicits(const Profile& p, const ImplicitRules& implicit, const Vocabulary& vocab) {
  const OperationTable& ops = vocab.operations;
  std::map<std::size_t, std::vector<Rule>> added;
  for (const ImplicitRule& ir : implicit.rules) {
    bool holds = true;
    for (const auto& c : ir.conditions)
      holds = holds && (can_return(p, ops, ops.lookup(c.op), c.decision) != c.negated);
    if (holds) added[ops.lookup(ir.op)].push_back(ir.rule);
  }
  Profile q = p;
  for (auto& [op, rules] : added) {
    if (op == 0) throw Error(ErrorKind::invalid_profile, "implicit rule on the default operation");
    if (const auto* base = effective_rules(p, ops, op))
      rules.insert(rules.end(), base->begin(), base->end());
    q.rules[ops.name(op)] = std::move(rules);
  }
  for (std::size_t op = 1; op < ops.size(); ++op) {
    if (added.count(op)) continue;
    const auto* before = effective_rules(p, ops, op);
    const auto* after = effective_rules(q, ops, op);
    if (before && after && *before != *after) q.rules[ops.name(op)] = *before;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Cleanup

namespace {

// Regex atoms as the decompiler renders them, so implicit filters compare
// structurally with decompiled ones.
FilterExpr decompiled_form(const FilterExpr& e, const Vocabulary& vocab) {
  switch (e.kind()) {
    case FilterExpr::Kind::atom: {
      const FilterKey& key = vocab.filters.lookup(e.key());
      if (key.kind != ValueKind::regex_index) return e;
      const auto& pattern = std::get<std::string>(e.value());
      return FilterExpr::atom(
          e.key(), to_pattern(nfa_to_regex(deserialize_nfa(serialize_nfa(build_nfa(parse_regex(pattern)))))));
    }
    case FilterExpr::Kind::require_not: return FilterExpr::negate(decompiled_form(e.child(), vocab));
    case FilterExpr::Kind::require_all:
    case FilterExpr::Kind::require_any: {
      std::vector<FilterExpr> cs;
      for (const auto& c : e.children()) cs.push_back(decompiled_form(c, vocab));
      return e.kind() == FilterExpr::Kind::require_all ? FilterExpr::all(std::move(cs))
                                                       : FilterExpr::any(std::move(cs));
    }
  }
  return e;
}

std::vector<FilterExpr> disjuncts(const FilterExpr& e) {
  if (e.kind() == FilterExpr::Kind::require_any) return e.children();
  return {e};
}

std::vector<Rule> strip(const std::vector<Rule>& rules, const std::vector<Rule>& implicit) {
  std::vector<Rule> out;
  for (const Rule& r : rules) {
    std::optional<Rule> kept = r;
    for (const Rule& ir : implicit) {
      if (!kept || ir.decision != kept->decision) continue;
      if (!ir.filter) {
        if (!kept->filter) kept.reset();
        continue;
      }
      if (!kept->filter) continue;
      const auto drop = disjuncts(*ir.filter);
      std::vector<FilterExpr> left;
      for (const auto& d : disjuncts(*kept->filter))
        if (std::find(drop.begin(), drop.end(), d) == drop.end()) left.push_back(d);
      if (left.empty()) kept.reset();
      else if (left.size() == 1) kept->filter = std::move(left.front());
      else kept->filter = FilterExpr::any(std::move(left));
    }
    if (kept) out.push_back(std::move(*kept));
  }
  return out;
}

}  // namespace

Profile cleanup(const Profile& decompiled, const ImplicitRules& implicit, const Vocabulary& vocab,
                const EquivalenceOptions& check) {
  const OperationTable& ops = vocab.operations;
  std::map<std::size_t, std::vector<Rule>> by_op;
  for (const ImplicitRule& ir : implicit.rules) {
    Rule r = ir.rule;
    if (r.filter) r.filter = canonicalize(decompiled_form(*r.filter, vocab));
    by_op[ops.lookup(ir.op)].push_back(std::move(r));
  }
  if (by_op.empty()) return decompiled;

  // Targets first, then everything inheriting from one of them.
  auto descends = [&](std::size_t op, std::size_t ancestor) {
    for (std::size_t cur = op; cur != 0; cur = ops.parent(cur))
      if (cur == ancestor) return true;
    return ancestor == 0;
  };
  std::vector<std::size_t> candidates;
  for (std::size_t op = ops.size(); op-- > 1;)
    for (const auto& [target, rules] : by_op)
      if (descends(op, target)) {
        candidates.push_back(op);
        break;
      }

  Profile current = canonicalize(decompiled);
  auto equivalent = [&](const Profile& cand, std::size_t op) {
    EquivalenceOptions opts = check;
    opts.ops.clear();
    for (std::size_t o = 1; o < ops.size(); ++o)
      if (descends(o, op)) opts.ops.push_back(ops.name(o));
    const Profile seen = with_implicits(cand, implicit, vocab);
    return check_equivalence(&seen, &decompiled, vocab, opts).equivalent;
  };

  for (int pass = 0; pass < 3; ++pass) {
    bool changed = false;
    for (std::size_t op : candidates) {
      const std::string& name = ops.name(op);
      auto it = current.rules.find(name);
      if (it == current.rules.end()) continue;
      Profile cand = current;
      cand.rules.erase(name);
      if (equivalent(cand, op)) {
        current = std::move(cand);
        changed = true;
        continue;
      }
      auto rules_it = by_op.find(op);
      if (rules_it == by_op.end()) continue;
      auto stripped = strip(it->second, rules_it->second);
      if (stripped == it->second) continue;
      cand = current;
      if (stripped.empty()) cand.rules.erase(name);
      else cand.rules[name] = std::move(stripped);
      if (equivalent(cand, op)) {
        current = std::move(cand);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return current;
}

// ---------------------------------------------------------------------------

DecompiledProfile decompile_profile(const BinaryProfile& bp, const Vocabulary& vocab,
                                    const ImplicitRules* implicit, const DecompileOptions& opts) {
  DecompiledProfile out;
  out.name = bp.name;
  out.profile = emit_rules(bp, vocab, opts, &out.errors);
  if (implicit) out.profile = cleanup(out.profile, *implicit, vocab);
  std::string text;
  for (const auto& e : out.errors) text += "; skipped " + e.op + ": " + e.message + "\n";
  out.text = text + print_sbpl(out.profile, vocab);
  return out;
}

std::vector<DecompiledProfile> decompile(std::span<const std::uint8_t> blob,
                                         const Vocabulary& vocab, const ImplicitRules* implicit,
                                         const DecompileOptions& opts) {
  std::vector<DecompiledProfile> out;
  if (sniff_format(blob) == kBundledFormat) {
    for (const auto& view : unpack_bundle(blob).views)
      out.push_back(decompile_profile(view.profile, vocab, implicit, opts));
  } else {
    out.push_back(decompile_profile(decode_blob(blob), vocab, implicit, opts));
  }
  return out;
}

}  // namespace sbx
