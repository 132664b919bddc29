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

#include "sbx/sbpl.hpp"

#include <set>

#include "sbx/error.hpp"

namespace sbx {
namespace {

constexpr std::size_t kLineWidth = 80;

FilterValue atom_value(const SExpr& e) {
  switch (e.kind) {
    case SExpr::Kind::string:
    case SExpr::Kind::regex: return e.text;
    case SExpr::Kind::integer: return e.number;
    case SExpr::Kind::symbol: return Symbol{e.text};
    case SExpr::Kind::list: break;
  }
  throw SyntaxError(e.span, "filter value must be an atom");
}

std::optional<Decision> decision_of(std::string_view head) {
  if (head == "allow") return Decision::allow;
  if (head == "deny") return Decision::deny;
  return std::nullopt;
}

std::string quote(const std::string& s, bool raw) {
  std::string out = raw ? "#\"" : "\"";
  for (char c : s) {
    if (c == '"' || (!raw && c == '\\')) out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string value_text(const FilterExpr& atom, const FilterVocabulary& vocab) {
  const FilterKey* key = vocab.find(atom.key());
  const bool raw = key && key->kind == ValueKind::regex_index;
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return quote(v, raw);
        } else if constexpr (std::is_same_v<T, Symbol>) {
          return v.name;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          return v.protocol + " " + quote(v.address, false);
        }
      },
      atom.value());
}

const char* metafilter_name(FilterExpr::Kind k) {
  switch (k) {
    case FilterExpr::Kind::require_all: return "require-all";
    case FilterExpr::Kind::require_any: return "require-any";
    case FilterExpr::Kind::require_not: return "require-not";
    default: return "";
  }
}

std::string flat(const FilterExpr& e, const FilterVocabulary& vocab) {
  if (e.is_atom()) return "(" + e.key() + " " + value_text(e, vocab) + ")";
  std::string out = "(";
  out += metafilter_name(e.kind());
  for (const auto& c : e.children()) out += " " + flat(c, vocab);
  return out + ")";
}

void layout(const FilterExpr& e, const FilterVocabulary& vocab, std::size_t indent,
            std::string& out) {
  std::string one = flat(e, vocab);
  if (e.is_atom() || indent + one.size() <= kLineWidth) {
    out += one;
    return;
  }
  out += "(";
  out += metafilter_name(e.kind());
  for (const auto& c : e.children()) {
    out += "\n" + std::string(indent + 4, ' ');
    layout(c, vocab, indent + 4, out);
  }
  out += ")";
}

void print_rule(const std::string& op, const Rule& rule, const FilterVocabulary& vocab,
                std::string& out) {
  std::string head = "(" + std::string(to_string(rule.decision)) + " " + op;
  if (!rule.filter) {
    out += head + ")\n";
    return;
  }
  std::vector<FilterExpr> parts;
  if (rule.filter->kind() == FilterExpr::Kind::require_any)
    parts = rule.filter->children();
  else
    parts.push_back(*rule.filter);

  std::string single = head;
  for (const auto& p : parts) single += " " + flat(p, vocab);
  if (single.size() + 1 <= kLineWidth) {
    out += single + ")\n";
    return;
  }
  out += head;
  for (const auto& p : parts) {
    out += "\n    ";
    layout(p, vocab, 4, out);
  }
  out += ")\n";
}

}  // namespace

FilterExpr parse_filter(const SExpr& form) {
  if (!form.is_list() || form.children.empty())
    throw SyntaxError(form.span, "expected a filter list");
  const SExpr& head = form.children[0];
  if (head.kind != SExpr::Kind::symbol)
    throw SyntaxError(head.span, "filter must start with a key name");
  const std::string& name = head.text;
  const auto nargs = form.children.size() - 1;

  if (name == "require-all" || name == "require-any") {
    std::vector<FilterExpr> kids;
    for (std::size_t i = 1; i < form.children.size(); ++i)
      kids.push_back(parse_filter(form.children[i]));
    return name == "require-all" ? FilterExpr::all(std::move(kids))
                                 : FilterExpr::any(std::move(kids));
  }
  if (name == "require-not") {
    if (nargs != 1) throw SyntaxError(form.span, "require-not takes exactly one filter");
    return FilterExpr::negate(parse_filter(form.children[1]));
  }
  if (nargs == 1) return FilterExpr::atom(name, atom_value(form.children[1]));
  if (nargs == 2) {
    const SExpr& proto = form.children[1];
    const SExpr& addr = form.children[2];
    if (proto.kind != SExpr::Kind::symbol || addr.kind != SExpr::Kind::string)
      throw SyntaxError(form.span, "two-argument filter must be (key protocol \"address\")");
    return FilterExpr::atom(name, Endpoint{proto.text, addr.text});
  }
  throw SyntaxError(form.span, "filter '" + name + "' needs a value");
}

std::vector<std::pair<std::string, Rule>> parse_rule_form(const SExpr& form) {
  auto decision = decision_of(form.head());
  if (!decision) throw SyntaxError(form.span, "expected (allow ...) or (deny ...)");
  std::vector<std::string> ops;
  std::vector<FilterExpr> filters;
  for (std::size_t i = 1; i < form.children.size(); ++i) {
    const SExpr& c = form.children[i];
    if (c.kind == SExpr::Kind::symbol) {
      if (!filters.empty())
        throw SyntaxError(c.span, "operation name after a filter");
      ops.push_back(c.text);
    } else if (c.is_list()) {
      filters.push_back(parse_filter(c));
    } else {
      throw SyntaxError(c.span, "unexpected atom in rule");
    }
  }
  if (ops.empty()) throw SyntaxError(form.span, "rule names no operation");
  Rule rule{*decision, std::nullopt};
  if (filters.size() == 1)
    rule.filter = std::move(filters.front());
  else if (!filters.empty())
    rule.filter = FilterExpr::any(std::move(filters));
  std::vector<std::pair<std::string, Rule>> out;
  for (auto& op : ops) out.emplace_back(std::move(op), rule);
  return out;
}

Profile parse_sbpl(std::string_view text, std::string name) {
  Profile p;
  p.name = std::move(name);
  for (const SExpr& form : read_sexprs(text)) {
    if (!form.is_list() || form.children.empty())
      throw SyntaxError(form.span, "top-level form must be a non-empty list");
    const std::string_view head = form.head();
    if (head == "version") {
      if (form.children.size() != 2 || form.children[1].kind != SExpr::Kind::integer)
        throw SyntaxError(form.span, "expected (version N)");
      if (form.children[1].number != 1)
        throw Error(ErrorKind::unsupported_version,
                    "version " + std::to_string(form.children[1].number));
      continue;
    }
    if (head == "define" || head == "if" || head == "import")
      throw Error(ErrorKind::unsupported_construct,
                  std::to_string(form.span.line) + ":" + std::to_string(form.span.column) +
                      ": '" + std::string(head) + "' is only accepted in implicit-rule files");
    for (auto& [op, rule] : parse_rule_form(form)) p.rules[op].push_back(std::move(rule));
  }
  return p;
}

std::string print_filter(const FilterExpr& expr, const FilterVocabulary& vocab) {
  std::string out;
  layout(expr, vocab, 0, out);
  return out;
}

std::string print_sbpl(const Profile& profile, const Vocabulary& vocab) {
  std::string out = "(version 1)\n";
  out += "(" + std::string(to_string(profile.default_decision())) + " default)\n";
  std::set<std::string> done{kDefaultOperation};
  auto emit = [&](const std::string& op) {
    auto it = profile.rules.find(op);
    if (it == profile.rules.end() || !done.insert(op).second) return;
    for (const Rule& r : it->second) print_rule(op, r, vocab.filters, out);
  };
  for (const auto& op : vocab.operations.names()) emit(op);
  for (const auto& [op, rules] : profile.rules) emit(op);
  if (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

}  // namespace sbx
