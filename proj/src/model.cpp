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

#include "sbx/model.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "sbx/error.hpp"

namespace sbx {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::unknown_operation: return "UnknownOperation";
    case ErrorKind::unknown_filter_key: return "UnknownFilterKey";
    case ErrorKind::unknown_filter_value: return "UnknownFilterValue";
    case ErrorKind::vocabulary: return "VocabularyError";
    case ErrorKind::syntax: return "SyntaxError";
    case ErrorKind::unsupported_version: return "UnsupportedVersion";
    case ErrorKind::unsupported_construct: return "UnsupportedConstruct";
    case ErrorKind::regex_syntax: return "RegexSyntaxError";
    case ErrorKind::regex_too_complex: return "RegexTooComplex";
    case ErrorKind::too_many_states: return "TooManyStates";
    case ErrorKind::malformed_regex_blob: return "MalformedRegexBlob";
    case ErrorKind::capacity_exceeded: return "CapacityExceeded";
    case ErrorKind::malformed_blob: return "MalformedBlob";
    case ErrorKind::wrong_format_id: return "WrongFormatId";
    case ErrorKind::no_bundle_found: return "NoBundleFound";
    case ErrorKind::cycle_detected: return "CycleDetected";
    case ErrorKind::dangling_offset: return "DanglingOffset";
    case ErrorKind::irreducible_graph: return "IrreducibleGraph";
    case ErrorKind::invalid_profile: return "InvalidProfile";
    case ErrorKind::io: return "IoError";
  }
  return "Error";
}

const char* to_string(Decision d) noexcept {
  return d == Decision::allow ? "allow" : "deny";
}

std::string describe(const FilterValue& value) {
  struct Visitor {
    std::string operator()(const std::string& s) const { return '"' + s + '"'; }
    std::string operator()(const Symbol& s) const { return s.name; }
    std::string operator()(std::int64_t n) const { return std::to_string(n); }
    std::string operator()(const Endpoint& e) const {
      return e.protocol + " \"" + e.address + '"';
    }
  };
  return std::visit(Visitor{}, value);
}

FilterExpr FilterExpr::atom(std::string key, FilterValue value) {
  FilterExpr e;
  e.kind_ = Kind::atom;
  e.key_ = std::move(key);
  e.value_ = std::move(value);
  return e;
}

FilterExpr FilterExpr::all(std::vector<FilterExpr> children) {
  FilterExpr e;
  e.kind_ = Kind::require_all;
  e.children_ = std::move(children);
  return e;
}

FilterExpr FilterExpr::any(std::vector<FilterExpr> children) {
  FilterExpr e;
  e.kind_ = Kind::require_any;
  e.children_ = std::move(children);
  return e;
}

FilterExpr FilterExpr::negate(FilterExpr child) {
  FilterExpr e;
  e.kind_ = Kind::require_not;
  e.children_.push_back(std::move(child));
  return e;
}

std::size_t FilterExpr::atom_count() const {
  if (is_atom()) return 1;
  std::size_t n = 0;
  for (const auto& c : children_) n += c.atom_count();
  return n;
}

std::strong_ordering operator<=>(const FilterExpr& a, const FilterExpr& b) {
  if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
  if (a.is_atom()) {
    if (auto c = a.key_ <=> b.key_; c != 0) return c;
    return a.value_ <=> b.value_;
  }
  return std::lexicographical_compare_three_way(
      a.children_.begin(), a.children_.end(), b.children_.begin(),
      b.children_.end());
}

std::string to_string(const FilterExpr& expr) {
  std::ostringstream out;
  switch (expr.kind()) {
    case FilterExpr::Kind::atom:
      out << '(' << expr.key() << ' ' << describe(expr.value()) << ')';
      break;
    case FilterExpr::Kind::require_not:
      out << "not(" << to_string(expr.child()) << ')';
      break;
    case FilterExpr::Kind::require_all:
    case FilterExpr::Kind::require_any: {
      out << (expr.kind() == FilterExpr::Kind::require_all ? "all(" : "any(");
      bool first = true;
      for (const auto& c : expr.children()) {
        if (!first) out << ", ";
        first = false;
        out << to_string(c);
      }
      out << ')';
      break;
    }
  }
  return out.str();
}

Decision Profile::default_decision() const {
  auto it = rules.find(kDefaultOperation);
  if (it == rules.end() || it->second.empty()) return Decision::deny;
  return it->second.front().decision;
}

void Profile::set_default(Decision d) {
  rules[kDefaultOperation] = {Rule{d, std::nullopt}};
}

FilterExpr canonicalize(const FilterExpr& expr) {
  switch (expr.kind()) {
    case FilterExpr::Kind::atom:
      return expr;
    case FilterExpr::Kind::require_not: {
      FilterExpr inner = canonicalize(expr.child());
      if (inner.kind() == FilterExpr::Kind::require_not) return inner.child();
      return FilterExpr::negate(std::move(inner));
    }
    case FilterExpr::Kind::require_all:
    case FilterExpr::Kind::require_any: {
      std::vector<FilterExpr> flat;
      for (const auto& c : expr.children()) {
        FilterExpr cc = canonicalize(c);
        if (cc.kind() == expr.kind()) {
          for (const auto& g : cc.children()) flat.push_back(g);
        } else {
          flat.push_back(std::move(cc));
        }
      }
      std::sort(flat.begin(), flat.end());
      flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
      if (flat.size() == 1) return std::move(flat.front());
      return expr.kind() == FilterExpr::Kind::require_all
                 ? FilterExpr::all(std::move(flat))
                 : FilterExpr::any(std::move(flat));
    }
  }
  return expr;
}

Profile canonicalize(const Profile& profile) {
  Profile out;
  out.name = profile.name;
  for (const auto& [op, rules] : profile.rules) {
    std::vector<Rule> merged;
    for (const Rule& r : rules) {
      if (!merged.empty() && !merged.back().filter) break;  // shadowed
      if (!merged.empty() && merged.back().decision == r.decision) {
        Rule& last = merged.back();
        if (!r.filter) {
          last.filter.reset();
        } else {
          last.filter = canonicalize(FilterExpr::any({*last.filter, *r.filter}));
        }
        continue;
      }
      Rule c = r;
      if (c.filter) c.filter = canonicalize(*c.filter);
      merged.push_back(std::move(c));
    }
    if (!merged.empty()) out.rules.emplace(op, std::move(merged));
  }
  return out;
}

}  // namespace sbx
