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

// Policy AST shared by the frontend, the codec, the decompiler and the
// evaluator.

#ifndef SBX_MODEL_HPP_
#define SBX_MODEL_HPP_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sbx {

enum class Decision : std::uint8_t { deny = 0, allow = 1 };

constexpr Decision negate(Decision d) noexcept {
  return d == Decision::allow ? Decision::deny : Decision::allow;
}

const char* to_string(Decision d) noexcept;

// A bare identifier value such as REGULAR-FILE or self.
struct Symbol {
  std::string name;
  auto operator<=>(const Symbol&) const = default;
};

// (remote tcp "localhost:22")
struct Endpoint {
  std::string protocol;
  std::string address;
  auto operator<=>(const Endpoint&) const = default;

  std::string text() const { return protocol + " " + address; }
};

// Strings carry both literal paths and regex patterns; the filter key decides.
using FilterValue = std::variant<std::string, Symbol, std::int64_t, Endpoint>;

std::string describe(const FilterValue& value);

class FilterExpr {
 public:
  enum class Kind : std::uint8_t { atom, require_not, require_all, require_any };

  static FilterExpr atom(std::string key, FilterValue value);
  static FilterExpr all(std::vector<FilterExpr> children);
  static FilterExpr any(std::vector<FilterExpr> children);
  static FilterExpr negate(FilterExpr child);

  Kind kind() const noexcept { return kind_; }
  bool is_atom() const noexcept { return kind_ == Kind::atom; }

  const std::string& key() const noexcept { return key_; }
  const FilterValue& value() const noexcept { return value_; }
  const std::vector<FilterExpr>& children() const noexcept { return children_; }
  // Only valid for require_not.
  const FilterExpr& child() const { return children_.front(); }

  // Number of atom occurrences in the tree.
  std::size_t atom_count() const;

  friend bool operator==(const FilterExpr&, const FilterExpr&) = default;
  friend std::strong_ordering operator<=>(const FilterExpr& a,
                                          const FilterExpr& b);

 private:
  FilterExpr() = default;

  Kind kind_ = Kind::atom;
  std::string key_;
  FilterValue value_;
  std::vector<FilterExpr> children_;
};

// Compact single-line rendering, e.g. all(A, any(not(B), C)).
std::string to_string(const FilterExpr& expr);

struct Rule {
  Decision decision = Decision::deny;
  std::optional<FilterExpr> filter;  // absent = unconditional

  friend bool operator==(const Rule&, const Rule&) = default;
};

inline constexpr const char* kDefaultOperation = "default";

struct Profile {
  std::string name;
  // Operation name -> rules in source order. "default" carries one
  // unconditional rule holding the profile's default decision.
  std::map<std::string, std::vector<Rule>> rules;

  Decision default_decision() const;
  void set_default(Decision d);

  friend bool operator==(const Profile&, const Profile&) = default;
};

// Flattens nested all/any, removes double negation, sorts and deduplicates
// children, and collapses single-child composites. Idempotent.
FilterExpr canonicalize(const FilterExpr& expr);

// Canonical per-operation rule lists: filters canonicalized, consecutive rules
// with the same decision merged into one require-any rule, rules shadowed by
// an unconditional rule dropped, empty operations removed. The profile name
// is preserved.
Profile canonicalize(const Profile& profile);

}  // namespace sbx

#endif  // SBX_MODEL_HPP_
