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

// Regex syntax tree for the subset used by sandbox path filters: literals,
// '.', classes, '^'/'$', grouping, alternation and the * + ? quantifiers.

#ifndef SBX_REGEX_HPP_
#define SBX_REGEX_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sbx {

struct ByteRange {
  std::uint8_t lo = 0;
  std::uint8_t hi = 0;
  auto operator<=>(const ByteRange&) const = default;
};

// Sorts and merges overlapping or adjacent ranges.
std::vector<ByteRange> normalize_ranges(std::vector<ByteRange> ranges);

class RegexAst {
 public:
  enum class Kind : std::uint8_t {
    empty,
    ch,
    any_char,
    char_class,
    anchor_start,
    anchor_end,
    concat,
    alternate,
    star,
    plus,
    optional,
  };

  // Raw constructors build exactly the requested node.
  static RegexAst empty();
  static RegexAst ch(std::uint8_t c);
  static RegexAst any_char();
  static RegexAst char_class(bool negated, std::vector<ByteRange> ranges);
  static RegexAst anchor_start();
  static RegexAst anchor_end();
  static RegexAst concat(std::vector<RegexAst> children);
  static RegexAst alternate(std::vector<RegexAst> children);
  static RegexAst star(RegexAst child);
  static RegexAst plus(RegexAst child);
  static RegexAst optional(RegexAst child);

  // The language that contains no string at all.
  static RegexAst nothing();

  Kind kind() const noexcept { return node_->kind; }
  std::uint8_t byte() const noexcept { return node_->byte; }
  bool negated() const noexcept { return node_->negated; }
  const std::vector<ByteRange>& ranges() const noexcept { return node_->ranges; }
  const std::vector<RegexAst>& children() const noexcept { return node_->children; }
  const RegexAst& child() const { return node_->children.front(); }
  // Node count of the tree.
  std::size_t size() const noexcept { return node_->size; }

  bool is_quantifier() const noexcept {
    return kind() == Kind::star || kind() == Kind::plus ||
           kind() == Kind::optional;
  }

  friend bool operator==(const RegexAst& a, const RegexAst& b);
  friend std::strong_ordering operator<=>(const RegexAst& a, const RegexAst& b);

 private:
  struct Node {
    Kind kind = Kind::empty;
    std::uint8_t byte = 0;
    bool negated = false;
    std::vector<ByteRange> ranges;
    std::vector<RegexAst> children;
    std::size_t size = 1;
  };

  explicit RegexAst(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static RegexAst make(Node node);

  std::shared_ptr<const Node> node_;
};

// Throws DecodeError(regex_syntax, position) on malformed input.
RegexAst parse_regex(std::string_view pattern);

// Renders a tree back to pattern text accepted by parse_regex.
std::string to_pattern(const RegexAst& ast);

// True if the empty string matches unconditionally. Anchors are not
// nullable: they only match at a string boundary.
bool nullable(const RegexAst& ast);

// Simplifying builders used when reassembling patterns from automata. Each
// returns a tree whose language equals the raw construction.
namespace rx {
RegexAst seq(std::vector<RegexAst> parts);
RegexAst alt(std::vector<RegexAst> parts);
RegexAst star(RegexAst x);
RegexAst plus(RegexAst x);
RegexAst opt(RegexAst x);
}  // namespace rx

}  // namespace sbx

#endif  // SBX_REGEX_HPP_
