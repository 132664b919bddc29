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

#include "sbx/regex.hpp"

#include <algorithm>
#include <cstring>

#include "sbx/error.hpp"

namespace sbx {

std::vector<ByteRange> normalize_ranges(std::vector<ByteRange> ranges) {
  std::sort(ranges.begin(), ranges.end());
  std::vector<ByteRange> out;
  for (const ByteRange& r : ranges) {
    if (!out.empty() && static_cast<int>(r.lo) <= out.back().hi + 1) {
      out.back().hi = std::max(out.back().hi, r.hi);
    } else {
      out.push_back(r);
    }
  }
  return out;
}

RegexAst RegexAst::make(Node node) {
  node.size = 1;
  for (const auto& c : node.children) node.size += c.size();
  return RegexAst(std::make_shared<const Node>(std::move(node)));
}

RegexAst RegexAst::empty() { return make(Node{Kind::empty}); }

RegexAst RegexAst::ch(std::uint8_t c) {
  Node n{Kind::ch};
  n.byte = c;
  return make(std::move(n));
}

RegexAst RegexAst::any_char() { return make(Node{Kind::any_char}); }

RegexAst RegexAst::char_class(bool negated, std::vector<ByteRange> ranges) {
  Node n{Kind::char_class};
  n.negated = negated;
  n.ranges = normalize_ranges(std::move(ranges));
  return make(std::move(n));
}

RegexAst RegexAst::anchor_start() { return make(Node{Kind::anchor_start}); }
RegexAst RegexAst::anchor_end() { return make(Node{Kind::anchor_end}); }

RegexAst RegexAst::concat(std::vector<RegexAst> children) {
  Node n{Kind::concat};
  n.children = std::move(children);
  return make(std::move(n));
}

RegexAst RegexAst::alternate(std::vector<RegexAst> children) {
  Node n{Kind::alternate};
  n.children = std::move(children);
  return make(std::move(n));
}

RegexAst RegexAst::star(RegexAst child) {
  Node n{Kind::star};
  n.children.push_back(std::move(child));
  return make(std::move(n));
}

RegexAst RegexAst::plus(RegexAst child) {
  Node n{Kind::plus};
  n.children.push_back(std::move(child));
  return make(std::move(n));
}

RegexAst RegexAst::optional(RegexAst child) {
  Node n{Kind::optional};
  n.children.push_back(std::move(child));
  return make(std::move(n));
}

RegexAst RegexAst::nothing() { return char_class(true, {{0x00, 0xff}}); }

std::strong_ordering operator<=>(const RegexAst& a, const RegexAst& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  if (auto c = a.byte() <=> b.byte(); c != 0) return c;
  if (auto c = a.negated() <=> b.negated(); c != 0) return c;
  if (auto c = std::lexicographical_compare_three_way(
          a.ranges().begin(), a.ranges().end(), b.ranges().begin(),
          b.ranges().end());
      c != 0)
    return c;
  return std::lexicographical_compare_three_way(
      a.children().begin(), a.children().end(), b.children().begin(),
      b.children().end());
}

bool operator==(const RegexAst& a, const RegexAst& b) { return (a <=> b) == 0; }

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  RegexAst parse() {
    if (text_.empty()) fail(0, "empty pattern");
    RegexAst r = parse_alternation();
    if (pos_ != text_.size()) fail(pos_, "unbalanced ')'");
    return r;
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& why) const {
    throw DecodeError(ErrorKind::regex_syntax, at, why);
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  RegexAst parse_alternation() {
    std::vector<RegexAst> parts{parse_sequence()};
    while (!eof() && peek() == '|') {
      ++pos_;
      parts.push_back(parse_sequence());
    }
    return parts.size() == 1 ? parts.front() : RegexAst::alternate(std::move(parts));
  }

  RegexAst parse_sequence() {
    std::vector<RegexAst> items;
    while (!eof() && peek() != '|' && peek() != ')') items.push_back(parse_repeat());
    if (items.empty()) return RegexAst::empty();
    return items.size() == 1 ? items.front() : RegexAst::concat(std::move(items));
  }

  RegexAst parse_repeat() {
    RegexAst r = parse_atom();
    while (!eof()) {
      switch (peek()) {
        case '*': r = RegexAst::star(std::move(r)); break;
        case '+': r = RegexAst::plus(std::move(r)); break;
        case '?': r = RegexAst::optional(std::move(r)); break;
        default: return r;
      }
      ++pos_;
    }
    return r;
  }

  std::uint8_t parse_escape() {
    // pos_ is just past the backslash.
    if (eof()) fail(pos_ - 1, "dangling backslash");
    char c = text_[pos_++];
    switch (c) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case 'x': {
        if (pos_ + 2 > text_.size()) fail(pos_ - 2, "truncated \\x escape");
        auto hex = [&](char h) -> int {
          if (h >= '0' && h <= '9') return h - '0';
          if (h >= 'a' && h <= 'f') return h - 'a' + 10;
          if (h >= 'A' && h <= 'F') return h - 'A' + 10;
          fail(pos_, "bad hex digit");
        };
        int v = hex(text_[pos_]) * 16 + hex(text_[pos_ + 1]);
        pos_ += 2;
        return static_cast<std::uint8_t>(v);
      }
      default: return static_cast<std::uint8_t>(c);
    }
  }

  RegexAst parse_atom() {
    const std::size_t start = pos_;
    char c = text_[pos_++];
    switch (c) {
      case '(': {
        RegexAst inner = parse_alternation();
        if (eof() || peek() != ')') fail(start, "unbalanced '('");
        ++pos_;
        return inner;
      }
      case ')': fail(start, "unbalanced ')'");
      case '*':
      case '+':
      case '?': fail(start, "quantifier without operand");
      case '[': return parse_class(start);
      case '.': return RegexAst::any_char();
      case '^': return RegexAst::anchor_start();
      case '$': return RegexAst::anchor_end();
      case '\\': return RegexAst::ch(parse_escape());
      default: return RegexAst::ch(static_cast<std::uint8_t>(c));
    }
  }

  RegexAst parse_class(std::size_t start) {
    bool negated = false;
    if (!eof() && peek() == '^') {
      negated = true;
      ++pos_;
    }
    std::vector<ByteRange> ranges;
    bool first = true;
    auto member = [&]() -> std::uint8_t {
      char c = text_[pos_++];
      if (c == '\\') return parse_escape();
      return static_cast<std::uint8_t>(c);
    };
    while (true) {
      if (eof()) fail(start, "unterminated character class");
      if (peek() == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      std::uint8_t lo = member();
      std::uint8_t hi = lo;
      if (pos_ + 1 < text_.size() && peek() == '-' && text_[pos_ + 1] != ']') {
        ++pos_;
        hi = member();
        if (hi < lo) fail(start, "reversed range in character class");
      }
      ranges.push_back({lo, hi});
    }
    return RegexAst::char_class(negated, std::move(ranges));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void put_byte(std::string& out, std::uint8_t b, const char* metas) {
  if (b < 0x20 || b >= 0x7f) {
    static const char* digits = "0123456789abcdef";
    out += "\\x";
    out += digits[b >> 4];
    out += digits[b & 0xf];
    return;
  }
  if (std::strchr(metas, static_cast<char>(b))) out += '\\';
  out += static_cast<char>(b);
}

constexpr const char* kMetas = ".[]()*+?|^$\\";
constexpr const char* kClassMetas = "]\\^-[";

// Precedence contexts: 0 alternation, 1 sequence, 2 quantifier operand.
void print(const RegexAst& a, std::string& out, int ctx) {
  using K = RegexAst::Kind;
  switch (a.kind()) {
    case K::empty: out += "()"; return;
    case K::ch: put_byte(out, a.byte(), kMetas); return;
    case K::any_char: out += '.'; return;
    case K::anchor_start: out += '^'; return;
    case K::anchor_end: out += '$'; return;
    case K::char_class:
      out += a.negated() ? "[^" : "[";
      for (const ByteRange& r : a.ranges()) {
        put_byte(out, r.lo, kClassMetas);
        if (r.hi == r.lo) continue;
        if (r.hi != r.lo + 1) out += '-';
        put_byte(out, r.hi, kClassMetas);
      }
      out += ']';
      return;
    case K::concat:
      if (ctx > 1) out += '(';
      for (const auto& c : a.children()) print(c, out, 1);
      if (ctx > 1) out += ')';
      return;
    case K::alternate: {
      if (ctx > 0) out += '(';
      bool first = true;
      for (const auto& c : a.children()) {
        if (!first) out += '|';
        first = false;
        print(c, out, 0);
      }
      if (ctx > 0) out += ')';
      return;
    }
    case K::star:
    case K::plus:
    case K::optional: {
      const RegexAst& c = a.child();
      bool group = c.kind() == K::concat || c.kind() == K::alternate ||
                   c.is_quantifier();
      if (group) out += '(';
      print(c, out, group ? 0 : 2);
      if (group) out += ')';
      out += a.kind() == K::star ? '*' : a.kind() == K::plus ? '+' : '?';
      return;
    }
  }
}

}  // namespace

RegexAst parse_regex(std::string_view pattern) { return Parser(pattern).parse(); }

std::string to_pattern(const RegexAst& ast) {
  std::string out;
  print(ast, out, 0);
  return out;
}

bool nullable(const RegexAst& ast) {
  using K = RegexAst::Kind;
  switch (ast.kind()) {
    case K::empty:
    case K::star:
    case K::optional:
      return true;
    case K::plus:
      return nullable(ast.child());
    case K::concat:
      return std::all_of(ast.children().begin(), ast.children().end(),
                         [](const RegexAst& c) { return nullable(c); });
    case K::alternate:
      return std::any_of(ast.children().begin(), ast.children().end(),
                         [](const RegexAst& c) { return nullable(c); });
    default:
      return false;
  }
}

namespace rx {
namespace {

using K = RegexAst::Kind;

bool is_nothing(const RegexAst& a) { return a == RegexAst::nothing(); }

std::vector<RegexAst> as_sequence(const RegexAst& a) {
  if (a.kind() == K::concat) return a.children();
  if (a.kind() == K::empty) return {};
  return {a};
}

bool ends_with(const std::vector<RegexAst>& v, const std::vector<RegexAst>& tail) {
  if (tail.empty() || tail.size() > v.size()) return false;
  return std::equal(tail.begin(), tail.end(), v.end() - tail.size());
}

void push_fused(std::vector<RegexAst>& out, RegexAst x) {
  if (!out.empty()) {
    const RegexAst& last = out.back();
    if (last.kind() == K::star && x.kind() == K::star && last.child() == x.child())
      return;  // y* y* = y*
    if (last.kind() == K::plus && x.kind() == K::star && last.child() == x.child())
      return;  // y+ y* = y+
    if (last.kind() == K::star && x.kind() == K::plus && last.child() == x.child()) {
      out.back() = x;  // y* y+ = y+
      return;
    }
    if (last.kind() == K::star && x == last.child()) {
      out.back() = RegexAst::plus(x);  // y* y = y+
      return;
    }
  }
  if (x.kind() == K::star) {
    auto body = as_sequence(x.child());
    if (ends_with(out, body)) {  // y y* = y+
      out.erase(out.end() - static_cast<std::ptrdiff_t>(body.size()), out.end());
      out.push_back(RegexAst::plus(x.child()));
      return;
    }
  }
  out.push_back(std::move(x));
}

}  // namespace

RegexAst seq(std::vector<RegexAst> parts) {
  std::vector<RegexAst> out;
  for (auto& p : parts) {
    if (is_nothing(p)) return RegexAst::nothing();
    if (p.kind() == K::concat) {
      for (const auto& c : p.children()) push_fused(out, c);
    } else if (p.kind() != K::empty) {
      push_fused(out, std::move(p));
    }
  }
  if (out.empty()) return RegexAst::empty();
  if (out.size() == 1) return out.front();
  return RegexAst::concat(std::move(out));
}

RegexAst alt(std::vector<RegexAst> parts) {
  bool has_empty = false;
  std::vector<RegexAst> flat;
  auto add = [&](const RegexAst& x, auto& self) -> void {
    switch (x.kind()) {
      case K::alternate:
        for (const auto& c : x.children()) self(c, self);
        return;
      case K::empty:
        has_empty = true;
        return;
      case K::optional:
        has_empty = true;
        self(x.child(), self);
        return;
      default:
        if (is_nothing(x)) return;
        if (std::find(flat.begin(), flat.end(), x) == flat.end()) flat.push_back(x);
    }
  };
  for (const auto& p : parts) add(p, add);

  if (flat.empty()) return has_empty ? RegexAst::empty() : RegexAst::nothing();

  RegexAst body = flat.front();
  if (flat.size() > 1) {
    std::vector<std::vector<RegexAst>> seqs;
    for (const auto& f : flat) seqs.push_back(as_sequence(f));
    std::size_t shortest = seqs.front().size();
    for (const auto& s : seqs) shortest = std::min(shortest, s.size());

    std::size_t prefix = 0;
    while (prefix < shortest &&
           std::all_of(seqs.begin(), seqs.end(), [&](const auto& s) {
             return s[prefix] == seqs.front()[prefix];
           }))
      ++prefix;
    std::size_t suffix = 0;
    if (prefix == 0) {
      while (suffix < shortest &&
             std::all_of(seqs.begin(), seqs.end(), [&](const auto& s) {
               return s[s.size() - 1 - suffix] ==
                      seqs.front()[seqs.front().size() - 1 - suffix];
             }))
        ++suffix;
    }

    if (prefix > 0 || suffix > 0) {
      std::vector<RegexAst> rests;
      for (const auto& s : seqs)
        rests.push_back(seq(std::vector<RegexAst>(s.begin() + prefix, s.end() - suffix)));
      std::vector<RegexAst> whole(seqs.front().begin(), seqs.front().begin() + prefix);
      whole.push_back(alt(std::move(rests)));
      whole.insert(whole.end(), seqs.front().end() - suffix, seqs.front().end());
      body = seq(std::move(whole));
    } else {
      body = RegexAst::alternate(std::move(flat));
    }
  }
  return has_empty ? opt(std::move(body)) : body;
}

RegexAst star(RegexAst x) {
  switch (x.kind()) {
    case K::empty: return x;
    case K::star: return x;
    case K::plus:
    case K::optional: return star(x.child());
    default:
      if (is_nothing(x)) return RegexAst::empty();
      return RegexAst::star(std::move(x));
  }
}

RegexAst plus(RegexAst x) {
  switch (x.kind()) {
    case K::empty:
    case K::star:
    case K::plus: return x;
    case K::optional: return star(x.child());
    default:
      if (is_nothing(x)) return x;
      if (nullable(x)) return star(std::move(x));
      return RegexAst::plus(std::move(x));
  }
}

RegexAst opt(RegexAst x) {
  if (x.kind() == K::plus) return star(x.child());
  if (is_nothing(x)) return RegexAst::empty();
  if (nullable(x)) return x;
  return RegexAst::optional(std::move(x));
}

}  // namespace rx
}  // namespace sbx
