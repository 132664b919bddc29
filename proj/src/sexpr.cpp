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

#include "sbx/sexpr.hpp"

#include <charconv>
#include <utility>

namespace sbx {
namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    for (;;) {
      skip_space();
      if (eof()) return out;
      if (peek() == ')') throw SyntaxError(span(), "unexpected ')'");
      out.push_back(read());
    }
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  SourceSpan span() const { return {line_, column_}; }

  char take() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (!eof()) {
      char c = peek();
      if (c == ';') {
        while (!eof() && peek() != '\n') take();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
        take();
      } else {
        return;
      }
    }
  }

  static bool delimiter(char c) {
    return c == '(' || c == ')' || c == ' ' || c == '\t' || c == '\n' ||
           c == '\r' || c == '\f' || c == ';' || c == '"';
  }

  SExpr read() {
    SExpr e;
    e.span = span();
    const char c = peek();
    if (c == '(') {
      take();
      e.kind = SExpr::Kind::list;
      for (;;) {
        skip_space();
        if (eof()) throw SyntaxError(e.span, "unbalanced '(': list is never closed");
        if (peek() == ')') {
          take();
          return e;
        }
        e.children.push_back(read());
      }
    }
    const std::size_t begin = pos_;
    if (c == '"') {
      e.kind = SExpr::Kind::string;
      e.text = read_string(false);
    } else if (c == '#' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
      take();
      e.kind = SExpr::Kind::regex;
      e.text = read_string(true);
    } else {
      while (!eof() && !delimiter(peek())) take();
      if (pos_ == begin) throw SyntaxError(e.span, "unexpected character");
      e.text = std::string(text_.substr(begin, pos_ - begin));
      e.kind = SExpr::Kind::symbol;
      const char* first = e.text.data();
      const char* last = first + e.text.size();
      auto [ptr, ec] = std::from_chars(first, last, e.number);
      if (ec == std::errc() && ptr == last) e.kind = SExpr::Kind::integer;
    }
    e.token = std::string(text_.substr(begin, pos_ - begin));
    return e;
  }

  // Plain strings honour \" and \; regex literals are raw except \".
  std::string read_string(bool raw) {
    const SourceSpan start = span();
    take();  // opening quote
    std::string out;
    for (;;) {
      if (eof()) throw SyntaxError(start, "unterminated string");
      char c = take();
      if (c == '"') return out;
      if (c == '\\' && !eof()) {
        char n = peek();
        if (n == '"' || (!raw && n == '\\')) {
          out.push_back(take());
          continue;
        }
      }
      out.push_back(c);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace

std::vector<SExpr> read_sexprs(std::string_view text) { return Reader(text).read_all(); }

}  // namespace sbx
