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

#ifndef SBX_SEXPR_HPP_
#define SBX_SEXPR_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sbx/error.hpp"

namespace sbx {

struct SExpr {
  enum class Kind : std::uint8_t {
    symbol,    // identifiers, including #t/#f and 'quoted names
    string,    // "..."
    regex,     // #"..."
    integer,
    list,
  };

  Kind kind = Kind::list;
  std::string token;  // source text of an atom, escapes and markers intact
  std::string text;   // decoded value of an atom
  std::int64_t number = 0;
  std::vector<SExpr> children;
  SourceSpan span;

  bool is_list() const noexcept { return kind == Kind::list; }
  bool is_symbol(std::string_view name) const noexcept {
    return kind == Kind::symbol && text == name;
  }
  // Symbol at the head of a non-empty list, or "".
  std::string_view head() const noexcept {
    if (kind != Kind::list || children.empty() || children[0].kind != Kind::symbol)
      return {};
    return children[0].text;
  }
};

// Reads every top-level form. ';' starts a comment running to end of line.
// Throws SyntaxError with the position of the offending character.
std::vector<SExpr> read_sexprs(std::string_view text);

}  // namespace sbx

#endif  // SBX_SEXPR_HPP_
