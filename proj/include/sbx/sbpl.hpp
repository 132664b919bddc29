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

// SBPL reader and printer.

#ifndef SBX_SBPL_HPP_
#define SBX_SBPL_HPP_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbx/model.hpp"
#include "sbx/sexpr.hpp"
#include "sbx/vocab.hpp"

namespace sbx {

// Rules keep source order. Sibling filters in one rule become a single
// require-any. Throws SyntaxError, Error(unsupported_version) for a version
// other than 1, and Error(unsupported_construct) for define/if/import.
// Vocabulary checks are left to validate_profile.
Profile parse_sbpl(std::string_view text, std::string name = {});

// (key value), (remote tcp "host:port") or a require-* metafilter.
FilterExpr parse_filter(const SExpr& form);

// (allow|deny op... filter...) -> one (operation, rule) per named operation.
std::vector<std::pair<std::string, Rule>> parse_rule_form(const SExpr& form);

// "(version 1)", the default rule, then operations in table order. A rule
// whose filter is a require-any prints its alternatives as sibling filters.
std::string print_sbpl(const Profile& profile, const Vocabulary& vocab);

std::string print_filter(const FilterExpr& expr, const FilterVocabulary& vocab);

}  // namespace sbx

#endif  // SBX_SBPL_HPP_
