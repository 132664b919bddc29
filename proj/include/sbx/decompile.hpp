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

// Blob -> Profile -> SBPL, and the implicit-rule preprocessor.

#ifndef SBX_DECOMPILE_HPP_
#define SBX_DECOMPILE_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sbx/blob.hpp"
#include "sbx/evaluator.hpp"
#include "sbx/graph.hpp"
#include "sbx/model.hpp"
#include "sbx/vocab.hpp"

namespace sbx {

struct DecompileOptions {
  bool permissive = false;  // skip failing operations instead of throwing
  bool parallel = true;
  AggregateOptions aggregate;
};

struct OperationError {
  std::string op;
  std::string message;
};

// Turns one operation's reach condition into rules. Negated conjuncts
// become leading default-decision exception rules.
std::vector<Rule> rules_for(const Condition& c, Decision default_decision);

// Default from operation 0's terminal; every operation whose pointer differs
// from its parent's gets its own rules. Errors name the operation; in
// permissive mode they are collected into `errors` and the operation skipped.
Profile emit_rules(const BinaryProfile& bp, const Vocabulary& vocab,
                   const DecompileOptions& opts = {}, std::vector<OperationError>* errors = nullptr);

// Implicit rules: standard-policy glue applied to every compiled profile.
struct ImplicitCondition {
  Decision decision = Decision::allow;  // allowed? or denied?
  std::string op;
  bool negated = false;
};

struct ImplicitRule {
  std::vector<ImplicitCondition> conditions;  // all must hold
  std::string op;
  Rule rule;
};

struct ImplicitRules {
  std::vector<ImplicitRule> rules;
};

// Accepts version, the allowed?/denied? defines, rule forms and (if cond
// form...) with (allowed? op), (denied? op) and (not cond). Throws
// SyntaxError or Error(unsupported_construct).
ImplicitRules parse_implicit_rules(std::string_view text);
ImplicitRules load_implicit_rules(const std::filesystem::path& path);

// Whether some query on `op` can end with decision d.
bool can_return(const Profile& p, const OperationTable& ops, std::size_t op, Decision d);

// The profile the compiler sees: applicable implicit rules are prepended to
// the effective rules of their operation. Operations that inherited from a
// changed one keep their previous rules.
Profile with_implicits(const Profile& p, const ImplicitRules& implicit, const Vocabulary& vocab);

// Removes implicit rules from a decompiled profile. Every change is checked:
// with_implicits(result) stays equivalent to `decompiled`.
Profile cleanup(const Profile& decompiled, const ImplicitRules& implicit, const Vocabulary& vocab,
                const EquivalenceOptions& check = {});

struct DecompiledProfile {
  std::string name;  // bundle name, empty for separated blobs
  Profile profile;
  std::string text;
  std::vector<OperationError> errors;
};

// Sniffs the format; one entry per profile, bundle order.
std::vector<DecompiledProfile> decompile(std::span<const std::uint8_t> blob,
                                         const Vocabulary& vocab,
                                         const ImplicitRules* implicit = nullptr,
                                         const DecompileOptions& opts = {});

DecompiledProfile decompile_profile(const BinaryProfile& bp, const Vocabulary& vocab,
                                    const ImplicitRules* implicit = nullptr,
                                    const DecompileOptions& opts = {});

}  // namespace sbx

#endif  // SBX_DECOMPILE_HPP_
