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

#ifndef SBX_VOCAB_HPP_
#define SBX_VOCAB_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sbx/model.hpp"

namespace sbx {

// Ordered operation names. The position of a name is the index used by the
// operation pointer table of a compiled blob.
class OperationTable {
 public:
  OperationTable() = default;
  // parents[i] is the operation i falls back to when it has no rules; the
  // root of every chain is index 0 ("default"). Throws on invariant breaks.
  OperationTable(std::string version_tag, std::vector<std::string> names,
                 std::vector<std::size_t> parents);

  std::size_t lookup(std::string_view name) const;  // throws unknown_operation
  std::optional<std::size_t> find(std::string_view name) const;

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  std::size_t parent(std::size_t index) const { return parents_.at(index); }
  const std::string& version_tag() const noexcept { return version_tag_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::string version_tag_;
  std::vector<std::string> names_;
  std::vector<std::size_t> parents_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class ValueKind : std::uint8_t {
  literal_string,
  regex_index,
  enum_named,
  numeric,
  network_endpoint,
};

std::string_view to_string(ValueKind kind);

inline constexpr std::uint8_t kRegexKeyBit = 0x80;

struct FilterKey {
  std::string name;
  std::uint8_t code = 0;
  ValueKind kind = ValueKind::literal_string;
  // Context binding the key tests; literal and regex both test "path".
  std::string binding;
  std::vector<std::pair<std::string, std::uint16_t>> named_values;

  std::optional<std::uint16_t> code_for(std::string_view value_name) const;
  const std::string* name_for(std::uint16_t value_code) const;

  // Pool-backed kinds store an index into the literal/regex pool.
  bool uses_pool() const noexcept {
    return kind == ValueKind::literal_string || kind == ValueKind::regex_index ||
           kind == ValueKind::network_endpoint;
  }
};

class FilterVocabulary {
 public:
  FilterVocabulary() = default;
  explicit FilterVocabulary(std::vector<FilterKey> keys);  // validates

  const FilterKey& lookup(std::string_view name) const;  // unknown_filter_key
  const FilterKey* find(std::string_view name) const;
  const FilterKey* by_code(std::uint8_t code) const;

  const std::vector<FilterKey>& keys() const noexcept { return keys_; }
  std::vector<std::string> bindings() const;

 private:
  std::vector<FilterKey> keys_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::unordered_map<std::uint8_t, std::size_t> by_code_;
};

struct Vocabulary {
  OperationTable operations;
  FilterVocabulary filters;
};

// Parses the line-oriented vocabulary format described in docs/vocab.md.
Vocabulary parse_vocabulary(std::string_view text);
Vocabulary load_vocabulary(const std::filesystem::path& path);

enum class DiagnosticKind {
  missing_default,
  default_not_unconditional,
  unknown_operation,
  unknown_filter_key,
  bad_filter_value,
  empty_metafilter,
};

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind;
  std::string message;
};

// Empty iff the profile satisfies every Profile/Rule/FilterExpr invariant
// against the given vocabulary.
std::vector<Diagnostic> validate_profile(const Profile& profile,
                                         const Vocabulary& vocab);

}  // namespace sbx

#endif  // SBX_VOCAB_HPP_
