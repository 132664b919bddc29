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

#include "sbx/vocab.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "sbx/error.hpp"
#include "sbx/regex.hpp"

namespace sbx {

OperationTable::OperationTable(std::string version_tag,
                               std::vector<std::string> names,
                               std::vector<std::size_t> parents)
    : version_tag_(std::move(version_tag)),
      names_(std::move(names)),
      parents_(std::move(parents)) {
  if (names_.empty() || names_.front() != kDefaultOperation)
    throw Error(ErrorKind::vocabulary, "operation 0 must be \"default\"");
  if (parents_.size() != names_.size())
    throw Error(ErrorKind::vocabulary, "parent list does not match operations");
  if (names_.size() > std::numeric_limits<std::uint16_t>::max())
    throw Error(ErrorKind::vocabulary, "too many operations");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second)
      throw Error(ErrorKind::vocabulary, "duplicate operation " + names_[i]);
    if (i == 0 ? parents_[i] != 0 : parents_[i] >= i)
      throw Error(ErrorKind::vocabulary,
                  "parent of " + names_[i] + " must precede it");
  }
}

std::optional<std::size_t> OperationTable::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t OperationTable::lookup(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(ErrorKind::unknown_operation, std::string(name));
}

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::literal_string: return "literal_string";
    case ValueKind::regex_index: return "regex_index";
    case ValueKind::enum_named: return "enum_named";
    case ValueKind::numeric: return "numeric";
    case ValueKind::network_endpoint: return "network_endpoint";
  }
  return "?";
}

std::optional<std::uint16_t> FilterKey::code_for(
    std::string_view value_name) const {
  for (const auto& [n, c] : named_values)
    if (n == value_name) return c;
  return std::nullopt;
}

const std::string* FilterKey::name_for(std::uint16_t value_code) const {
  for (const auto& [n, c] : named_values)
    if (c == value_code) return &n;
  return nullptr;
}

FilterVocabulary::FilterVocabulary(std::vector<FilterKey> keys)
    : keys_(std::move(keys)) {
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    FilterKey& k = keys_[i];
    if (k.binding.empty()) k.binding = k.name;
    if (!by_name_.emplace(k.name, i).second)
      throw Error(ErrorKind::vocabulary, "duplicate filter key " + k.name);
    if (!by_code_.emplace(k.code, i).second)
      throw Error(ErrorKind::vocabulary, "duplicate filter code for " + k.name);
    const bool high = (k.code & kRegexKeyBit) != 0;
    if (high != (k.kind == ValueKind::regex_index))
      throw Error(ErrorKind::vocabulary,
                  "filter " + k.name +
                      ": bit 0x80 is reserved for regex_index keys");
    if (k.kind == ValueKind::enum_named) {
      if (k.named_values.empty())
        throw Error(ErrorKind::vocabulary, "enum filter " + k.name + " has no values");
      std::set<std::uint16_t> codes;
      std::set<std::string> names;
      for (const auto& [n, c] : k.named_values)
        if (!codes.insert(c).second || !names.insert(n).second)
          throw Error(ErrorKind::vocabulary,
                      "duplicate value in enum filter " + k.name);
    } else if (!k.named_values.empty()) {
      throw Error(ErrorKind::vocabulary,
                  "named values on non-enum filter " + k.name);
    }
  }
}

const FilterKey* FilterVocabulary::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : &keys_[it->second];
}

const FilterKey& FilterVocabulary::lookup(std::string_view name) const {
  if (const FilterKey* k = find(name)) return *k;
  throw Error(ErrorKind::unknown_filter_key, std::string(name));
}

const FilterKey* FilterVocabulary::by_code(std::uint8_t code) const {
  auto it = by_code_.find(code);
  return it == by_code_.end() ? nullptr : &keys_[it->second];
}

std::vector<std::string> FilterVocabulary::bindings() const {
  std::vector<std::string> out;
  for (const auto& k : keys_)
    if (std::find(out.begin(), out.end(), k.binding) == out.end())
      out.push_back(k.binding);
  return out;
}

namespace {

[[noreturn]] void vocab_error(std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::vocabulary, "line " + std::to_string(line) + ": " + msg);
}

unsigned long parse_number(std::string_view text, std::size_t line) {
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    text.remove_prefix(2);
    base = 16;
  }
  unsigned long v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
  if (ec != std::errc{} || p != text.data() + text.size())
    vocab_error(line, "bad number '" + std::string(text) + "'");
  return v;
}

ValueKind parse_kind(const std::string& s, std::size_t line) {
  for (ValueKind k : {ValueKind::literal_string, ValueKind::regex_index,
                      ValueKind::enum_named, ValueKind::numeric,
                      ValueKind::network_endpoint})
    if (to_string(k) == s) return k;
  vocab_error(line, "unknown value kind '" + s + "'");
}

}  // namespace

Vocabulary parse_vocabulary(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  std::string tag;
  std::vector<std::string> ops;
  std::vector<std::size_t> parents;
  std::vector<FilterKey> keys;

  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream words(raw);
    std::string record;
    if (!(words >> record)) continue;
    std::string name;
    if (!(words >> name)) vocab_error(line_no, "record without a name");

    std::vector<std::pair<std::string, std::string>> attrs;
    for (std::string w; words >> w;) {
      auto eq = w.find('=');
      if (eq == std::string::npos) vocab_error(line_no, "expected key=value: " + w);
      attrs.emplace_back(w.substr(0, eq), w.substr(eq + 1));
    }

    if (record == "vocabulary") {
      tag = name;
    } else if (record == "operation") {
      std::size_t parent = 0;
      for (const auto& [k, v] : attrs) {
        if (k != "parent") vocab_error(line_no, "unknown attribute " + k);
        auto it = std::find(ops.begin(), ops.end(), v);
        if (it == ops.end()) vocab_error(line_no, "parent " + v + " not declared yet");
        parent = static_cast<std::size_t>(it - ops.begin());
      }
      ops.push_back(name);
      parents.push_back(parent);
    } else if (record == "filter") {
      FilterKey key;
      key.name = name;
      bool have_code = false, have_kind = false;
      for (const auto& [k, v] : attrs) {
        if (k == "code") {
          auto c = parse_number(v, line_no);
          if (c > 0xff) vocab_error(line_no, "filter code exceeds one byte");
          key.code = static_cast<std::uint8_t>(c);
          have_code = true;
        } else if (k == "kind") {
          key.kind = parse_kind(v, line_no);
          have_kind = true;
        } else if (k == "binding") {
          key.binding = v;
        } else if (k == "values") {
          std::istringstream items(v);
          for (std::string item; std::getline(items, item, ',');) {
            auto colon = item.rfind(':');
            if (colon == std::string::npos)
              vocab_error(line_no, "value needs NAME:CODE: " + item);
            auto c = parse_number(item.substr(colon + 1), line_no);
            if (c > 0xffff) vocab_error(line_no, "value code exceeds 16 bits");
            key.named_values.emplace_back(item.substr(0, colon),
                                          static_cast<std::uint16_t>(c));
          }
        } else {
          vocab_error(line_no, "unknown attribute " + k);
        }
      }
      if (!have_code || !have_kind)
        vocab_error(line_no, "filter needs code= and kind=");
      keys.push_back(std::move(key));
    } else {
      vocab_error(line_no, "unknown record type " + record);
    }
  }
  if (tag.empty()) throw Error(ErrorKind::vocabulary, "missing vocabulary tag");
  return Vocabulary{OperationTable(tag, std::move(ops), std::move(parents)),
                    FilterVocabulary(std::move(keys))};
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vocabulary(buf.str());
}

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::missing_default: return "MissingDefault";
    case DiagnosticKind::default_not_unconditional: return "DefaultNotUnconditional";
    case DiagnosticKind::unknown_operation: return "UnknownOperation";
    case DiagnosticKind::unknown_filter_key: return "UnknownFilterKey";
    case DiagnosticKind::bad_filter_value: return "BadFilterValue";
    case DiagnosticKind::empty_metafilter: return "EmptyMetafilter";
  }
  return "?";
}

namespace {

void check_value(const FilterKey& key, const FilterValue& value,
                 const std::string& where, std::vector<Diagnostic>& out) {
  auto bad = [&](const std::string& why) {
    out.push_back({DiagnosticKind::bad_filter_value,
                   where + ": " + key.name + " " + why});
  };
  switch (key.kind) {
    case ValueKind::literal_string:
      if (!std::holds_alternative<std::string>(value)) bad("expects a string");
      break;
    case ValueKind::regex_index:
      if (const auto* s = std::get_if<std::string>(&value)) {
        try {
          parse_regex(*s);
        } catch (const Error& e) {
          bad(std::string("has an invalid pattern: ") + e.what());
        }
      } else {
        bad("expects a regex string");
      }
      break;
    case ValueKind::enum_named:
      if (const auto* s = std::get_if<Symbol>(&value)) {
        if (!key.code_for(s->name)) bad("has no value named " + s->name);
      } else {
        bad("expects a named value");
      }
      break;
    case ValueKind::numeric:
      if (const auto* n = std::get_if<std::int64_t>(&value)) {
        if (*n < 0 || *n > 0xffff) bad("value out of the 16-bit range");
      } else {
        bad("expects a number");
      }
      break;
    case ValueKind::network_endpoint:
      if (!std::holds_alternative<Endpoint>(value))
        bad("expects PROTOCOL \"ADDRESS\"");
      break;
  }
}

void check_expr(const FilterExpr& e, const FilterVocabulary& filters,
                const std::string& where, std::vector<Diagnostic>& out) {
  switch (e.kind()) {
    case FilterExpr::Kind::atom:
      if (const FilterKey* k = filters.find(e.key())) {
        check_value(*k, e.value(), where, out);
      } else {
        out.push_back({DiagnosticKind::unknown_filter_key, where + ": " + e.key()});
      }
      return;
    case FilterExpr::Kind::require_not:
      if (e.children().size() != 1) {
        out.push_back({DiagnosticKind::empty_metafilter,
                       where + ": require-not takes exactly one filter"});
        return;
      }
      break;
    default:
      if (e.children().empty())
        out.push_back({DiagnosticKind::empty_metafilter,
                       where + ": empty metafilter"});
      break;
  }
  for (const auto& c : e.children()) check_expr(c, filters, where, out);
}

}  // namespace

std::vector<Diagnostic> validate_profile(const Profile& profile,
                                         const Vocabulary& vocab) {
  std::vector<Diagnostic> out;
  auto def = profile.rules.find(kDefaultOperation);
  if (def == profile.rules.end() || def->second.empty()) {
    out.push_back({DiagnosticKind::missing_default, "no (allow|deny default) rule"});
  } else if (def->second.size() != 1 || def->second.front().filter) {
    out.push_back({DiagnosticKind::default_not_unconditional,
                   "default must carry exactly one unconditional rule"});
  }
  for (const auto& [op, rules] : profile.rules) {
    if (!vocab.operations.find(op))
      out.push_back({DiagnosticKind::unknown_operation, op});
    for (const Rule& r : rules)
      if (r.filter) check_expr(*r.filter, vocab.filters, op, out);
  }
  return out;
}

}  // namespace sbx
