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

#ifndef SBX_NFA_HPP_
#define SBX_NFA_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sbx/regex.hpp"

namespace sbx {

struct NfaLabel {
  enum class Kind : std::uint8_t {
    epsilon,
    ch,
    any_char,
    char_class,
    anchor_start,
    anchor_end,
  };

  Kind kind = Kind::epsilon;
  std::uint8_t byte = 0;
  bool negated = false;
  std::vector<ByteRange> ranges;

  static NfaLabel epsilon() { return {}; }
  static NfaLabel ch(std::uint8_t c) { return {Kind::ch, c, false, {}}; }
  static NfaLabel any_char() { return {Kind::any_char, 0, false, {}}; }
  static NfaLabel char_class(bool negated, std::vector<ByteRange> ranges) {
    return {Kind::char_class, 0, negated, normalize_ranges(std::move(ranges))};
  }
  static NfaLabel anchor_start() { return {Kind::anchor_start, 0, false, {}}; }
  static NfaLabel anchor_end() { return {Kind::anchor_end, 0, false, {}}; }

  bool consumes() const noexcept {
    return kind == Kind::ch || kind == Kind::any_char || kind == Kind::char_class;
  }
  bool matches(std::uint8_t c) const noexcept;

  friend bool operator==(const NfaLabel&, const NfaLabel&) = default;
};

struct NfaTransition {
  std::uint32_t from = 0;
  NfaLabel label;
  std::uint32_t to = 0;
};

class Nfa {
 public:
  // Validates endpoints, start and a non-empty accept set.
  Nfa(std::size_t state_count, std::vector<NfaTransition> transitions,
      std::uint32_t start, std::vector<std::uint32_t> accepts);

  std::size_t state_count() const noexcept { return state_count_; }
  const std::vector<NfaTransition>& transitions() const noexcept { return transitions_; }
  std::uint32_t start() const noexcept { return start_; }
  const std::vector<std::uint32_t>& accepts() const noexcept { return accepts_; }
  bool is_accept(std::uint32_t s) const noexcept { return accepting_[s] != 0; }
  // Indices into transitions(), grouped by source state.
  const std::vector<std::uint32_t>& outgoing(std::uint32_t s) const { return out_[s]; }

 private:
  std::size_t state_count_;
  std::vector<NfaTransition> transitions_;
  std::uint32_t start_;
  std::vector<std::uint32_t> accepts_;
  std::vector<std::uint8_t> accepting_;
  std::vector<std::vector<std::uint32_t>> out_;
};

// Thompson construction; the result has a single accepting state.
Nfa build_nfa(const RegexAst& ast);

enum class MatchMode {
  search,  // unanchored: matches if any substring matches, ^/$ pin to the ends
  full,    // the whole string must be consumed
};

bool nfa_match(const Nfa& nfa, std::string_view s,
               MatchMode mode = MatchMode::search);

// Every string over `alphabet` of length <= max_len (max_len <= 10) that
// matches in the given mode. Brute force; intended as a test oracle.
std::set<std::string> enumerate_language(const Nfa& nfa,
                                         std::span<const std::uint8_t> alphabet,
                                         std::size_t max_len,
                                         MatchMode mode = MatchMode::full);

// Decides whether two automata accept exactly the same strings over
// `alphabet` up to `max_len`, walking both subset constructions in lockstep
// with memoization. Returns the shortest-first disagreeing string, if any.
std::optional<std::string> bounded_language_difference(
    const Nfa& a, const Nfa& b, std::span<const std::uint8_t> alphabet,
    std::size_t max_len, MatchMode mode = MatchMode::full);

// Up to `limit` short strings accepted in full-match mode, shortest first.
std::vector<std::string> sample_accepted(const Nfa& nfa, std::size_t limit,
                                         std::size_t max_len = 24);

// Binary regex program: u16 record count, then records of 1-byte tag and
// u16 operand (class records add a range count and (lo, hi) pairs). Layout
// is documented in docs/format.md.
namespace regex_op {
inline constexpr std::uint8_t kChar = 0x01;
inline constexpr std::uint8_t kAny = 0x02;
inline constexpr std::uint8_t kClass = 0x03;
inline constexpr std::uint8_t kLineStart = 0x04;
inline constexpr std::uint8_t kLineEnd = 0x05;
inline constexpr std::uint8_t kJumpForward = 0x06;
inline constexpr std::uint8_t kJumpBackward = 0x07;
inline constexpr std::uint8_t kAccept = 0x08;
// Set on a jump tag: the record also continues at the next record.
inline constexpr std::uint8_t kFork = 0x80;
}  // namespace regex_op

// Throws Error(too_many_states) when the program would exceed 65535 records.
std::vector<std::uint8_t> serialize_nfa(const Nfa& nfa);

// One NFA state per record. Throws DecodeError(malformed_regex_blob).
Nfa deserialize_nfa(std::span<const std::uint8_t> bytes);

struct EliminationStats {
  std::size_t steps = 0;
};

// State removal: edges carry regex fragments; states are removed in
// ascending index order until only a fresh start and a fresh accept remain.
// Throws Error(regex_too_complex) if an intermediate fragment exceeds
// `max_fragment_size` nodes.
RegexAst nfa_to_regex(const Nfa& nfa, EliminationStats* stats = nullptr,
                      std::size_t max_fragment_size = 1u << 16);

}  // namespace sbx

#endif  // SBX_NFA_HPP_
