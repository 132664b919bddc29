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

// Binary profile codec. All integers are little endian; every offset is a
// u16 counted in 8-byte units from the start of the blob. docs/format.md has
// the byte-level layout.

#ifndef SBX_BLOB_HPP_
#define SBX_BLOB_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sbx/model.hpp"
#include "sbx/vocab.hpp"

namespace sbx {

inline constexpr std::uint16_t kSeparatedFormat = 0x0000;
inline constexpr std::uint16_t kBundledFormat = 0x8000;
inline constexpr std::size_t kRecordSize = 8;

inline constexpr std::uint8_t kNonTerminal = 0x00;
inline constexpr std::uint8_t kTerminal = 0x01;

using Bytes = std::vector<std::uint8_t>;

struct NodeRecord {
  std::uint8_t type = kNonTerminal;
  std::uint8_t key = 0;  // decision byte for terminals
  std::uint16_t value = 0;
  std::uint16_t match = 0;
  std::uint16_t unmatch = 0;

  bool is_terminal() const noexcept { return type == kTerminal; }
  Decision decision() const noexcept { return static_cast<Decision>(key); }

  static NodeRecord terminal(Decision d) {
    return {kTerminal, static_cast<std::uint8_t>(d), 0, 0, 0};
  }

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

void write_record(const NodeRecord& r, std::uint8_t* out);
NodeRecord read_record(const std::uint8_t* in);

// A decoded profile. For bundles every view shares the node section, regex
// table and pool of the underlying blob.
struct BinaryProfile {
  std::uint16_t format_id = kSeparatedFormat;
  std::uint16_t regex_count = 0;
  std::uint16_t op_count = 0;
  std::string name;  // bundle views only
  std::vector<std::uint16_t> op_pointers;
  std::uint16_t node_begin = 0;  // unit offset of the first record
  std::vector<NodeRecord> nodes;  // nodes[i] lives at unit node_begin + i
  std::uint16_t allow_terminal = 0;
  std::uint16_t deny_terminal = 0;
  std::vector<std::uint16_t> regex_pointers;
  std::shared_ptr<const Bytes> blob;

  std::uint16_t node_end() const noexcept {
    return static_cast<std::uint16_t>(node_begin + nodes.size());
  }
  bool is_node(std::uint16_t unit) const noexcept {
    return unit >= node_begin && unit < node_end();
  }
  // Throws DecodeError(dangling_offset) outside the node section.
  const NodeRecord& node_at(std::uint16_t unit) const;
  std::uint16_t terminal_for(Decision d) const noexcept {
    return d == Decision::allow ? allow_terminal : deny_terminal;
  }

  // Length-prefixed pool entry at a unit offset; throws malformed_blob.
  std::span<const std::uint8_t> pool_entry(std::uint16_t unit) const;
  std::string pool_string(std::uint16_t unit) const;
  std::span<const std::uint8_t> regex_program(std::uint16_t index) const;
};

struct DecodeOptions {
  // Reject dangling node offsets and cycles. Turned off only by tests that
  // exercise the graph builder's own checks.
  bool verify_graph = true;
};

// Separated blob. Throws Error(wrong_format_id) or DecodeError(malformed_blob
// | cycle_detected).
BinaryProfile decode_blob(std::span<const std::uint8_t> blob, DecodeOptions opts = {});

// Re-serializes a separated profile; byte-identical to the decoded input.
Bytes encode_blob(const BinaryProfile& bp);

struct CompileOptions {
  bool dedupe = true;  // share structurally identical node records
};

struct SectionSizes {
  std::size_t header = 0;
  std::size_t pointers = 0;
  std::size_t nodes = 0;  // bytes, terminals included
  std::size_t regex_table = 0;
  std::size_t pool = 0;
};

// Throws Error(unknown_filter_key | unknown_filter_value | capacity_exceeded
// | invalid_profile). The profile must already validate.
Bytes compile_profile(const Profile& p, const Vocabulary& vocab, CompileOptions opts = {},
                      SectionSizes* sizes = nullptr);

// Throws Error(invalid_profile) for an empty list or duplicate names.
Bytes pack_bundle(const std::vector<Profile>& profiles, const Vocabulary& vocab,
                  CompileOptions opts = {}, SectionSizes* sizes = nullptr);

struct BundleView {
  std::string name;
  BinaryProfile profile;
};

struct UnpackResult {
  std::size_t offset = 0;  // where the bundle header was found
  std::vector<BundleView> views;
};

// Without scan the bundle must start at byte 0 (Error(wrong_format_id)
// otherwise). With scan, every position holding the bundled format id is
// tried in order; Error(no_bundle_found) if none decodes.
UnpackResult unpack_bundle(std::span<const std::uint8_t> blob, bool scan = false);

// Re-lays a profile view (separated or bundled) as a standalone separated
// blob; equals compile_profile of the same profile.
Bytes extract_profile(const BinaryProfile& view, const Vocabulary& vocab);

std::uint16_t sniff_format(std::span<const std::uint8_t> blob);  // throws malformed_blob

}  // namespace sbx

#endif  // SBX_BLOB_HPP_
