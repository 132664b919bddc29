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

#ifndef SBX_TESTS_SUPPORT_HPP_
#define SBX_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sbx/blob.hpp"
#include "sbx/model.hpp"
#include "sbx/sbpl.hpp"
#include "sbx/vocab.hpp"

namespace sbx::test {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(SBX_DATA_DIR) / rel;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline const Vocabulary& small_vocab() {
  static const Vocabulary v = load_vocabulary(data_path("vocab/small.vocab"));
  return v;
}

inline const Vocabulary& ios9_vocab() {
  static const Vocabulary v = load_vocabulary(data_path("vocab/ios9.vocab"));
  return v;
}

inline Profile fixture(const std::string& name) {
  return parse_sbpl(read_text(data_path("fixtures/" + name + ".sb")), name);
}

// A separated blob laid out by hand: header, op pointers, then `nodes`
// starting at the first 8-byte boundary, then an empty regex table. The
// node list must end with the allow and the deny terminal.
inline std::uint16_t first_node_unit(std::size_t op_count) {
  return static_cast<std::uint16_t>((6 + 2 * op_count + 7) / 8);
}

inline Bytes hand_blob(const std::vector<std::uint16_t>& op_pointers,
                       const std::vector<NodeRecord>& nodes) {
  const std::size_t begin = first_node_unit(op_pointers.size()) * kRecordSize;
  Bytes out(begin + nodes.size() * kRecordSize, 0);
  auto put = [&](std::size_t at, std::uint16_t v) {
    out[at] = static_cast<std::uint8_t>(v & 0xff);
    out[at + 1] = static_cast<std::uint8_t>(v >> 8);
  };
  put(0, kSeparatedFormat);
  put(2, 0);
  put(4, static_cast<std::uint16_t>(op_pointers.size()));
  for (std::size_t i = 0; i < op_pointers.size(); ++i) put(6 + 2 * i, op_pointers[i]);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    write_record(nodes[i], out.data() + begin + i * kRecordSize);
  return out;
}

inline NodeRecord node(std::uint8_t key, std::uint16_t value, std::uint16_t match,
                       std::uint16_t unmatch) {
  return {kNonTerminal, key, value, match, unmatch};
}

// file-read* walks A m->C u->deny, C m->allow u->B, B m->deny u->allow with
// A = (vnode-type REGULAR-FILE), B = (socket-type SOCK_STREAM) and
// C = (target self). Its descendants share the entry; every other
// operation points at deny.
inline Bytes three_node_blob() {
  const auto& ops = small_vocab().operations;
  const std::uint16_t b = first_node_unit(ops.size());
  const std::uint16_t C = b + 1, B = b + 2, allow = b + 3, deny = b + 4;
  std::vector<std::uint16_t> ptrs(ops.size(), deny);
  for (const char* op : {"file-read*", "file-read-data", "file-read-metadata"})
    ptrs[ops.lookup(op)] = b;
  return hand_blob(ptrs, {node(0x1d, 1, C, deny), node(0x0e, 1, allow, B),
                          node(0x0c, 1, deny, allow), NodeRecord::terminal(Decision::allow),
                          NodeRecord::terminal(Decision::deny)});
}

}  // namespace sbx::test

#endif  // SBX_TESTS_SUPPORT_HPP_
