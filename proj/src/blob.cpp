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

#include "sbx/blob.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "sbx/error.hpp"
#include "sbx/nfa.hpp"
#include "sbx/regex.hpp"

namespace sbx {

void write_record(const NodeRecord& r, std::uint8_t* out) {
  out[0] = r.type;
  out[1] = r.key;
  out[2] = static_cast<std::uint8_t>(r.value & 0xff);
  out[3] = static_cast<std::uint8_t>(r.value >> 8);
  out[4] = static_cast<std::uint8_t>(r.match & 0xff);
  out[5] = static_cast<std::uint8_t>(r.match >> 8);
  out[6] = static_cast<std::uint8_t>(r.unmatch & 0xff);
  out[7] = static_cast<std::uint8_t>(r.unmatch >> 8);
}

NodeRecord read_record(const std::uint8_t* in) {
  auto u16 = [in](int at) {
    return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
  };
  return {in[0], in[1], u16(2), u16(4), u16(6)};
}

namespace {

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void put_u16(Bytes& out, std::size_t at, std::uint16_t v) {
  out[at] = static_cast<std::uint8_t>(v & 0xff);
  out[at + 1] = static_cast<std::uint8_t>(v >> 8);
}

std::size_t align8(std::size_t n) { return (n + 7) & ~std::size_t{7}; }

std::uint16_t to_unit(std::size_t byte_offset, const char* what) {
  const std::size_t unit = byte_offset / kRecordSize;
  if (unit > 0xffff)
    throw Error(ErrorKind::capacity_exceeded,
                std::string(what) + " at byte " + std::to_string(byte_offset) +
                    " is beyond the 16-bit offset space");
  return static_cast<std::uint16_t>(unit);
}

// ---------------------------------------------------------------------------
// Node DAG shared by compilation, bundling and extraction.

class Dag {
 public:
  static constexpr std::uint32_t kDeny = 0;
  static constexpr std::uint32_t kAllow = 1;

  enum class Payload : std::uint8_t { immediate, regex, pooled };

  struct Node {
    std::uint8_t key = 0;
    Payload payload = Payload::immediate;
    std::uint16_t immediate = 0;
    std::string bytes;  // regex program or pooled string
    std::uint32_t match = 0;
    std::uint32_t unmatch = 0;
  };

  explicit Dag(bool dedupe) : dedupe_(dedupe), nodes_(2) {}

  static std::uint32_t terminal(Decision d) {
    return d == Decision::allow ? kAllow : kDeny;
  }
  static bool is_terminal(std::uint32_t id) { return id < 2; }

  std::uint32_t add(Node n) {
    if (n.match == n.unmatch) return n.match;
    if (!dedupe_) return push(std::move(n));
    auto key = std::make_tuple(n.key, n.payload, n.immediate, n.bytes, n.match, n.unmatch);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const auto id = push(std::move(n));
    index_.emplace(std::move(key), id);
    return id;
  }

  const Node& node(std::uint32_t id) const { return nodes_[id]; }

 private:
  std::uint32_t push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  bool dedupe_;
  std::vector<Node> nodes_;
  std::map<std::tuple<std::uint8_t, Payload, std::uint16_t, std::string, std::uint32_t,
                      std::uint32_t>,
           std::uint32_t>
      index_;
};

std::string as_string(std::span<const std::uint8_t> b) {
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

class Lowering {
 public:
  Lowering(Dag& dag, const Vocabulary& vocab) : dag_(dag), vocab_(vocab) {}

  // One entry per operation of the table.
  std::vector<std::uint32_t> lower(const Profile& p) {
    const auto& ops = vocab_.operations;
    for (const auto& [name, rules] : p.rules) ops.lookup(name);
    const Decision fallback = p.default_decision();
    std::vector<std::uint32_t> entry(ops.size());
    for (std::size_t i = 0; i < ops.size(); ++i) {
      auto it = p.rules.find(ops.name(i));
      if (i == 0) {
        entry[0] = Dag::terminal(fallback);
      } else if (it == p.rules.end() || it->second.empty()) {
        entry[i] = entry[ops.parent(i)];
      } else {
        std::uint32_t cur = Dag::terminal(fallback);
        for (auto r = it->second.rbegin(); r != it->second.rend(); ++r) {
          const auto verdict = Dag::terminal(r->decision);
          cur = r->filter ? expr(*r->filter, verdict, cur) : verdict;
        }
        entry[i] = cur;
      }
    }
    return entry;
  }

 private:
  std::uint32_t expr(const FilterExpr& e, std::uint32_t match, std::uint32_t unmatch) {
    switch (e.kind()) {
      case FilterExpr::Kind::atom: return atom(e, match, unmatch);
      case FilterExpr::Kind::require_not: return expr(e.child(), unmatch, match);
      case FilterExpr::Kind::require_all: {
        std::uint32_t cur = match;
        for (auto c = e.children().rbegin(); c != e.children().rend(); ++c)
          cur = expr(*c, cur, unmatch);
        return cur;
      }
      case FilterExpr::Kind::require_any: {
        std::uint32_t cur = unmatch;
        for (auto c = e.children().rbegin(); c != e.children().rend(); ++c)
          cur = expr(*c, match, cur);
        return cur;
      }
    }
    return unmatch;
  }

  std::uint32_t atom(const FilterExpr& e, std::uint32_t match, std::uint32_t unmatch) {
    const FilterKey& key = vocab_.filters.lookup(e.key());
    Dag::Node n;
    n.key = key.code;
    n.match = match;
    n.unmatch = unmatch;
    auto bad = [&]() -> void {
      throw Error(ErrorKind::unknown_filter_value,
                  "(" + e.key() + " " + describe(e.value()) + ")");
    };
    const FilterValue& v = e.value();
    switch (key.kind) {
      case ValueKind::literal_string:
        if (!std::holds_alternative<std::string>(v)) bad();
        n.payload = Dag::Payload::pooled;
        n.bytes = std::get<std::string>(v);
        break;
      case ValueKind::regex_index: {
        if (!std::holds_alternative<std::string>(v)) bad();
        const auto& pattern = std::get<std::string>(v);
        auto it = programs_.find(pattern);
        if (it == programs_.end()) {
          auto bytes = serialize_nfa(build_nfa(parse_regex(pattern)));
          it = programs_.emplace(pattern, as_string(bytes)).first;
        }
        n.payload = Dag::Payload::regex;
        n.bytes = it->second;
        break;
      }
      case ValueKind::enum_named: {
        if (!std::holds_alternative<Symbol>(v)) bad();
        auto code = key.code_for(std::get<Symbol>(v).name);
        if (!code) bad();
        n.immediate = *code;
        break;
      }
      case ValueKind::numeric: {
        if (!std::holds_alternative<std::int64_t>(v)) bad();
        auto x = std::get<std::int64_t>(v);
        if (x < 0 || x > 0xffff) bad();
        n.immediate = static_cast<std::uint16_t>(x);
        break;
      }
      case ValueKind::network_endpoint:
        if (!std::holds_alternative<Endpoint>(v)) bad();
        n.payload = Dag::Payload::pooled;
        n.bytes = std::get<Endpoint>(v).text();
        break;
    }
    return dag_.add(std::move(n));
  }

  Dag& dag_;
  const Vocabulary& vocab_;
  std::unordered_map<std::string, std::string> programs_;
};

struct Entries {
  std::string name;
  std::vector<std::uint32_t> ops;
};

// Lays out and serializes a DAG. Separated output takes exactly one entry
// list and no name.
Bytes emit(const Dag& dag, const std::vector<Entries>& profiles, bool bundled,
           SectionSizes* sizes) {
  const std::size_t op_count = profiles.front().ops.size();
  if (op_count > 0xffff || profiles.size() > 0xffff)
    throw Error(ErrorKind::capacity_exceeded, "too many operations or profiles");

  // Pre-order, match before unmatch, terminals last.
  std::vector<std::uint32_t> order;
  std::unordered_map<std::uint32_t, std::size_t> slot;
  std::vector<std::uint32_t> stack;
  for (const auto& p : profiles)
    for (auto root : p.ops) {
      stack.push_back(root);
      while (!stack.empty()) {
        auto id = stack.back();
        stack.pop_back();
        if (Dag::is_terminal(id) || slot.count(id)) continue;
        slot.emplace(id, order.size());
        order.push_back(id);
        stack.push_back(dag.node(id).unmatch);
        stack.push_back(dag.node(id).match);
      }
    }

  // Regex programs and pooled strings, in first-use order.
  std::vector<const std::string*> regexes, strings;
  std::map<std::string, std::uint16_t> regex_index;
  std::map<std::string, std::size_t> string_index;
  for (auto id : order) {
    const auto& n = dag.node(id);
    if (n.payload == Dag::Payload::regex && !regex_index.count(n.bytes)) {
      if (regexes.size() >= 0xffff)
        throw Error(ErrorKind::capacity_exceeded, "more than 65535 regex entries");
      regex_index.emplace(n.bytes, static_cast<std::uint16_t>(regexes.size()));
      regexes.push_back(&n.bytes);
    } else if (n.payload == Dag::Payload::pooled && !string_index.count(n.bytes)) {
      string_index.emplace(n.bytes, strings.size());
      strings.push_back(&n.bytes);
    }
  }
  std::vector<std::size_t> name_slot;
  if (bundled)
    for (const auto& p : profiles) {
      auto [it, fresh] = string_index.emplace(p.name, strings.size());
      if (fresh) strings.push_back(&p.name);
      name_slot.push_back(it->second);
    }

  const std::size_t header = bundled ? 8 : 6;
  const std::size_t pointers = bundled ? profiles.size() * 2 * (1 + op_count) : 2 * op_count;
  const std::size_t node_begin = align8(header + pointers);
  const std::size_t node_count = order.size() + 2;
  const std::size_t regex_table = node_begin + node_count * kRecordSize;
  const std::size_t pool_begin = align8(regex_table + 2 * regexes.size());

  std::size_t cursor = pool_begin;
  auto place = [&](const std::string& s) {
    if (s.size() > 0xffff)
      throw Error(ErrorKind::capacity_exceeded, "pool entry longer than 65535 bytes");
    const std::size_t at = cursor;
    cursor = align8(cursor + 2 + s.size());
    return at;
  };
  std::vector<std::size_t> regex_at, string_at;
  for (auto* r : regexes) regex_at.push_back(place(*r));
  for (auto* s : strings) string_at.push_back(place(*s));

  Bytes out(cursor, 0);
  put_u16(out, 0, bundled ? kBundledFormat : kSeparatedFormat);
  put_u16(out, 2, static_cast<std::uint16_t>(regexes.size()));
  put_u16(out, 4, static_cast<std::uint16_t>(op_count));
  if (bundled) put_u16(out, 6, static_cast<std::uint16_t>(profiles.size()));

  auto unit_of = [&](std::uint32_t id) -> std::uint16_t {
    std::size_t index = id == Dag::kAllow  ? order.size()
                        : id == Dag::kDeny ? order.size() + 1
                                           : slot.at(id);
    return to_unit(node_begin + index * kRecordSize, "node record");
  };

  std::size_t at = header;
  for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
    if (bundled) {
      put_u16(out, at, to_unit(string_at[name_slot[pi]], "profile name"));
      at += 2;
    }
    for (auto root : profiles[pi].ops) {
      put_u16(out, at, unit_of(root));
      at += 2;
    }
  }

  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& n = dag.node(order[i]);
    NodeRecord r;
    r.key = n.key;
    r.match = unit_of(n.match);
    r.unmatch = unit_of(n.unmatch);
    switch (n.payload) {
      case Dag::Payload::immediate: r.value = n.immediate; break;
      case Dag::Payload::regex: r.value = regex_index.at(n.bytes); break;
      case Dag::Payload::pooled:
        r.value = to_unit(string_at[string_index.at(n.bytes)], "pool string");
        break;
    }
    write_record(r, out.data() + node_begin + i * kRecordSize);
  }
  write_record(NodeRecord::terminal(Decision::allow),
               out.data() + node_begin + order.size() * kRecordSize);
  write_record(NodeRecord::terminal(Decision::deny),
               out.data() + node_begin + (order.size() + 1) * kRecordSize);

  for (std::size_t i = 0; i < regexes.size(); ++i)
    put_u16(out, regex_table + 2 * i, to_unit(regex_at[i], "regex entry"));

  auto write_entry = [&](std::size_t pos, const std::string& s) {
    put_u16(out, pos, static_cast<std::uint16_t>(s.size()));
    std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(pos + 2));
  };
  for (std::size_t i = 0; i < regexes.size(); ++i) write_entry(regex_at[i], *regexes[i]);
  for (std::size_t i = 0; i < strings.size(); ++i) write_entry(string_at[i], *strings[i]);

  if (sizes) {
    sizes->header = header;
    sizes->pointers = pointers;
    sizes->nodes = node_count * kRecordSize;
    sizes->regex_table = 2 * regexes.size();
    sizes->pool = cursor - pool_begin;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decoding

[[noreturn]] void malformed(std::size_t at, const std::string& why) {
  throw DecodeError(ErrorKind::malformed_blob, at, why);
}

void expect_zero(std::span<const std::uint8_t> b, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i)
    if (b[i] != 0) malformed(i, "nonzero padding byte");
}

// Fills nodes, terminals and the regex table of `bp` from the node section
// starting at `node_begin` bytes.
void decode_sections(std::span<const std::uint8_t> b, std::size_t node_begin,
                     BinaryProfile& bp) {
  if (node_begin / kRecordSize > 0xffff) malformed(node_begin, "node section out of range");
  bp.node_begin = static_cast<std::uint16_t>(node_begin / kRecordSize);
  std::size_t pos = node_begin;
  for (;;) {
    if (pos + kRecordSize > b.size()) malformed(pos, "node section has no terminal pair");
    if (pos / kRecordSize >= 0xffff) malformed(pos, "node section exceeds offset space");
    NodeRecord r = read_record(b.data() + pos);
    if (r.type == kTerminal) {
      if (r != NodeRecord::terminal(Decision::allow))
        malformed(pos, "terminal record other than the allow/deny pair");
      if (pos + 2 * kRecordSize > b.size()) malformed(pos, "truncated terminal pair");
      if (read_record(b.data() + pos + kRecordSize) != NodeRecord::terminal(Decision::deny))
        malformed(pos + kRecordSize, "allow terminal not followed by deny terminal");
      bp.nodes.push_back(r);
      bp.nodes.push_back(NodeRecord::terminal(Decision::deny));
      bp.allow_terminal = static_cast<std::uint16_t>(pos / kRecordSize);
      bp.deny_terminal = static_cast<std::uint16_t>(pos / kRecordSize + 1);
      pos += 2 * kRecordSize;
      break;
    }
    if (r.type != kNonTerminal) malformed(pos, "unknown node type " + std::to_string(r.type));
    bp.nodes.push_back(r);
    pos += kRecordSize;
  }
  const std::size_t table_end = pos + 2 * std::size_t{bp.regex_count};
  if (table_end > b.size()) malformed(pos, "truncated regex table");
  for (std::size_t i = 0; i < bp.regex_count; ++i) bp.regex_pointers.push_back(get_u16(b, pos + 2 * i));
  const std::size_t pool_begin = align8(table_end);
  if (pool_begin > b.size()) malformed(table_end, "truncated padding before pool");
  expect_zero(b, table_end, pool_begin);
  for (std::size_t i = 0; i < bp.regex_count; ++i) {
    if (std::size_t{bp.regex_pointers[i]} * kRecordSize < pool_begin)
      malformed(pos + 2 * i, "regex pointer outside the pool");
    bp.regex_program(static_cast<std::uint16_t>(i));
  }
  for (std::size_t i = 0; i + 2 < bp.nodes.size(); ++i) {
    const auto& r = bp.nodes[i];
    if ((r.key & kRegexKeyBit) && r.value >= bp.regex_count)
      malformed(node_begin + i * kRecordSize, "regex index out of range");
  }
}

void check_pointer(const BinaryProfile& bp, std::uint16_t p, std::size_t at) {
  if (!bp.is_node(p)) malformed(at, "operation pointer outside the node section");
}

void verify_graph(const BinaryProfile& bp) {
  const std::size_t n = bp.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = bp.nodes[i];
    if (r.is_terminal()) continue;
    const std::size_t at = (bp.node_begin + i) * kRecordSize;
    if (!bp.is_node(r.match) || !bp.is_node(r.unmatch))
      malformed(at, "successor offset outside the node section");
  }
  // Iterative three-colour search.
  std::vector<std::uint8_t> colour(n, 0);
  std::vector<std::pair<std::size_t, int>> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (colour[s]) continue;
    stack.emplace_back(s, 0);
    colour[s] = 1;
    while (!stack.empty()) {
      auto& [i, edge] = stack.back();
      const auto& r = bp.nodes[i];
      if (r.is_terminal() || edge == 2) {
        colour[i] = 2;
        stack.pop_back();
        continue;
      }
      const std::uint16_t next = edge++ == 0 ? r.match : r.unmatch;
      const std::size_t j = next - bp.node_begin;
      if (colour[j] == 1)
        throw DecodeError(ErrorKind::cycle_detected, (bp.node_begin + i) * kRecordSize,
                          "node graph contains a cycle");
      if (colour[j] == 0) {
        colour[j] = 1;
        stack.emplace_back(j, 0);
      }
    }
  }
}

BinaryProfile decode_bundle_at(std::span<const std::uint8_t> b,
                               std::vector<std::uint16_t>& name_offsets,
                               std::vector<std::vector<std::uint16_t>>& pointers) {
  if (b.size() < 8) malformed(0, "truncated bundle header");
  if (get_u16(b, 0) != kBundledFormat)
    throw Error(ErrorKind::wrong_format_id, "expected bundled format id 0x8000");
  BinaryProfile bp;
  bp.format_id = kBundledFormat;
  bp.regex_count = get_u16(b, 2);
  bp.op_count = get_u16(b, 4);
  const std::size_t count = get_u16(b, 6);
  if (bp.op_count == 0) malformed(4, "bundle declares no operations");
  if (count == 0) malformed(6, "bundle declares no profiles");
  const std::size_t stride = 2 * (1 + std::size_t{bp.op_count});
  const std::size_t end = 8 + count * stride;
  if (end > b.size()) malformed(8, "truncated profile table");
  for (std::size_t p = 0; p < count; ++p) {
    const std::size_t base = 8 + p * stride;
    name_offsets.push_back(get_u16(b, base));
    std::vector<std::uint16_t> ops;
    for (std::size_t i = 0; i < bp.op_count; ++i) ops.push_back(get_u16(b, base + 2 + 2 * i));
    pointers.push_back(std::move(ops));
  }
  const std::size_t node_begin = align8(end);
  if (node_begin > b.size()) malformed(end, "truncated padding");
  expect_zero(b, end, node_begin);
  bp.blob = std::make_shared<const Bytes>(b.begin(), b.end());
  decode_sections(*bp.blob, node_begin, bp);
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t i = 0; i < bp.op_count; ++i)
      check_pointer(bp, pointers[p][i], 8 + p * stride + 2 + 2 * i);
  return bp;
}

UnpackResult unpack_at(std::span<const std::uint8_t> b, std::size_t offset) {
  std::vector<std::uint16_t> names;
  std::vector<std::vector<std::uint16_t>> pointers;
  BinaryProfile shared = decode_bundle_at(b.subspan(offset), names, pointers);
  verify_graph(shared);
  UnpackResult out;
  out.offset = offset;
  std::set<std::string> seen;
  for (std::size_t p = 0; p < names.size(); ++p) {
    BundleView v;
    v.name = shared.pool_string(names[p]);
    if (!seen.insert(v.name).second)
      malformed(8 + p * 2 * (1 + std::size_t{shared.op_count}), "duplicate profile name");
    v.profile = shared;
    v.profile.name = v.name;
    v.profile.op_pointers = std::move(pointers[p]);
    out.views.push_back(std::move(v));
  }
  return out;
}

}  // namespace

const NodeRecord& BinaryProfile::node_at(std::uint16_t unit) const {
  if (!is_node(unit))
    throw DecodeError(ErrorKind::dangling_offset, std::size_t{unit} * kRecordSize,
                      "offset does not address a node record");
  return nodes[unit - node_begin];
}

std::span<const std::uint8_t> BinaryProfile::pool_entry(std::uint16_t unit) const {
  const std::size_t at = std::size_t{unit} * kRecordSize;
  const std::size_t pool_begin =
      align8(std::size_t{node_end()} * kRecordSize + 2 * std::size_t{regex_count});
  if (!blob || at < pool_begin || at + 2 > blob->size())
    malformed(at, "pool offset out of range");
  std::span<const std::uint8_t> b(*blob);
  const std::size_t len = get_u16(b, at);
  if (at + 2 + len > b.size()) malformed(at, "pool entry overruns the blob");
  return b.subspan(at + 2, len);
}

std::string BinaryProfile::pool_string(std::uint16_t unit) const {
  return as_string(pool_entry(unit));
}

std::span<const std::uint8_t> BinaryProfile::regex_program(std::uint16_t index) const {
  if (index >= regex_pointers.size())
    malformed(std::size_t{node_end()} * kRecordSize, "regex index out of range");
  return pool_entry(regex_pointers[index]);
}

std::uint16_t sniff_format(std::span<const std::uint8_t> blob) {
  if (blob.size() < 2) malformed(0, "blob shorter than a format id");
  return get_u16(blob, 0);
}

BinaryProfile decode_blob(std::span<const std::uint8_t> b, DecodeOptions opts) {
  if (b.size() < 6) malformed(0, "blob shorter than the 6-byte header");
  const auto id = get_u16(b, 0);
  if (id != kSeparatedFormat)
    throw Error(ErrorKind::wrong_format_id,
                id == kBundledFormat ? "bundled blob (format id 0x8000); unpack it first"
                                     : "unknown format id " + std::to_string(id));
  BinaryProfile bp;
  bp.format_id = id;
  bp.regex_count = get_u16(b, 2);
  bp.op_count = get_u16(b, 4);
  if (bp.op_count == 0) malformed(4, "profile declares no operations");
  const std::size_t end = 6 + 2 * std::size_t{bp.op_count};
  if (end > b.size()) malformed(6, "truncated operation pointer table");
  for (std::size_t i = 0; i < bp.op_count; ++i) bp.op_pointers.push_back(get_u16(b, 6 + 2 * i));
  const std::size_t node_begin = align8(end);
  if (node_begin > b.size()) malformed(end, "truncated padding");
  expect_zero(b, end, node_begin);
  bp.blob = std::make_shared<const Bytes>(b.begin(), b.end());
  decode_sections(*bp.blob, node_begin, bp);
  for (std::size_t i = 0; i < bp.op_count; ++i) check_pointer(bp, bp.op_pointers[i], 6 + 2 * i);
  if (opts.verify_graph) verify_graph(bp);
  return bp;
}

Bytes encode_blob(const BinaryProfile& bp) {
  if (bp.format_id != kSeparatedFormat || !bp.blob)
    throw Error(ErrorKind::wrong_format_id, "only separated profiles re-encode in place");
  const std::size_t node_begin = std::size_t{bp.node_begin} * kRecordSize;
  const std::size_t table = std::size_t{bp.node_end()} * kRecordSize;
  const std::size_t pool_begin = align8(table + 2 * bp.regex_pointers.size());
  Bytes out(pool_begin, 0);
  put_u16(out, 0, bp.format_id);
  put_u16(out, 2, bp.regex_count);
  put_u16(out, 4, bp.op_count);
  for (std::size_t i = 0; i < bp.op_pointers.size(); ++i)
    put_u16(out, 6 + 2 * i, bp.op_pointers[i]);
  for (std::size_t i = 0; i < bp.nodes.size(); ++i)
    write_record(bp.nodes[i], out.data() + node_begin + i * kRecordSize);
  for (std::size_t i = 0; i < bp.regex_pointers.size(); ++i)
    put_u16(out, table + 2 * i, bp.regex_pointers[i]);
  out.insert(out.end(), bp.blob->begin() + static_cast<std::ptrdiff_t>(pool_begin),
             bp.blob->end());
  return out;
}

Bytes compile_profile(const Profile& p, const Vocabulary& vocab, CompileOptions opts,
                      SectionSizes* sizes) {
  Dag dag(opts.dedupe);
  Lowering lowering(dag, vocab);
  return emit(dag, {Entries{{}, lowering.lower(p)}}, false, sizes);
}

Bytes pack_bundle(const std::vector<Profile>& profiles, const Vocabulary& vocab,
                  CompileOptions opts, SectionSizes* sizes) {
  if (profiles.empty()) throw Error(ErrorKind::invalid_profile, "bundle needs a profile");
  std::set<std::string> names;
  Dag dag(opts.dedupe);
  Lowering lowering(dag, vocab);
  std::vector<Entries> entries;
  for (const auto& p : profiles) {
    if (!names.insert(p.name).second)
      throw Error(ErrorKind::invalid_profile, "duplicate profile name '" + p.name + "'");
    entries.push_back({p.name, lowering.lower(p)});
  }
  return emit(dag, entries, true, sizes);
}

UnpackResult unpack_bundle(std::span<const std::uint8_t> blob, bool scan) {
  if (!scan) {
    if (blob.size() >= 2 && get_u16(blob, 0) == kBundledFormat) return unpack_at(blob, 0);
    try {
      decode_blob(blob);
    } catch (const Error&) {
      throw Error(ErrorKind::no_bundle_found, "no bundle header at offset 0");
    }
    throw Error(ErrorKind::wrong_format_id, "separated profile (format id 0x0000), not a bundle");
  }
  for (std::size_t off = 0; off + 8 <= blob.size(); ++off) {
    if (blob[off] != 0x00 || blob[off + 1] != 0x80) continue;
    try {
      return unpack_at(blob, off);
    } catch (const Error&) {
    }
  }
  throw Error(ErrorKind::no_bundle_found, "no decodable bundle header in " +
                                              std::to_string(blob.size()) + " bytes");
}

Bytes extract_profile(const BinaryProfile& view, const Vocabulary& vocab) {
  Dag dag(false);
  std::unordered_map<std::uint16_t, std::uint32_t> ids;
  std::unordered_map<std::uint16_t, std::uint8_t> expanded;
  auto convert = [&](std::uint16_t root) {
    std::vector<std::uint16_t> stack{root};
    while (!stack.empty()) {
      const std::uint16_t u = stack.back();
      if (ids.count(u)) {
        stack.pop_back();
        continue;
      }
      const NodeRecord& r = view.node_at(u);
      if (r.is_terminal()) {
        ids.emplace(u, Dag::terminal(r.decision()));
        stack.pop_back();
        continue;
      }
      if (!expanded[u]) {
        expanded[u] = 1;
        for (std::uint16_t next : {r.unmatch, r.match}) {
          if (ids.count(next)) continue;
          if (expanded.count(next) && expanded[next])
            throw DecodeError(ErrorKind::cycle_detected, std::size_t{u} * kRecordSize,
                              "node graph contains a cycle");
          stack.push_back(next);
        }
        continue;
      }
      if (!ids.count(r.match) || !ids.count(r.unmatch))
        throw DecodeError(ErrorKind::cycle_detected, std::size_t{u} * kRecordSize,
                          "node graph contains a cycle");
      Dag::Node n;
      n.key = r.key;
      n.match = ids.at(r.match);
      n.unmatch = ids.at(r.unmatch);
      const FilterKey* key = vocab.filters.by_code(r.key);
      if (!key)
        throw DecodeError(ErrorKind::unknown_filter_key, std::size_t{u} * kRecordSize,
                          "filter key " + std::to_string(r.key) + " not in vocabulary");
      if (key->kind == ValueKind::regex_index) {
        n.payload = Dag::Payload::regex;
        n.bytes = as_string(view.regex_program(r.value));
      } else if (key->uses_pool()) {
        n.payload = Dag::Payload::pooled;
        n.bytes = view.pool_string(r.value);
      } else {
        n.immediate = r.value;
      }
      ids.emplace(u, dag.add(std::move(n)));
      stack.pop_back();
    }
    return ids.at(root);
  };
  Entries e;
  for (auto p : view.op_pointers) e.ops.push_back(convert(p));
  return emit(dag, {e}, false, nullptr);
}

}  // namespace sbx
