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

#include <doctest.h>

#include <cstring>

#include "sbx/blob.hpp"
#include "sbx/error.hpp"
#include "sbx/evaluator.hpp"
#include "sbx/generator.hpp"
#include "support.hpp"

using namespace sbx;
using namespace sbx::test;

namespace {

const std::uint8_t kGoldenRecords[2][8] = {
    {0x00, 0x81, 0x00, 0x00, 0x23, 0x00, 0x22, 0x00},
    {0x00, 0x1d, 0x01, 0x00, 0x23, 0x00, 0x24, 0x00},
};

ErrorKind failure(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;
}

std::vector<Profile> all_fixtures() {
  std::vector<Profile> out;
  for (const char* name : {"allow-default", "inheritance", "multiple-filters", "nested",
                           "pty-extension", "require-all", "require-any", "require-not",
                           "simplified", "snippets"})
    out.push_back(fixture(name));
  return out;
}

}  // namespace

TEST_CASE("table rows decode field by field") {
  const NodeRecord a = read_record(kGoldenRecords[0]);
  CHECK(a.type == kNonTerminal);
  CHECK(a.key == 0x81);
  CHECK(a.value == 0x0000);
  CHECK(a.match == 0x23);
  CHECK(a.unmatch == 0x22);
  const NodeRecord b = read_record(kGoldenRecords[1]);
  CHECK(b.key == 0x1d);
  CHECK(b.value == 0x0001);
  CHECK(b.match == 0x23);
  CHECK(b.unmatch == 0x24);
  std::uint8_t out[8];
  write_record(b, out);
  CHECK(std::memcmp(out, kGoldenRecords[1], 8) == 0);
}

TEST_CASE("multiple-filters compiles to the table rows up to a constant shift") {
  const Bytes blob = compile_profile(fixture("multiple-filters"), small_vocab());
  const BinaryProfile bp = decode_blob(blob);
  const std::uint16_t root = bp.op_pointers[small_vocab().operations.lookup("file-read*")];
  const NodeRecord regex = bp.node_at(root);
  const NodeRecord vnode = bp.node_at(regex.unmatch);
  REQUIRE(bp.node_at(regex.match).is_terminal());
  CHECK(regex.match == bp.allow_terminal);
  CHECK(vnode.unmatch == bp.deny_terminal);
  // The reference layout puts the vnode-type record at 0x22.
  const int shift = 0x22 - regex.unmatch;
  auto rebase = [&](NodeRecord r) {
    r.match = static_cast<std::uint16_t>(r.match + shift);
    r.unmatch = static_cast<std::uint16_t>(r.unmatch + shift);
    return r;
  };
  std::uint8_t got[8];
  write_record(rebase(regex), got);
  CHECK(std::memcmp(got, kGoldenRecords[0], 8) == 0);
  write_record(rebase(vnode), got);
  CHECK(std::memcmp(got, kGoldenRecords[1], 8) == 0);
  // Allow then deny, last in the node section.
  CHECK(bp.allow_terminal + 1 == bp.deny_terminal);
  CHECK(bp.deny_terminal + 1 == bp.node_end());
}

TEST_CASE("header and sections") {
  SectionSizes sizes;
  const Bytes blob = compile_profile(fixture("multiple-filters"), small_vocab(), {}, &sizes);
  CHECK(sniff_format(blob) == kSeparatedFormat);
  CHECK(sizes.header == 6);
  CHECK(sizes.pointers == 2 * small_vocab().operations.size());
  CHECK(sizes.header + sizes.pointers + sizes.nodes + sizes.regex_table + sizes.pool <= blob.size());
  CHECK(blob.size() % 8 == 0);
  const BinaryProfile bp = decode_blob(blob);
  CHECK(bp.op_count == small_vocab().operations.size());
  CHECK(bp.regex_count == 1);
  CHECK(bp.node_begin == first_node_unit(bp.op_count));
  // Operations without rules point at the default decision.
  CHECK(bp.op_pointers[small_vocab().operations.lookup("signal")] == bp.deny_terminal);
}

TEST_CASE("decode then encode is byte identical") {
  for (const Profile& p : all_fixtures()) {
    const Bytes blob = compile_profile(p, small_vocab());
    CHECK_MESSAGE(encode_blob(decode_blob(blob)) == blob, p.name);
  }
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const Bytes blob = compile_profile(generate_profile(ProfileGenerator::small(seed), small_vocab()),
                                       small_vocab());
    CHECK(encode_blob(decode_blob(blob)) == blob);
  }
}

TEST_CASE("compiled blobs agree with the source profile") {
  for (const Profile& p : all_fixtures()) {
    const BinaryProfile bp = decode_blob(compile_profile(p, small_vocab()));
    const auto r = check_equivalence(&p, &bp, small_vocab());
    CHECK_MESSAGE(r.equivalent, p.name);
  }
}

TEST_CASE("node sharing does not change verdicts") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const Profile p = generate_profile(ProfileGenerator::small(seed), small_vocab());
    const Bytes shared = compile_profile(p, small_vocab(), {.dedupe = true});
    const Bytes plain = compile_profile(p, small_vocab(), {.dedupe = false});
    CHECK(shared.size() <= plain.size());
    const BinaryProfile a = decode_blob(shared);
    const BinaryProfile b = decode_blob(plain);
    const auto r = check_equivalence(&a, &b, small_vocab());
    CHECK_MESSAGE(r.equivalent, "seed " << seed);
  }
}

TEST_CASE("decode rejects broken blobs") {
  const Bytes good = compile_profile(fixture("multiple-filters"), small_vocab());
  CHECK(failure([&] { decode_blob(Bytes(good.begin(), good.begin() + 4)); }) ==
        ErrorKind::malformed_blob);
  CHECK(failure([&] { decode_blob(Bytes(good.begin(), good.begin() + 20)); }) ==
        ErrorKind::malformed_blob);

  Bytes bundled = good;
  bundled[1] = 0x80;
  CHECK(failure([&] { decode_blob(bundled); }) == ErrorKind::wrong_format_id);

  // An operation pointer into the header.
  Bytes dangling = good;
  dangling[6] = 0x01;
  dangling[7] = 0x00;
  CHECK(failure([&] { decode_blob(dangling); }) != ErrorKind::io);

  // Nonzero padding between the pointer table and the nodes.
  const BinaryProfile bp = decode_blob(good);
  const std::size_t pad_end = std::size_t{bp.node_begin} * kRecordSize;
  if (6 + 2 * std::size_t{bp.op_count} < pad_end) {
    Bytes padded = good;
    padded[pad_end - 1] = 0xee;
    CHECK(failure([&] { decode_blob(padded); }) == ErrorKind::malformed_blob);
  }
}

TEST_CASE("cycles and dangling offsets in hand blobs") {
  const std::uint16_t b = first_node_unit(1);
  // A -> B -> A.
  const Bytes cyc = hand_blob({b}, {node(0x1d, 1, b + 1, b + 2), node(0x1d, 2, b, b + 2),
                                    NodeRecord::terminal(Decision::allow),
                                    NodeRecord::terminal(Decision::deny)});
  CHECK(failure([&] { decode_blob(cyc); }) == ErrorKind::cycle_detected);
  const BinaryProfile lax = decode_blob(cyc, {.verify_graph = false});
  CHECK(lax.nodes.size() == 4);

  const Bytes dangling = hand_blob({b}, {node(0x1d, 1, b + 9, b + 2),
                                         NodeRecord::terminal(Decision::allow),
                                         NodeRecord::terminal(Decision::deny)});
  CHECK(failure([&] { decode_blob(dangling); }) != ErrorKind::io);
}

TEST_CASE("bundle pack and unpack") {
  std::vector<Profile> ps = all_fixtures();
  const Bytes bundle = pack_bundle(ps, small_vocab());
  CHECK(sniff_format(bundle) == kBundledFormat);
  const UnpackResult r = unpack_bundle(bundle);
  CHECK(r.offset == 0);
  REQUIRE(r.views.size() == ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(r.views[i].name == ps[i].name);
    CHECK(r.views[i].profile.format_id == kBundledFormat);
    CHECK(extract_profile(r.views[i].profile, small_vocab()) == compile_profile(ps[i], small_vocab()));
    const BinaryProfile alone = decode_blob(compile_profile(ps[i], small_vocab()));
    const auto eq = check_equivalence(&r.views[i].profile, &alone, small_vocab());
    CHECK_MESSAGE(eq.equivalent, ps[i].name);
  }
}

TEST_CASE("bundled and separated encodings agree on random profiles") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    std::vector<Profile> ps;
    for (std::uint64_t k = 0; k < 3; ++k) {
      ps.push_back(generate_profile(ProfileGenerator::small(seed * 10 + k), small_vocab()));
      ps.back().name = "p" + std::to_string(k);
    }
    const UnpackResult r = unpack_bundle(pack_bundle(ps, small_vocab()));
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const BinaryProfile alone = decode_blob(compile_profile(ps[i], small_vocab()));
      CHECK(check_equivalence(&r.views[i].profile, &alone, small_vocab()).equivalent);
    }
  }
}

TEST_CASE("bundle scanning") {
  const Bytes bundle = pack_bundle({fixture("simplified"), fixture("snippets")}, small_vocab());
  Bytes padded(64, 0);
  padded.insert(padded.end(), bundle.begin(), bundle.end());
  CHECK(failure([&] { unpack_bundle(padded); }) == ErrorKind::no_bundle_found);
  const UnpackResult r = unpack_bundle(padded, true);
  CHECK(r.offset == 64);
  CHECK(r.views.size() == 2);

  CHECK(failure([&] { unpack_bundle(Bytes(256, 0), true); }) == ErrorKind::no_bundle_found);
  CHECK(failure([&] { unpack_bundle(Bytes(256, 0)); }) == ErrorKind::no_bundle_found);
  const Bytes separated = compile_profile(fixture("simplified"), small_vocab());
  CHECK(failure([&] { unpack_bundle(separated); }) == ErrorKind::wrong_format_id);
}

TEST_CASE("bundle input checks") {
  CHECK(failure([] { pack_bundle({}, small_vocab()); }) == ErrorKind::invalid_profile);
  CHECK(failure([] { pack_bundle({fixture("simplified"), fixture("simplified")}, small_vocab()); }) ==
        ErrorKind::invalid_profile);
}

TEST_CASE("compile rejects values outside the vocabulary") {
  Profile p = fixture("simplified");
  p.rules["file-read*"].push_back({Decision::allow, FilterExpr::atom("vnode-type", Symbol{"PURPLE"})});
  CHECK(failure([&] { compile_profile(p, small_vocab()); }) == ErrorKind::unknown_filter_value);
  Profile q = fixture("simplified");
  q.rules["file-read*"].push_back({Decision::allow, FilterExpr::atom("colour", Symbol{"red"})});
  CHECK(failure([&] { compile_profile(q, small_vocab()); }) == ErrorKind::unknown_filter_key);
}
