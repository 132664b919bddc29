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

#include <filesystem>
#include <fstream>

#include "sbx/generator.hpp"
#include "sbx/harness.hpp"
#include "support.hpp"

using namespace sbx;
using namespace sbx::test;

namespace {

bool has_metafilter(const Profile& p) {
  for (const auto& [op, rules] : p.rules)
    for (const Rule& r : rules)
      if (r.filter && !r.filter->is_atom()) return true;
  return false;
}

std::size_t count_nodes(const BinaryProfile& bp, bool regex_only) {
  std::size_t n = 0;
  for (const auto& r : bp.nodes)
    if (!r.is_terminal() && (!regex_only || (r.key & kRegexKeyBit))) ++n;
  return n;
}

std::size_t consuming_leaves(const RegexAst& r) {
  switch (r.kind()) {
    case RegexAst::Kind::ch:
    case RegexAst::Kind::any_char:
    case RegexAst::Kind::char_class: return 1;
    default: break;
  }
  std::size_t n = 0;
  for (const auto& c : r.children()) n += consuming_leaves(c);
  return n;
}

}  // namespace

TEST_CASE("generator is deterministic and valid") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Profile a = generate_profile(ProfileGenerator::small(seed), small_vocab());
    CHECK(a == generate_profile(ProfileGenerator::small(seed), small_vocab()));
    CHECK(validate_profile(a, small_vocab()).empty());
  }
  CHECK(generate_profile(ProfileGenerator::small(1), small_vocab()) !=
        generate_profile(ProfileGenerator::small(2), small_vocab()));
}

TEST_CASE("depth one yields atoms only") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    ProfileGenerator g = ProfileGenerator::small(seed);
    g.limits.max_depth = 1;
    CHECK_FALSE(has_metafilter(generate_profile(g, small_vocab())));
  }
}

TEST_CASE("random regexes respect the atom budget") {
  std::mt19937_64 rng(3);
  const std::uint8_t alpha[] = {'a', 'b'};
  for (int i = 0; i < 300; ++i) {
    const RegexAst r = random_regex(rng, alpha, 4);
    CHECK(r.kind() != RegexAst::Kind::empty);
    CHECK(consuming_leaves(r) <= 4);
  }
}

TEST_CASE("container scale profile size") {
  const Vocabulary& vocab = ios9_vocab();
  const Profile p = generate_profile(ProfileGenerator::container_scale(1), vocab);
  CHECK(validate_profile(p, vocab).empty());
  const BinaryProfile bp = decode_blob(compile_profile(p, vocab));
  const std::size_t nodes = count_nodes(bp, false);
  CHECK(nodes >= kContainerNodeTarget * 9 / 10);
  CHECK(nodes <= kContainerNodeTarget * 11 / 10);
  const double regex_share = static_cast<double>(count_nodes(bp, true)) / static_cast<double>(nodes);
  CHECK(regex_share > 0.03);
  CHECK(regex_share < 0.12);
}

TEST_CASE("round-trip suite over fixtures and random profiles") {
  std::vector<RoundTripCase> corpus = fixture_corpus(small_vocab());
  CHECK(corpus.size() == 10);
  const auto more = random_corpus(1, 50, small_vocab());
  corpus.insert(corpus.end(), more.begin(), more.end());
  const auto report = std::filesystem::temp_directory_path() / "sbx_roundtrip_report.tsv";
  const SuiteSummary s = run_roundtrip_suite(corpus, small_vocab(), report);
  CHECK(s.cases == 60);
  for (const auto& r : s.results) CHECK_MESSAGE(r.pass, r.name << " " << r.phase << " " << r.witness);
  CHECK(s.all_passed());
  const std::string text = read_text(report);
  CHECK(text.rfind("# case\tphase\tresult\twitness\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 61);
  std::filesystem::remove(report);
}

TEST_CASE("a broken case reports its phase") {
  RoundTripCase c{"bad", fixture("simplified")};
  c.profile.rules["file-read*"].push_back({Decision::allow, FilterExpr::atom("colour", Symbol{"x"})});
  const CaseResult r = run_roundtrip_case(c, small_vocab());
  CHECK_FALSE(r.pass);
  CHECK(r.phase == "compile");
  CHECK_FALSE(r.witness.empty());
}

TEST_CASE("mutations are deterministic and change the blob") {
  const Bytes blob = compile_profile(fixture("multiple-filters"), small_vocab());
  std::mt19937_64 a(5), b(5);
  std::size_t changed = 0;
  for (int i = 0; i < 100; ++i) {
    const Bytes m = mutate_blob(blob, a);
    CHECK(m == mutate_blob(blob, b));
    changed += m != blob;
  }
  CHECK(changed >= 90);
}

TEST_CASE("a small fuzz run has no unstructured failures") {
  std::vector<Bytes> seeds;
  for (const auto& c : fixture_corpus(small_vocab()))
    seeds.push_back(compile_profile(c.profile, small_vocab()));
  seeds.push_back(pack_bundle({fixture("simplified"), fixture("nested")}, small_vocab()));
  const FuzzSummary f = run_fuzz_suite(seeds, 500, 9, small_vocab());
  CHECK(f.cases == 500);
  CHECK(f.rejected + f.accepted == f.cases);
  for (const auto& msg : f.failures) FAIL_CHECK(msg);
  CHECK(f.ok());
  CHECK(f.rejected > 0);
}
