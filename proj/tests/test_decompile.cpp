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

#include "sbx/decompile.hpp"
#include "sbx/error.hpp"
#include "sbx/generator.hpp"
#include "support.hpp"

using namespace sbx;
using namespace sbx::test;

namespace {

FilterExpr lit(const char* s) { return FilterExpr::atom("literal", std::string(s)); }
FilterExpr vnode(const char* v) { return FilterExpr::atom("vnode-type", Symbol{v}); }
FilterExpr sock(const char* v) { return FilterExpr::atom("socket-type", Symbol{v}); }

const char* const kFixtures[] = {"allow-default", "inheritance", "multiple-filters", "nested",
                                 "pty-extension", "require-all",  "require-any",
                                 "require-not",   "simplified",  "snippets"};

const ImplicitRules& standard() {
  static const ImplicitRules r = load_implicit_rules(data_path("implicit/standard.sb"));
  return r;
}

Profile decompile_source(const Profile& p, const DecompileOptions& opts = {}) {
  return decompile_profile(decode_blob(compile_profile(p, small_vocab())), small_vocab(), nullptr,
                           opts)
      .profile;
}

bool mentions(const Profile& p, const std::string& op, const Rule& r) {
  auto it = p.rules.find(op);
  return it != p.rules.end() && std::find(it->second.begin(), it->second.end(), r) != it->second.end();
}

}  // namespace

TEST_CASE("rules from reach conditions") {
  const Decision d = Decision::deny, g = Decision::allow;
  CHECK(rules_for(Condition::never(), d) == std::vector<Rule>{{d, std::nullopt}});
  CHECK(rules_for(Condition::always(), d) == std::vector<Rule>{{g, std::nullopt}});
  CHECK(rules_for(Condition::when(lit("/a")), d) == std::vector<Rule>{{g, lit("/a")}});
  CHECK(rules_for(Condition::when(FilterExpr::negate(lit("/a"))), d) ==
        std::vector<Rule>{{d, lit("/a")}, {g, std::nullopt}});
  const auto excl = rules_for(
      Condition::when(FilterExpr::all({FilterExpr::negate(lit("/a")), vnode("FIFO")})), d);
  CHECK(excl == std::vector<Rule>{{d, lit("/a")}, {g, vnode("FIFO")}});
  // Mirrored for an allow default.
  CHECK(rules_for(Condition::when(lit("/a")), g) == std::vector<Rule>{{d, lit("/a")}});
}

TEST_CASE("three-node graph decompiles to one require-all rule") {
  const Profile p = decompile_profile(decode_blob(three_node_blob()), small_vocab()).profile;
  CHECK(p.default_decision() == Decision::deny);
  const FilterExpr want = canonicalize(FilterExpr::all(
      {vnode("REGULAR-FILE"),
       FilterExpr::any({FilterExpr::negate(sock("SOCK_STREAM")),
                        FilterExpr::atom("target", Symbol{"self"})})}));
  REQUIRE(p.rules.count("file-read*") == 1);
  CHECK(p.rules.at("file-read*") == std::vector<Rule>{{Decision::allow, want}});
  // The children share their parent's entry and inherit.
  CHECK(p.rules.size() == 2);
}

TEST_CASE("exception rule shape survives") {
  const auto out = decompile_profile(decode_blob(compile_profile(fixture("simplified"), small_vocab())),
                                     small_vocab());
  const auto& rules = out.profile.rules.at("file-read*");
  REQUIRE(rules.size() == 2);
  CHECK(rules[0] == Rule{Decision::deny, lit("/bin/secret.txt")});
  CHECK(rules[1].decision == Decision::allow);
  CHECK(out.text.find("(deny file-read* (literal \"/bin/secret.txt\"))") != std::string::npos);
  CHECK(out.text.find("(allow file-read* (regex #\"/bin/*\"))") != std::string::npos);
}

TEST_CASE("sibling filters print as siblings") {
  const auto out = decompile_profile(
      decode_blob(compile_profile(fixture("multiple-filters"), small_vocab())), small_vocab());
  CHECK(out.text.find("(allow file-read* (regex #\"/bin/*\") (vnode-type REGULAR-FILE))") !=
        std::string::npos);
}

TEST_CASE("fixtures decompile to equivalent profiles") {
  for (const char* name : kFixtures) {
    const Profile p = fixture(name);
    const Profile back = decompile_source(p);
    CHECK_MESSAGE(validate_profile(back, small_vocab()).empty(), name);
    CHECK_MESSAGE(check_equivalence(&p, &back, small_vocab()).equivalent, name);
    const Profile reparsed = parse_sbpl(print_sbpl(back, small_vocab()));
    CHECK_MESSAGE(check_equivalence(&p, &reparsed, small_vocab()).equivalent, name);
  }
}

TEST_CASE("inheriting operations are not repeated") {
  const Profile back = decompile_source(fixture("inheritance"));
  CHECK(back.rules.count("file*") == 1);
  CHECK(back.rules.count("file-write*") == 1);
  CHECK(back.rules.count("file-read*") == 0);
  CHECK(back.rules.count("file-read-data") == 0);
  CHECK(back.rules.count("file-write-data") == 0);
}

TEST_CASE("serial and parallel emission agree") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Profile p = generate_profile(ProfileGenerator::small(seed), small_vocab());
    const BinaryProfile bp = decode_blob(compile_profile(p, small_vocab()));
    DecompileOptions serial;
    serial.parallel = false;
    CHECK(emit_rules(bp, small_vocab(), serial) == emit_rules(bp, small_vocab()));
  }
}

TEST_CASE("permissive mode skips broken operations") {
  const auto& ops = small_vocab().operations;
  const std::uint16_t b = first_node_unit(ops.size());
  std::vector<std::uint16_t> ptrs(ops.size(), b + 4);
  ptrs[ops.lookup("file-read*")] = b;
  ptrs[ops.lookup("signal")] = b + 1;
  const Bytes blob = hand_blob(ptrs, {node(0x1d, 1, b + 3, b + 4), node(0x7e, 1, b + 3, b + 4),
                                      node(0x1d, 2, b + 3, b + 4),
                                      NodeRecord::terminal(Decision::allow),
                                      NodeRecord::terminal(Decision::deny)});
  const BinaryProfile bp = decode_blob(blob);
  try {
    decompile_profile(bp, small_vocab());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unknown_filter_key);
    CHECK(std::string(e.what()).find("signal") != std::string::npos);
  }
  DecompileOptions opts;
  opts.permissive = true;
  const auto out = decompile_profile(bp, small_vocab(), nullptr, opts);
  REQUIRE(out.errors.size() == 1);
  CHECK(out.errors[0].op == "signal");
  CHECK(out.text.rfind("; skipped signal: ", 0) == 0);
  CHECK(out.profile.rules.count("signal") == 0);
  CHECK(out.profile.rules.at("file-read*") ==
        std::vector<Rule>{{Decision::allow, vnode("REGULAR-FILE")}});
}

TEST_CASE("operation count must match the vocabulary") {
  const Bytes blob = hand_blob({static_cast<std::uint16_t>(first_node_unit(1) + 1)},
                               {NodeRecord::terminal(Decision::allow), NodeRecord::terminal(Decision::deny)});
  CHECK_THROWS_AS(emit_rules(decode_blob(blob), small_vocab()), Error);
}

TEST_CASE("implicit rule file") {
  const ImplicitRules& r = standard();
  REQUIRE(r.rules.size() == 4);
  CHECK(r.rules[0].op == "mach-bootstrap");
  REQUIRE(r.rules[0].conditions.size() == 1);
  CHECK(r.rules[0].conditions[0].op == "mach-lookup");
  CHECK(r.rules[0].conditions[0].decision == Decision::allow);
  CHECK_FALSE(r.rules[0].conditions[0].negated);
  CHECK(r.rules[1].op == "network-outbound");
  CHECK(r.rules[1].conditions[0].decision == Decision::deny);
  CHECK(r.rules[1].conditions[0].negated);
  CHECK(r.rules[2].conditions.empty());
  CHECK(r.rules[2].rule.decision == Decision::deny);
  CHECK(r.rules[2].rule.filter->kind() == FilterExpr::Kind::require_any);
  CHECK(r.rules[3].op == "signal");
  CHECK(r.rules[3].rule == Rule{Decision::allow, FilterExpr::atom("target", Symbol{"self"})});

  CHECK_THROWS_AS(parse_implicit_rules("(if (maybe? x) (allow signal))"), Error);
  CHECK_THROWS_AS(parse_implicit_rules("(import \"x.sb\")"), Error);
  CHECK_THROWS_AS(parse_implicit_rules("(if (allowed? mach-lookup)"), SyntaxError);
}

TEST_CASE("can_return") {
  const auto& ops = small_vocab().operations;
  const Profile p = fixture("inheritance");
  CHECK(can_return(p, ops, ops.lookup("mach-lookup"), Decision::allow));
  CHECK(can_return(p, ops, ops.lookup("mach-lookup"), Decision::deny));
  CHECK_FALSE(can_return(p, ops, ops.lookup("signal"), Decision::allow));
  CHECK(can_return(p, ops, ops.lookup("file-read-data"), Decision::allow));
  const Profile a = fixture("allow-default");
  CHECK_FALSE(can_return(a, ops, ops.lookup("process-exec"), Decision::allow));
  CHECK_FALSE(can_return(a, ops, ops.lookup("file-read*"), Decision::deny));
}

TEST_CASE("implicit rules are prepended where their conditions hold") {
  const Profile p = fixture("inheritance");
  const Profile q = with_implicits(p, standard(), small_vocab());
  CHECK(q.rules.at("mach-bootstrap").front() == Rule{Decision::allow, std::nullopt});
  CHECK(q.rules.at("signal").front() ==
        Rule{Decision::allow, FilterExpr::atom("target", Symbol{"self"})});
  // file-read* can be denied, so the webdav rule is absent.
  CHECK(q.rules.at("network-outbound").size() == 2);
  // network-inbound used to inherit default; it keeps doing so.
  CHECK(evaluate_ast(q, "network-inbound", {}, small_vocab()) == Decision::deny);

  const Profile a = fixture("allow-default");
  const Profile qa = with_implicits(a, standard(), small_vocab());
  CHECK(qa.rules.at("network-outbound").front().filter->key() == "regex");
}

TEST_CASE("cleanup removes injected rules") {
  for (const char* name : kFixtures) {
    const Profile p = fixture(name);
    const Bytes blob = compile_profile(with_implicits(p, standard(), small_vocab()), small_vocab());
    const auto out = decompile(blob, small_vocab(), &standard());
    REQUIRE(out.size() == 1);
    const Profile& clean = out[0].profile;
    CHECK_MESSAGE(check_equivalence(&p, &clean, small_vocab()).equivalent, name);
    CHECK_FALSE(mentions(clean, "signal", {Decision::allow, FilterExpr::atom("target", Symbol{"self"})}));
    CHECK(out[0].text.find("(allow signal (target self))") == std::string::npos);
    // A second application finds nothing further to remove.
    CHECK_MESSAGE(cleanup(clean, standard(), small_vocab()) == clean, name);
  }
}

TEST_CASE("cleanup keeps injected behaviour on random profiles") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const Profile p = generate_profile(ProfileGenerator::small(seed), small_vocab());
    const Profile injected = with_implicits(p, standard(), small_vocab());
    const Profile decompiled = decompile_source(injected);
    const Profile clean = cleanup(decompiled, standard(), small_vocab());
    const Profile seen = with_implicits(clean, standard(), small_vocab());
    CHECK_MESSAGE(check_equivalence(&seen, &decompiled, small_vocab()).equivalent, "seed " << seed);
    CHECK(cleanup(clean, standard(), small_vocab()) == clean);
  }
}
