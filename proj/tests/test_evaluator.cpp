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

#include "sbx/error.hpp"
#include "sbx/evaluator.hpp"
#include "sbx/generator.hpp"
#include "support.hpp"

using namespace sbx;
using namespace sbx::test;

namespace {

Decision ast(const Profile& p, const char* op, const QueryContext& ctx) {
  return evaluate_ast(p, op, ctx, small_vocab());
}

void same_report(const EquivalenceReport& a, const EquivalenceReport& b) {
  CHECK(a.equivalent == b.equivalent);
  CHECK(a.exhaustive == b.exhaustive);
  CHECK(a.contexts == b.contexts);
  CHECK(a.disagreeing_ops == b.disagreeing_ops);
  REQUIRE(a.witness.has_value() == b.witness.has_value());
  if (a.witness) {
    CHECK(a.witness->op == b.witness->op);
    CHECK(a.witness->context == b.witness->context);
    CHECK(a.witness->a == b.witness->a);
    CHECK(a.witness->b == b.witness->b);
  }
}

}  // namespace

TEST_CASE("context text") {
  const QueryContext ctx = parse_context("# comment\npath=/bin/ls\n\nvnode-type=REGULAR-FILE\n");
  CHECK(ctx.size() == 2);
  CHECK(ctx.at("path") == "/bin/ls");
  CHECK(format_context(ctx) == "{path=/bin/ls, vnode-type=REGULAR-FILE}");
  CHECK(format_context({}) == "{}");
  CHECK(parse_context("remote=tcp a=b").at("remote") == "tcp a=b");
  CHECK_THROWS_AS(parse_context("path"), Error);
}

TEST_CASE("exception rule before the general rule") {
  const Profile p = fixture("simplified");
  CHECK(ast(p, "file-read*", {{"path", "/bin/secret.txt"}}) == Decision::deny);
  CHECK(ast(p, "file-read*", {{"path", "/bin/ls"}}) == Decision::allow);
  CHECK(ast(p, "file-read*", {{"path", "/usr/bin"}}) == Decision::allow);  // unanchored
  CHECK(ast(p, "file-read*", {{"path", "/etc"}}) == Decision::deny);
  CHECK(ast(p, "file-read*", {}) == Decision::deny);
  CHECK(ast(p, "signal", {{"path", "/bin/ls"}}) == Decision::deny);
}

TEST_CASE("sibling filters are alternatives") {
  const Profile p = fixture("multiple-filters");
  CHECK(ast(p, "file-read*", {{"path", "/bin/x"}}) == Decision::allow);
  CHECK(ast(p, "file-read*", {{"vnode-type", "REGULAR-FILE"}}) == Decision::allow);
  CHECK(ast(p, "file-read*", {{"vnode-type", "DIRECTORY"}, {"path", "/etc"}}) == Decision::deny);
}

TEST_CASE("metafilters") {
  const Profile n = fixture("require-not");
  CHECK(ast(n, "file-read*", {{"vnode-type", "DIRECTORY"}}) == Decision::allow);
  CHECK(ast(n, "file-read*", {{"vnode-type", "REGULAR-FILE"}}) == Decision::deny);
  CHECK(ast(n, "file-read*", {}) == Decision::allow);

  const Profile nested = fixture("nested");
  CHECK(ast(nested, "file-write*", {{"path", "/tmp/a"}}) == Decision::allow);
  CHECK(ast(nested, "file-write*", {{"path", "/tmp/a"}, {"vnode-type", "DIRECTORY"}}) ==
        Decision::deny);
  CHECK(ast(nested, "file-write*",
            {{"path", "/tmp/a"}, {"vnode-type", "DIRECTORY"}, {"file-mode", "420"}}) ==
        Decision::allow);
  CHECK(ast(nested, "file-write*", {{"path", "/tmp/b"}}) == Decision::deny);

  const Profile pty = fixture("pty-extension");
  CHECK(ast(pty, "file-read*", {{"path", "/dev/ttys003"}, {"extension", "com.apple.sandbox.pty"}}) ==
        Decision::allow);
  CHECK(ast(pty, "file-read*", {{"path", "/dev/ttys003"}}) == Decision::deny);
  CHECK(ast(pty, "file-read*", {{"path", "/x/dev/ttys0"}, {"extension", "com.apple.sandbox.pty"}}) ==
        Decision::deny);
}

TEST_CASE("endpoint and enum values") {
  const Profile p = fixture("allow-default");
  CHECK(ast(p, "network-outbound", {{"remote", "tcp *:25"}}) == Decision::deny);
  CHECK(ast(p, "network-outbound", {{"socket-type", "SOCK_RAW"}}) == Decision::deny);
  CHECK(ast(p, "network-outbound", {{"socket-type", "SOCK_STREAM"}}) == Decision::allow);
  CHECK(ast(p, "network-outbound", {}) == Decision::allow);
  CHECK(ast(p, "process-exec", {}) == Decision::deny);
  CHECK(ast(p, "file-write-data", {{"path", "/System/Library"}}) == Decision::deny);
  CHECK(ast(p, "file-read-data", {{"path", "/System/Library"}}) == Decision::allow);
}

TEST_CASE("inheritance stops at the first operation with rules") {
  const Profile p = fixture("inheritance");
  const auto& ops = small_vocab().operations;
  CHECK(effective_rules(p, ops, ops.lookup("file-read-data")) == &p.rules.at("file*"));
  CHECK(effective_rules(p, ops, ops.lookup("file-write-data")) == &p.rules.at("file-write*"));
  CHECK(effective_rules(p, ops, ops.lookup("signal")) == &p.rules.at("default"));
  CHECK(ast(p, "file-read-data", {{"path", "/private/var/mobile/x"}}) == Decision::allow);
  CHECK(ast(p, "file-write-data", {{"path", "/private/var/mobile/x"}}) == Decision::deny);
  CHECK(ast(p, "mach-lookup", {{"global-name", "com.apple.system.logger"}}) == Decision::allow);
  CHECK_THROWS_AS(ast(p, "no-such-op", {}), Error);
}

TEST_CASE("blob walk trace") {
  const Profile p = fixture("multiple-filters");
  const BinaryProfile bp = decode_blob(compile_profile(p, small_vocab()));
  std::vector<std::uint16_t> trace;
  CHECK(evaluate(bp, "file-read*", {{"vnode-type", "REGULAR-FILE"}}, small_vocab(), &trace) ==
        Decision::allow);
  REQUIRE(trace.size() == 3);
  CHECK(trace.back() == bp.allow_terminal);
  trace.clear();
  CHECK(evaluate(bp, "signal", {}, small_vocab(), &trace) == Decision::deny);
  CHECK(trace == std::vector<std::uint16_t>{bp.deny_terminal});
}

TEST_CASE("source, reusable and blob evaluators agree") {
  const auto& vocab = small_vocab();
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const Profile p = generate_profile(ProfileGenerator::small(seed), vocab);
    const BinaryProfile bp = decode_blob(compile_profile(p, vocab));
    const ProfileEvaluator pe(p, vocab);
    const BlobEvaluator be(bp, vocab);
    const ContextUniverse u(collect_atoms(&p, vocab), vocab);
    const std::size_t n = std::min<std::size_t>(u.size(), 400);
    for (std::size_t i = 0; i < n; ++i) {
      const QueryContext ctx = u.at(i);
      for (std::size_t op = 0; op < vocab.operations.size(); ++op) {
        const Decision want = evaluate_ast(p, vocab.operations.name(op), ctx, vocab);
        REQUIRE(pe(op, ctx) == want);
        REQUIRE(be(op, ctx) == want);
      }
    }
  }
}

TEST_CASE("context universe") {
  const Profile p = fixture("simplified");
  const ContextUniverse u(collect_atoms(&p, small_vocab()), small_vocab());
  REQUIRE(u.bindings() == std::vector<std::string>{"path"});
  const auto& vs = u.values()[0];
  CHECK_FALSE(vs[0].has_value());
  CHECK(vs[1] == std::optional<std::string>("~other~"));
  CHECK(std::find(vs.begin(), vs.end(), std::optional<std::string>("/bin/secret.txt")) != vs.end());
  CHECK(u.size() == vs.size());
  CHECK(u.at(0).empty());
}

TEST_CASE("collected atoms from a blob match the source") {
  for (const std::string name : {"nested", "require-not"}) {
    const Profile p = fixture(name);
    const BinaryProfile bp = decode_blob(compile_profile(p, small_vocab()));
    CHECK_MESSAGE(collect_atoms(&bp, small_vocab()) == collect_atoms(&p, small_vocab()), name);
  }
  // Regex atoms come back as patterns with the same language.
  const Profile p = fixture("simplified");
  const BinaryProfile bp = decode_blob(compile_profile(p, small_vocab()));
  const auto atoms = collect_atoms(&bp, small_vocab());
  REQUIRE(atoms.size() == 2);
  for (const auto& a : atoms) {
    if (a.key() != "regex") continue;
    const Nfa got = build_nfa(parse_regex(std::get<std::string>(a.value())));
    const Nfa want = build_nfa(parse_regex("/bin/*"));
    const std::uint8_t alpha[] = {'/', 'b', 'i', 'n', 'x'};
    CHECK_FALSE(bounded_language_difference(got, want, alpha, 6, MatchMode::search));
  }
}

TEST_CASE("a changed rule is reported with a witness") {
  const Profile a = fixture("simplified");
  Profile b = a;
  b.rules.at("file-read*").front().filter = FilterExpr::atom("literal", std::string("/bin/other"));
  const auto r = check_equivalence(&a, &b, small_vocab());
  CHECK_FALSE(r.equivalent);
  CHECK(r.exhaustive);
  REQUIRE(r.witness);
  CHECK(r.witness->op == "file-read*");
  CHECK(evaluate_ast(a, r.witness->op, r.witness->context, small_vocab()) == r.witness->a);
  CHECK(evaluate_ast(b, r.witness->op, r.witness->context, small_vocab()) == r.witness->b);
  CHECK(r.witness->a != r.witness->b);
  // Inheriting operations disagree too.
  CHECK(r.disagreeing_ops ==
        std::vector<std::string>{"file-read*", "file-read-data", "file-read-metadata"});

  EquivalenceOptions only;
  only.ops = {"signal"};
  CHECK(check_equivalence(&a, &b, small_vocab(), only).equivalent);
}

TEST_CASE("parallel and serial reports match") {
  const auto& vocab = small_vocab();
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    const Profile a = generate_profile(ProfileGenerator::small(seed), vocab);
    const Profile b = generate_profile(ProfileGenerator::small(seed + 1000), vocab);
    const BinaryProfile bb = decode_blob(compile_profile(b, vocab));
    same_report(check_equivalence(&a, &bb, vocab), check_equivalence_serial(&a, &bb, vocab));
    same_report(check_equivalence(&a, &a, vocab), check_equivalence_serial(&a, &a, vocab));
  }
}

TEST_CASE("sampled mode is deterministic per seed") {
  const auto& vocab = small_vocab();
  const Profile a = generate_profile(ProfileGenerator::small(5), vocab);
  const Profile b = generate_profile(ProfileGenerator::small(6), vocab);
  EquivalenceOptions opts;
  opts.exhaustive_limit = 1;
  opts.samples = 500;
  const auto r1 = check_equivalence(&a, &b, vocab, opts);
  CHECK_FALSE(r1.exhaustive);
  CHECK(r1.contexts == 500);
  same_report(r1, check_equivalence(&a, &b, vocab, opts));
  same_report(r1, check_equivalence_serial(&a, &b, vocab, opts));
}
