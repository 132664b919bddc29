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
#include "sbx/generator.hpp"
#include "sbx/sbpl.hpp"
#include "sbx/sexpr.hpp"
#include "support.hpp"

using namespace sbx;
using sbx::test::fixture;
using sbx::test::small_vocab;

namespace {

FilterExpr lit(const char* s) { return FilterExpr::atom("literal", std::string(s)); }

}  // namespace

TEST_CASE("reader atoms and comments") {
  const auto forms = read_sexprs("; leading\n(a \"b\\\"c\" #\"/x/*\" 42 'q) ; trailing\n()");
  REQUIRE(forms.size() == 2);
  const auto& c = forms[0].children;
  REQUIRE(c.size() == 5);
  CHECK(c[0].is_symbol("a"));
  CHECK(c[1].kind == SExpr::Kind::string);
  CHECK(c[1].text == "b\"c");
  CHECK(c[2].kind == SExpr::Kind::regex);
  CHECK(c[2].text == "/x/*");
  CHECK(c[3].kind == SExpr::Kind::integer);
  CHECK(c[3].number == 42);
  CHECK(c[4].kind == SExpr::Kind::symbol);
  CHECK(forms[1].children.empty());
  CHECK(forms[0].span.line == 2);
}

TEST_CASE("reader reports positions") {
  try {
    read_sexprs("(allow\n  file-read* \"open");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.span().line == 2);
    CHECK(e.kind() == ErrorKind::syntax);
  }
  CHECK_THROWS_AS(read_sexprs("(a (b)"), SyntaxError);
  CHECK_THROWS_AS(read_sexprs("a)"), SyntaxError);
}

TEST_CASE("simplified profile parses without a version line") {
  const Profile p = fixture("simplified");
  CHECK(p.default_decision() == Decision::deny);
  const auto& rules = p.rules.at("file-read*");
  REQUIRE(rules.size() == 2);
  CHECK(rules[0] == Rule{Decision::deny, lit("/bin/secret.txt")});
  CHECK(rules[1] == Rule{Decision::allow, FilterExpr::atom("regex", std::string("/bin/*"))});
}

TEST_CASE("sibling filters become one require-any") {
  const Profile p = fixture("multiple-filters");
  const auto& rules = p.rules.at("file-read*");
  REQUIRE(rules.size() == 1);
  REQUIRE(rules[0].filter);
  const FilterExpr& f = *rules[0].filter;
  CHECK(f.kind() == FilterExpr::Kind::require_any);
  REQUIRE(f.children().size() == 2);
  CHECK(f.children()[0] == FilterExpr::atom("regex", std::string("/bin/*")));
  CHECK(f.children()[1] == FilterExpr::atom("vnode-type", Symbol{"REGULAR-FILE"}));
}

TEST_CASE("one rule form naming several operations") {
  const Profile p = parse_sbpl("(deny default)\n(allow file-read* file-write* (literal \"/a\"))");
  CHECK(p.rules.at("file-read*") == p.rules.at("file-write*"));
}

TEST_CASE("endpoint filters") {
  const Profile p = fixture("snippets");
  const auto& r = p.rules.at("network-outbound").front();
  REQUIRE(r.filter);
  CHECK(r.filter->key() == "remote");
  const auto& ep = std::get<Endpoint>(r.filter->value());
  CHECK(ep.protocol == "tcp");
  CHECK(ep.address == "localhost:22");
}

TEST_CASE("rejected forms") {
  auto kind_of = [](const char* text) {
    try {
      parse_sbpl(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::io;
  };
  CHECK(kind_of("(version 2)\n(deny default)") == ErrorKind::unsupported_version);
  CHECK(kind_of("(define x 1)") == ErrorKind::unsupported_construct);
  CHECK(kind_of("(if (x) (deny default))") == ErrorKind::unsupported_construct);
  CHECK(kind_of("(import \"bsd.sb\")") == ErrorKind::unsupported_construct);
  CHECK(kind_of("(permit file-read*)") == ErrorKind::syntax);
  CHECK(kind_of("(allow (literal \"/a\"))") == ErrorKind::syntax);
  CHECK(kind_of("(allow file-read* (require-not (literal \"/a\") (literal \"/b\")))") ==
        ErrorKind::syntax);
  CHECK(kind_of("(allow file-read* (literal))") == ErrorKind::syntax);
}

TEST_CASE("printer layout") {
  const auto& vocab = small_vocab();
  const std::string text = print_sbpl(fixture("simplified"), vocab);
  CHECK(text ==
        "(version 1)\n"
        "(deny default)\n"
        "(deny file-read* (literal \"/bin/secret.txt\"))\n"
        "(allow file-read* (regex #\"/bin/*\"))");
  CHECK(print_filter(FilterExpr::negate(lit("/a\"b")), vocab.filters) ==
        "(require-not (literal \"/a\\\"b\"))");
}

TEST_CASE("fixtures survive print and parse") {
  const auto& vocab = small_vocab();
  for (const char* name : {"allow-default", "inheritance", "multiple-filters", "nested",
                           "pty-extension", "require-all", "require-any", "require-not",
                           "simplified", "snippets"}) {
    const Profile p = fixture(name);
    CHECK_MESSAGE(validate_profile(p, vocab).empty(), name);
    const Profile again = parse_sbpl(print_sbpl(p, vocab), name);
    CHECK_MESSAGE(canonicalize(again) == canonicalize(p), name);
  }
}

TEST_CASE("random profiles survive print and parse") {
  const auto& vocab = small_vocab();
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const Profile p = generate_profile(ProfileGenerator::small(seed), vocab);
    const Profile again = parse_sbpl(print_sbpl(p, vocab), p.name);
    CHECK_MESSAGE(canonicalize(again) == canonicalize(p), "seed " << seed);
  }
}
