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

#include "sbx/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "sbx/error.hpp"
#include "sbx/generator.hpp"
#include "sbx/sbpl.hpp"

namespace sbx {

CaseResult run_roundtrip_case(const RoundTripCase& c, const Vocabulary& vocab,
                              const EquivalenceOptions& eq) {
  CaseResult r{c.name, "compile", false, {}};
  try {
    const BinaryProfile compiled = decode_blob(compile_profile(c.profile, vocab));
    r.phase = "decompile";
    const DecompiledProfile d = decompile_profile(compiled, vocab);
    r.phase = "reparse";
    const Profile reparsed = parse_sbpl(d.text, c.name);
    if (auto diags = validate_profile(reparsed, vocab); !diags.empty())
      throw Error(ErrorKind::invalid_profile, diags.front().message);
    r.phase = "recompile";
    const BinaryProfile again = decode_blob(compile_profile(reparsed, vocab));
    r.phase = "equivalence";
    const auto report = check_equivalence(&c.profile, &again, vocab, eq);
    r.exhaustive = report.exhaustive;
    r.contexts = report.contexts;
    if (!report.equivalent) {
      const auto& w = *report.witness;
      r.witness = w.op + " " + format_context(w.context) + " source=" + to_string(w.a) +
                  " roundtrip=" + to_string(w.b);
      return r;
    }
    r.pass = true;
  } catch (const std::exception& e) {
    r.witness = e.what();
  }
  return r;
}

SuiteSummary run_roundtrip_suite(const std::vector<RoundTripCase>& corpus,
                                 const Vocabulary& vocab, const std::filesystem::path& report,
                                 const EquivalenceOptions& eq) {
  SuiteSummary s;
  s.cases = corpus.size();
  s.results.resize(corpus.size());
  const auto n = static_cast<std::int64_t>(corpus.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i)
    s.results[static_cast<std::size_t>(i)] =
        run_roundtrip_case(corpus[static_cast<std::size_t>(i)], vocab, eq);
  s.passed = static_cast<std::size_t>(
      std::count_if(s.results.begin(), s.results.end(), [](const auto& r) { return r.pass; }));
  if (!report.empty()) {
    std::ofstream out(report);
    out << "# case\tphase\tresult\twitness\n";
    for (const auto& r : s.results) {
      std::string w = r.witness;
      std::replace(w.begin(), w.end(), '\n', ' ');
      std::replace(w.begin(), w.end(), '\t', ' ');
      out << r.name << '\t' << r.phase << '\t' << (r.pass ? "pass" : "fail") << '\t' << w << '\n';
    }
  }
  return s;
}

std::vector<RoundTripCase> fixture_corpus(const Vocabulary& vocab,
                                          const std::filesystem::path& dir) {
  const std::filesystem::path root =
      dir.empty() ? std::filesystem::path(SBX_DATA_DIR) / "fixtures" : dir;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(root))
    if (e.path().extension() == ".sb") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<RoundTripCase> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::ostringstream text;
    text << in.rdbuf();
    Profile p = parse_sbpl(text.str(), f.stem().string());
    if (auto diags = validate_profile(p, vocab); !diags.empty())
      throw Error(ErrorKind::invalid_profile, f.string() + ": " + diags.front().message);
    out.push_back({f.stem().string(), std::move(p)});
  }
  return out;
}

std::vector<RoundTripCase> random_corpus(std::uint64_t first, std::size_t count,
                                         const Vocabulary& vocab) {
  std::vector<RoundTripCase> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = first + i;
    out.push_back({"random-" + std::to_string(seed),
                   generate_profile(ProfileGenerator::small(seed), vocab)});
  }
  return out;
}

// ---------------------------------------------------------------------------

Bytes mutate_blob(const Bytes& blob, std::mt19937_64& rng) {
  Bytes b = blob;
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  const std::size_t edits = 1 + pick(4);
  for (std::size_t e = 0; e < edits; ++e) {
    if (b.empty()) {
      b.push_back(static_cast<std::uint8_t>(pick(256)));
      continue;
    }
    switch (pick(6)) {
      case 0: b[pick(b.size())] ^= static_cast<std::uint8_t>(1u << pick(8)); break;
      case 1: b[pick(b.size())] = static_cast<std::uint8_t>(pick(256)); break;
      case 2: b.resize(pick(b.size())); break;
      case 3:
        for (std::size_t i = 0, n = 1 + pick(16); i < n; ++i)
          b.push_back(static_cast<std::uint8_t>(pick(256)));
        break;
      case 4: {
        // A u16 field of some record-aligned word: offsets, values, counts.
        const std::size_t at = (pick(std::max<std::size_t>(1, b.size() / 2))) * 2;
        if (at + 1 < b.size()) {
          const std::uint16_t v = static_cast<std::uint16_t>(pick(3) == 0 ? pick(65536) : pick(b.size() / 8 + 4));
          b[at] = static_cast<std::uint8_t>(v & 0xff);
          b[at + 1] = static_cast<std::uint8_t>(v >> 8);
        }
        break;
      }
      default: {
        const std::size_t from = pick(b.size()), to = pick(b.size());
        b[to] = b[from];
        break;
      }
    }
  }
  return b;
}

namespace {

// Runs the whole read path over one blob.
void exercise(const Bytes& blob, const Vocabulary& vocab) {
  std::vector<BinaryProfile> views;
  if (sniff_format(blob) == kBundledFormat) {
    for (auto& v : unpack_bundle(blob).views) views.push_back(std::move(v.profile));
  } else {
    views.push_back(decode_blob(blob));
  }
  DecompileOptions opts;
  opts.parallel = false;
  for (const auto& bp : views) {
    decompile_profile(bp, vocab, nullptr, opts);
    BlobEvaluator ev(bp, vocab);
    for (std::size_t op = 0; op < bp.op_count; ++op) ev(op, {});
  }
}

}  // namespace

FuzzSummary run_fuzz_suite(const std::vector<Bytes>& seeds, std::size_t count, std::uint64_t seed,
                           const Vocabulary& vocab, std::chrono::duration<double> per_case_limit) {
  using Clock = std::chrono::steady_clock;
  FuzzSummary s;
  s.cases = count;
  if (seeds.empty() || count == 0) return s;

  // Mutations are drawn serially so the corpus does not depend on scheduling.
  std::mt19937_64 rng(seed);
  std::vector<Bytes> corpus(count);
  for (auto& b : corpus) b = mutate_blob(seeds[std::uniform_int_distribution<std::size_t>(0, seeds.size() - 1)(rng)], rng);

  const int threads = omp_get_max_threads();
  std::vector<std::atomic<std::int64_t>> started(static_cast<std::size_t>(threads));
  for (auto& t : started) t = -1;
  std::atomic<bool> done{false};
  std::mutex m;
  std::condition_variable cv;
  const auto watchdog_limit = std::chrono::duration_cast<Clock::duration>(per_case_limit * 4);
  std::vector<Clock::time_point> since(static_cast<std::size_t>(threads));
  std::thread watchdog([&] {
    std::unique_lock lock(m);
    while (!cv.wait_for(lock, std::chrono::milliseconds(200), [&] { return done.load(); })) {
      for (std::size_t t = 0; t < started.size(); ++t) {
        const auto id = started[t].load();
        if (id >= 0 && Clock::now() - since[t] > watchdog_limit) {
          std::fprintf(stderr, "fuzz case %lld did not terminate\n", static_cast<long long>(id));
          std::_Exit(2);
        }
      }
    }
  });

  std::vector<int> outcome(count, 0);  // 1 accepted, 2 rejected, 3 failure
  std::vector<ErrorKind> kinds(count, ErrorKind::malformed_blob);
  std::vector<std::string> messages(count);
  std::vector<double> seconds(count, 0.0);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
    const auto k = static_cast<std::size_t>(i);
    since[t] = Clock::now();
    started[t] = i;
    try {
      exercise(corpus[k], vocab);
      outcome[k] = 1;
    } catch (const Error& e) {
      outcome[k] = 2;
      kinds[k] = e.kind();
    } catch (const std::exception& e) {
      outcome[k] = 3;
      messages[k] = e.what();
    } catch (...) {
      outcome[k] = 3;
      messages[k] = "non-standard exception";
    }
    seconds[k] = std::chrono::duration<double>(Clock::now() - since[t]).count();
    started[t] = -1;
  }
  {
    std::lock_guard lock(m);
    done = true;
  }
  cv.notify_all();
  watchdog.join();

  for (std::size_t k = 0; k < count; ++k) {
    s.slowest = std::max(s.slowest, std::chrono::duration<double>(seconds[k]));
    if (seconds[k] > per_case_limit.count())
      s.failures.push_back("case " + std::to_string(k) + ": took " + std::to_string(seconds[k]) + " s");
    switch (outcome[k]) {
      case 1: ++s.accepted; break;
      case 2:
        ++s.rejected;
        ++s.kinds[kinds[k]];
        break;
      default: s.failures.push_back("case " + std::to_string(k) + ": " + messages[k]);
    }
  }
  return s;
}

}  // namespace sbx
