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

// sbx: compile, decompile, pack, unpack, eval, graph and diff sandbox
// profiles.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sbx/blob.hpp"
#include "sbx/decompile.hpp"
#include "sbx/error.hpp"
#include "sbx/evaluator.hpp"
#include "sbx/graph.hpp"
#include "sbx/sbpl.hpp"
#include "sbx/vocab.hpp"

namespace fs = std::filesystem;
using namespace sbx;

namespace {

constexpr int kOk = 0;
constexpr int kDifferent = 1;
constexpr int kFailure = 2;
constexpr int kVerifyFailed = 3;

struct Config {
  std::string vocab_path;
  std::string implicit_path;
  std::uint64_t seed = 1;
};

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

void write_file(const fs::path& path, const Bytes& data) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

Vocabulary vocabulary(const Config& cfg) {
  std::string path = cfg.vocab_path;
  if (path.empty())
    if (const char* env = std::getenv("SBX_VOCAB")) path = env;
  if (path.empty()) path = std::string(SBX_DATA_DIR) + "/vocab/small.vocab";
  return load_vocabulary(path);
}

std::optional<ImplicitRules> implicit_rules(const Config& cfg) {
  if (cfg.implicit_path.empty()) return std::nullopt;
  return load_implicit_rules(cfg.implicit_path);
}

bool looks_binary(const Bytes& data) {
  return data.size() >= 2 && data[0] == 0x00 && (data[1] == 0x00 || data[1] == 0x80);
}

Profile load_sbpl(const fs::path& path, const Vocabulary& vocab) {
  const Bytes data = read_file(path);
  Profile p = parse_sbpl(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()),
                         path.stem().string());
  auto diags = validate_profile(p, vocab);
  if (!diags.empty()) {
    std::string msg;
    for (const auto& d : diags) msg += "\n  " + std::string(to_string(d.kind)) + ": " + d.message;
    throw Error(ErrorKind::invalid_profile, path.string() + msg);
  }
  return p;
}

// A policy read from disk: source text or one profile of a blob.
struct Loaded {
  std::optional<Profile> profile;
  std::optional<BinaryProfile> binary;
  PolicySource source() const {
    if (binary) return &*binary;
    return &*profile;
  }
};

Loaded load_policy(const fs::path& path, const Vocabulary& vocab, const std::string& select) {
  Loaded out;
  const Bytes data = read_file(path);
  if (!looks_binary(data)) {
    out.profile = load_sbpl(path, vocab);
    return out;
  }
  if (sniff_format(data) == kSeparatedFormat) {
    out.binary = decode_blob(data);
    return out;
  }
  auto bundle = unpack_bundle(data);
  for (auto& view : bundle.views)
    if (select.empty() || view.name == select) {
      out.binary = std::move(view.profile);
      return out;
    }
  throw Error(ErrorKind::invalid_profile, "bundle has no profile named " + select);
}

std::string rule_text(const std::string& op, const Rule& r, const FilterVocabulary& filters) {
  std::string s = std::string("(") + to_string(r.decision) + " " + op;
  if (r.filter) {
    if (r.filter->kind() == FilterExpr::Kind::require_any) {
      for (const auto& c : r.filter->children()) s += " " + print_filter(c, filters);
    } else {
      s += " " + print_filter(*r.filter, filters);
    }
  }
  return s + ")";
}

std::string describe_report(const EquivalenceReport& r) {
  std::ostringstream out;
  out << (r.equivalent ? "equivalent" : "not equivalent") << " over " << r.contexts
      << (r.exhaustive ? " contexts (exhaustive)" : " sampled contexts");
  if (r.witness)
    out << "; first disagreement: " << r.witness->op << " " << format_context(r.witness->context)
        << " -> " << to_string(r.witness->a) << " vs " << to_string(r.witness->b);
  return out.str();
}

// ---------------------------------------------------------------------------

int cmd_compile(const Config& cfg, const std::string& input, const std::string& output,
                bool no_dedupe) {
  const Vocabulary vocab = vocabulary(cfg);
  Profile p = load_sbpl(input, vocab);
  if (auto implicit = implicit_rules(cfg)) p = with_implicits(p, *implicit, vocab);
  SectionSizes sizes;
  const Bytes blob = compile_profile(p, vocab, {.dedupe = !no_dedupe}, &sizes);
  write_file(output, blob);
  std::cout << output << ": " << blob.size() << " bytes (header " << sizes.header
            << ", pointers " << sizes.pointers << ", nodes " << sizes.nodes << ", regex table "
            << sizes.regex_table << ", pool " << sizes.pool << ")\n";
  return kOk;
}

int cmd_decompile(const Config& cfg, const std::string& input, const std::string& output,
                  bool no_verify, bool permissive) {
  const Vocabulary vocab = vocabulary(cfg);
  const auto implicit = implicit_rules(cfg);
  const Bytes blob = read_file(input);
  DecompileOptions opts;
  opts.permissive = permissive;
  auto results = decompile(blob, vocab, implicit ? &*implicit : nullptr, opts);

  const bool bundled = sniff_format(blob) == kBundledFormat;
  if (bundled && output.empty())
    throw Error(ErrorKind::io, "decompiling a bundle needs -o DIR");
  for (const auto& r : results) {
    if (bundled) {
      fs::create_directories(output);
      write_file(fs::path(output) / (r.name + ".sb"), r.text + "\n");
    } else if (output.empty()) {
      std::cout << r.text << "\n";
    } else {
      write_file(output, r.text + "\n");
    }
    for (const auto& e : r.errors) std::cerr << "warning: skipped " << e.op << ": " << e.message << "\n";
  }
  if (no_verify) return kOk;

  // Recompile each output and compare with the input profile.
  std::vector<BinaryProfile> originals;
  if (bundled) {
    for (auto& v : unpack_bundle(blob).views) originals.push_back(std::move(v.profile));
  } else {
    originals.push_back(decode_blob(blob));
  }
  EquivalenceOptions eq;
  eq.seed = cfg.seed;
  int status = kOk;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string label = results[i].name.empty() ? input : results[i].name;
    try {
      Profile p = parse_sbpl(results[i].text);
      if (implicit) p = with_implicits(p, *implicit, vocab);
      const BinaryProfile again = decode_blob(compile_profile(p, vocab));
      const auto report = check_equivalence(&originals[i], &again, vocab, eq);
      std::cerr << "verify " << label << ": " << describe_report(report) << "\n";
      if (!report.equivalent && results[i].errors.empty()) status = kVerifyFailed;
    } catch (const Error& e) {
      std::cerr << "verify " << label << ": " << e.what() << "\n";
      status = kVerifyFailed;
    }
  }
  return status;
}

int cmd_pack(const Config& cfg, const std::vector<std::string>& inputs, const std::string& output) {
  const Vocabulary vocab = vocabulary(cfg);
  const auto implicit = implicit_rules(cfg);
  std::vector<Profile> profiles;
  for (const auto& in : inputs) {
    Profile p = load_sbpl(in, vocab);
    if (implicit) p = with_implicits(p, *implicit, vocab);
    profiles.push_back(std::move(p));
  }
  SectionSizes sizes;
  const Bytes blob = pack_bundle(profiles, vocab, {}, &sizes);
  write_file(output, blob);
  std::cout << output << ": " << profiles.size() << " profiles, " << blob.size() << " bytes ("
            << sizes.nodes / kRecordSize << " shared node records)\n";
  return kOk;
}

int cmd_unpack(const Config& cfg, const std::string& input, const std::string& output, bool scan) {
  const Vocabulary vocab = vocabulary(cfg);
  const Bytes blob = read_file(input);
  const auto result = unpack_bundle(blob, scan);
  std::cout << "bundle at offset " << result.offset << ": " << result.views.size() << " profiles\n";
  if (!output.empty()) fs::create_directories(output);
  for (const auto& v : result.views) {
    std::cout << "  " << v.name << "\n";
    if (!output.empty()) write_file(fs::path(output) / (v.name + ".sbbin"), extract_profile(v.profile, vocab));
  }
  return kOk;
}

int cmd_eval(const Config& cfg, const std::string& input, const std::string& select,
             const std::string& op, const std::string& ctx_file,
             const std::vector<std::string>& bindings, bool trace) {
  const Vocabulary vocab = vocabulary(cfg);
  QueryContext ctx;
  if (!ctx_file.empty()) {
    const Bytes data = read_file(ctx_file);
    ctx = parse_context(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
  }
  for (const auto& b : bindings) {
    auto more = parse_context(b);
    if (more.empty()) throw Error(ErrorKind::syntax, "expected key=value, got " + b);
    for (auto& [k, v] : more) ctx[k] = v;
  }
  Loaded loaded = load_policy(input, vocab, select);
  vocab.operations.lookup(op);
  if (trace && loaded.profile) {
    loaded.binary = decode_blob(compile_profile(*loaded.profile, vocab));
  }
  Decision d;
  if (loaded.binary) {
    std::vector<std::uint16_t> path;
    d = evaluate(*loaded.binary, op, ctx, vocab, trace ? &path : nullptr);
    if (trace) {
      std::cout << "trace:";
      for (auto unit : path) {
        const NodeRecord& r = loaded.binary->node_at(unit);
        std::cout << " 0x" << std::hex << std::size_t{unit} * kRecordSize << std::dec;
        if (r.is_terminal()) std::cout << "(" << to_string(r.decision()) << ")";
      }
      std::cout << "\n";
    }
  } else {
    d = evaluate_ast(*loaded.profile, op, ctx, vocab);
  }
  std::cout << to_string(d) << "\n";
  return d == Decision::allow ? 0 : 1;
}

int cmd_graph(const Config& cfg, const std::string& input, const std::string& select,
              const std::string& op, const std::string& output, bool normalized) {
  const Vocabulary vocab = vocabulary(cfg);
  Loaded loaded = load_policy(input, vocab, select);
  if (loaded.profile) loaded.binary = decode_blob(compile_profile(*loaded.profile, vocab));
  const BinaryProfile& bp = *loaded.binary;
  OpGraph g = build_graph(bp, vocab.operations.lookup(op), vocab);
  if (normalized) {
    const NodeRecord& root = bp.node_at(bp.op_pointers[0]);
    g = normalize_graph(std::move(g), root.decision());
  }
  std::string summary;
  const std::string dot = to_dot(g, vocab.filters, op, &summary);
  if (output.empty()) std::cout << dot;
  else write_file(output, dot);
  std::cerr << summary << "\n";
  return kOk;
}

Profile as_profile(const Loaded& l, const Vocabulary& vocab) {
  if (l.profile) return *l.profile;
  return emit_rules(*l.binary, vocab);
}

int cmd_diff(const Config& cfg, const std::string& a_path, const std::string& b_path) {
  const Vocabulary vocab = vocabulary(cfg);
  const Loaded a = load_policy(a_path, vocab, {});
  const Loaded b = load_policy(b_path, vocab, {});
  const Profile pa = as_profile(a, vocab), pb = as_profile(b, vocab);

  // Per-operation multiset difference of canonical rules.
  auto canonical = [](const std::vector<Rule>& rules) {
    std::vector<Rule> out;
    for (const Rule& r : rules)
      out.push_back({r.decision, r.filter ? std::optional(canonicalize(*r.filter)) : std::nullopt});
    return out;
  };
  for (const auto& op : vocab.operations.names()) {
    auto ia = pa.rules.find(op), ib = pb.rules.find(op);
    auto ra = ia == pa.rules.end() ? std::vector<Rule>{} : canonical(ia->second);
    auto rb = ib == pb.rules.end() ? std::vector<Rule>{} : canonical(ib->second);
    std::vector<bool> used(rb.size(), false);
    for (const Rule& r : ra) {
      bool found = false;
      for (std::size_t j = 0; j < rb.size() && !found; ++j)
        if (!used[j] && rb[j] == r) used[j] = found = true;
      if (!found) std::cout << "- " << op << ": " << rule_text(op, r, vocab.filters) << "\n";
    }
    for (std::size_t j = 0; j < rb.size(); ++j)
      if (!used[j]) std::cout << "+ " << op << ": " << rule_text(op, rb[j], vocab.filters) << "\n";
  }
  EquivalenceOptions eq;
  eq.seed = cfg.seed;
  const auto report = check_equivalence(a.source(), b.source(), vocab, eq);
  std::cerr << describe_report(report) << "\n";
  if (!report.equivalent) {
    std::cout << "differing operations:";
    for (const auto& op : report.disagreeing_ops) std::cout << " " << op;
    std::cout << "\n";
  }
  return report.equivalent ? kOk : kDifferent;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sandbox profile compiler and decompiler"};
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--vocab", cfg.vocab_path, "Vocabulary file (default: $SBX_VOCAB, then the bundled small vocabulary)");
  app.add_option("--implicit", cfg.implicit_path, "Implicit-rules file");
  app.add_option("--seed", cfg.seed, "Seed for sampled equivalence checks");

  std::string input, output, select, op, ctx_file;
  std::vector<std::string> inputs, bindings;
  bool no_dedupe = false, no_verify = false, permissive = false, scan = false, trace = false,
       normalized = false;

  auto* compile = app.add_subcommand("compile", "Compile SBPL to a separated blob");
  compile->add_option("input", input, "Profile (.sb)")->required();
  compile->add_option("-o,--output", output, "Output blob")->required();
  compile->add_flag("--no-dedupe", no_dedupe, "Do not share identical node records");

  auto* decomp = app.add_subcommand("decompile", "Decompile a blob or bundle to SBPL");
  decomp->add_option("input", input, "Blob (.sbbin or .sbbundle)")->required();
  decomp->add_option("-o,--output", output, "Output file, or directory for bundles");
  decomp->add_flag("--no-verify", no_verify, "Skip the recompile check");
  decomp->add_flag("--permissive", permissive, "Skip operations that fail to decompile");

  auto* pack = app.add_subcommand("pack", "Pack profiles into a bundle");
  pack->add_option("inputs", inputs, "Profiles (.sb); names come from the file stems")->required();
  pack->add_option("-o,--output", output, "Output bundle")->required();

  auto* unpack = app.add_subcommand("unpack", "List or extract the profiles of a bundle");
  unpack->add_option("input", input, "Bundle or container file")->required();
  unpack->add_option("-o,--output", output, "Directory for extracted separated blobs");
  unpack->add_flag("--scan", scan, "Search for the bundle header past leading data");

  auto* eval = app.add_subcommand("eval", "Decide one query; exit 0 allow, 1 deny, 2 error");
  eval->add_option("input", input, "Profile (.sb) or blob")->required();
  eval->add_option("bindings", bindings, "key=value context bindings");
  eval->add_option("--op", op, "Operation name")->required();
  eval->add_option("--ctx", ctx_file, "Context file with key=value lines");
  eval->add_option("--profile", select, "Profile name inside a bundle");
  eval->add_flag("--trace", trace, "Print the node offsets visited");

  auto* graph = app.add_subcommand("graph", "Emit one operation's graph in dot format");
  graph->add_option("input", input, "Profile (.sb) or blob")->required();
  graph->add_option("--op", op, "Operation name")->required();
  graph->add_option("-o,--output", output, "Output .dot file");
  graph->add_option("--profile", select, "Profile name inside a bundle");
  graph->add_flag("--normalized", normalized, "Apply require-not normalization first");

  auto* diff = app.add_subcommand("diff", "Compare two profiles; exit 0 when equivalent");
  diff->add_option("inputs", inputs, "Two profiles (.sb or blobs)")->required()->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kFailure;
  }

  try {
    if (*compile) return cmd_compile(cfg, input, output, no_dedupe);
    if (*decomp) return cmd_decompile(cfg, input, output, no_verify, permissive);
    if (*pack) return cmd_pack(cfg, inputs, output);
    if (*unpack) return cmd_unpack(cfg, input, output, scan);
    if (*eval) return cmd_eval(cfg, input, select, op, ctx_file, bindings, trace);
    if (*graph) return cmd_graph(cfg, input, select, op, output, normalized);
    if (*diff) return cmd_diff(cfg, inputs[0], inputs[1]);
  } catch (const std::exception& e) {
    std::cerr << "sbx: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
