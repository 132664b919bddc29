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

#include "sbx/nfa.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <utility>

#include "sbx/error.hpp"

namespace sbx {

bool NfaLabel::matches(std::uint8_t c) const noexcept {
  switch (kind) {
    case Kind::ch: return c == byte;
    case Kind::any_char: return true;
    case Kind::char_class: {
      bool in = std::any_of(ranges.begin(), ranges.end(), [c](const ByteRange& r) {
        return r.lo <= c && c <= r.hi;
      });
      return in != negated;
    }
    default: return false;
  }
}

Nfa::Nfa(std::size_t state_count, std::vector<NfaTransition> transitions,
         std::uint32_t start, std::vector<std::uint32_t> accepts)
    : state_count_(state_count),
      transitions_(std::move(transitions)),
      start_(start),
      accepts_(std::move(accepts)),
      accepting_(state_count, 0),
      out_(state_count) {
  if (state_count_ == 0 || start_ >= state_count_)
    throw Error(ErrorKind::malformed_regex_blob, "automaton start state out of range");
  std::sort(accepts_.begin(), accepts_.end());
  accepts_.erase(std::unique(accepts_.begin(), accepts_.end()), accepts_.end());
  if (accepts_.empty())
    throw Error(ErrorKind::malformed_regex_blob, "automaton has no accepting state");
  for (std::uint32_t a : accepts_) {
    if (a >= state_count_)
      throw Error(ErrorKind::malformed_regex_blob, "accepting state out of range");
    accepting_[a] = 1;
  }
  for (std::size_t i = 0; i < transitions_.size(); ++i) {
    const auto& t = transitions_[i];
    if (t.from >= state_count_ || t.to >= state_count_)
      throw Error(ErrorKind::malformed_regex_blob, "transition endpoint out of range");
    out_[t.from].push_back(static_cast<std::uint32_t>(i));
  }
}

// ---------------------------------------------------------------------------
// Thompson construction

namespace {

class ThompsonBuilder {
 public:
  struct Fragment {
    std::uint32_t in;
    std::uint32_t out;
  };

  Fragment build(const RegexAst& a) {
    using K = RegexAst::Kind;
    switch (a.kind()) {
      case K::empty: return edge(NfaLabel::epsilon());
      case K::ch: return edge(NfaLabel::ch(a.byte()));
      case K::any_char: return edge(NfaLabel::any_char());
      case K::char_class: return edge(NfaLabel::char_class(a.negated(), a.ranges()));
      case K::anchor_start: return edge(NfaLabel::anchor_start());
      case K::anchor_end: return edge(NfaLabel::anchor_end());
      case K::concat: {
        Fragment f = build(a.children().front());
        for (std::size_t i = 1; i < a.children().size(); ++i) {
          Fragment g = build(a.children()[i]);
          link(f.out, g.in);
          f.out = g.out;
        }
        return f;
      }
      case K::alternate: {
        Fragment f{fresh(), fresh()};
        for (const auto& c : a.children()) {
          Fragment g = build(c);
          link(f.in, g.in);
          link(g.out, f.out);
        }
        return f;
      }
      case K::star:
      case K::plus:
      case K::optional: {
        Fragment f{fresh(), fresh()};
        Fragment g = build(a.child());
        link(f.in, g.in);
        if (a.kind() != K::plus) link(f.in, f.out);
        if (a.kind() != K::optional) link(g.out, g.in);
        link(g.out, f.out);
        return f;
      }
    }
    return edge(NfaLabel::epsilon());
  }

  Nfa finish(Fragment f) {
    return Nfa(states_, std::move(transitions_), f.in, {f.out});
  }

 private:
  std::uint32_t fresh() { return static_cast<std::uint32_t>(states_++); }

  void link(std::uint32_t from, std::uint32_t to) {
    transitions_.push_back({from, NfaLabel::epsilon(), to});
  }

  Fragment edge(NfaLabel label) {
    Fragment f{fresh(), fresh()};
    transitions_.push_back({f.in, std::move(label), f.out});
    return f;
  }

  std::size_t states_ = 0;
  std::vector<NfaTransition> transitions_;
};

// Subset simulation shared by matching, enumeration and comparison.
class Runner {
 public:
  struct State {
    std::vector<std::uint32_t> set;
    bool sticky = false;  // search mode: some match already ended
    bool at_start = true;

    bool operator<(const State& o) const {
      return std::tie(set, sticky) < std::tie(o.set, o.sticky);
    }
  };

  Runner(const Nfa& nfa, MatchMode mode)
      : nfa_(nfa), mode_(mode), mark_(nfa.state_count(), 0) {}

  State initial() {
    State s;
    s.set = closure({nfa_.start()}, true, false);
    s.sticky = mode_ == MatchMode::search && any_accept(s.set);
    return s;
  }

  bool accepting_here(const State& s) {
    if (s.sticky) return true;
    return any_accept(closure(s.set, s.at_start, true));
  }

  State advance(const State& s, std::uint8_t c) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t q : s.set)
      for (std::uint32_t ti : nfa_.outgoing(q)) {
        const auto& t = nfa_.transitions()[ti];
        if (t.label.consumes() && t.label.matches(c)) next.push_back(t.to);
      }
    if (mode_ == MatchMode::search) next.push_back(nfa_.start());
    State out;
    out.at_start = false;
    out.set = closure(std::move(next), false, false);
    out.sticky = s.sticky || (mode_ == MatchMode::search && any_accept(out.set));
    return out;
  }

  bool dead(const State& s) const {
    return mode_ == MatchMode::full && s.set.empty();
  }

 private:
  std::vector<std::uint32_t> closure(std::vector<std::uint32_t> seed, bool at_start,
                                     bool at_end) {
    ++epoch_;
    if (epoch_ == 0) {
      std::fill(mark_.begin(), mark_.end(), 0);
      epoch_ = 1;
    }
    std::vector<std::uint32_t> out;
    std::vector<std::uint32_t> stack;
    for (std::uint32_t s : seed)
      if (mark_[s] != epoch_) {
        mark_[s] = epoch_;
        stack.push_back(s);
      }
    while (!stack.empty()) {
      std::uint32_t s = stack.back();
      stack.pop_back();
      out.push_back(s);
      for (std::uint32_t ti : nfa_.outgoing(s)) {
        const auto& t = nfa_.transitions()[ti];
        bool follow = t.label.kind == NfaLabel::Kind::epsilon ||
                      (at_start && t.label.kind == NfaLabel::Kind::anchor_start) ||
                      (at_end && t.label.kind == NfaLabel::Kind::anchor_end);
        if (follow && mark_[t.to] != epoch_) {
          mark_[t.to] = epoch_;
          stack.push_back(t.to);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool any_accept(const std::vector<std::uint32_t>& set) const {
    return std::any_of(set.begin(), set.end(),
                       [&](std::uint32_t s) { return nfa_.is_accept(s); });
  }

  const Nfa& nfa_;
  MatchMode mode_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t epoch_ = 0;
};

}  // namespace

Nfa build_nfa(const RegexAst& ast) {
  ThompsonBuilder b;
  auto f = b.build(ast);
  return b.finish(f);
}

bool nfa_match(const Nfa& nfa, std::string_view s, MatchMode mode) {
  Runner r(nfa, mode);
  Runner::State st = r.initial();
  for (char c : s) {
    if (st.sticky) return true;
    st = r.advance(st, static_cast<std::uint8_t>(c));
    if (r.dead(st)) return false;
  }
  return r.accepting_here(st);
}

std::set<std::string> enumerate_language(const Nfa& nfa,
                                         std::span<const std::uint8_t> alphabet,
                                         std::size_t max_len, MatchMode mode) {
  std::set<std::string> out;
  std::string buf;
  auto rec = [&](auto& self) -> void {
    if (nfa_match(nfa, buf, mode)) out.insert(buf);
    if (buf.size() == max_len) return;
    for (std::uint8_t c : alphabet) {
      buf.push_back(static_cast<char>(c));
      self(self);
      buf.pop_back();
    }
  };
  rec(rec);
  return out;
}

std::optional<std::string> bounded_language_difference(
    const Nfa& a, const Nfa& b, std::span<const std::uint8_t> alphabet,
    std::size_t max_len, MatchMode mode) {
  Runner ra(a, mode), rb(b, mode);
  struct Item {
    Runner::State sa, sb;
    std::string text;
  };
  std::set<std::pair<Runner::State, Runner::State>> seen;
  std::vector<Item> level{{ra.initial(), rb.initial(), {}}};
  for (std::size_t len = 0;; ++len) {
    std::vector<Item> next;
    for (Item& it : level) {
      if (ra.accepting_here(it.sa) != rb.accepting_here(it.sb)) return it.text;
      if (len == max_len) continue;
      for (std::uint8_t c : alphabet) {
        Item n{ra.advance(it.sa, c), rb.advance(it.sb, c), it.text + static_cast<char>(c)};
        if (ra.dead(n.sa) && rb.dead(n.sb)) continue;
        if (seen.emplace(n.sa, n.sb).second) next.push_back(std::move(n));
      }
    }
    if (next.empty()) return std::nullopt;
    level = std::move(next);
  }
}

namespace {

std::vector<std::uint8_t> representative_bytes(const Nfa& nfa) {
  std::vector<std::uint8_t> out;
  auto add = [&](std::uint8_t c) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  for (const auto& t : nfa.transitions()) {
    switch (t.label.kind) {
      case NfaLabel::Kind::ch: add(t.label.byte); break;
      case NfaLabel::Kind::any_char: add('x'); break;
      case NfaLabel::Kind::char_class:
        for (int c = 0x21; c < 0x7f; ++c)
          if (t.label.matches(static_cast<std::uint8_t>(c))) {
            add(static_cast<std::uint8_t>(c));
            break;
          }
        break;
      default: break;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> sample_accepted(const Nfa& nfa, std::size_t limit,
                                         std::size_t max_len) {
  std::vector<std::string> out;
  if (limit == 0) return out;
  const auto alphabet = representative_bytes(nfa);
  Runner r(nfa, MatchMode::full);
  std::set<Runner::State> seen;
  std::deque<std::pair<Runner::State, std::string>> queue;
  queue.emplace_back(r.initial(), std::string{});
  while (!queue.empty() && out.size() < limit) {
    auto [st, text] = std::move(queue.front());
    queue.pop_front();
    if (r.accepting_here(st)) out.push_back(text);
    if (text.size() == max_len) continue;
    for (std::uint8_t c : alphabet) {
      auto n = r.advance(st, c);
      if (r.dead(n) || !seen.insert(n).second) continue;
      queue.emplace_back(std::move(n), text + static_cast<char>(c));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary program

namespace {

struct ProgramRecord {
  std::uint8_t tag = 0;
  std::uint16_t operand = 0;
  std::vector<ByteRange> ranges;  // class records only
  // Symbolic jump target, resolved after layout: a block (state) or an
  // alternative header inside a block.
  enum class Target { none, block, local } target_kind = Target::none;
  std::uint32_t target = 0;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::vector<std::uint8_t> encode_records(const std::vector<ProgramRecord>& recs) {
  if (recs.size() > 0xffff)
    throw Error(ErrorKind::too_many_states,
                std::to_string(recs.size()) + " records exceed the 16-bit index space");
  std::vector<std::uint8_t> out;
  put_u16(out, static_cast<std::uint16_t>(recs.size()));
  for (const auto& r : recs) {
    out.push_back(r.tag);
    put_u16(out, r.operand);
    if (r.tag == regex_op::kClass) {
      out.push_back(static_cast<std::uint8_t>(r.ranges.size()));
      for (const auto& rg : r.ranges) {
        out.push_back(rg.lo);
        out.push_back(rg.hi);
      }
    }
  }
  return out;
}

ProgramRecord label_record(const NfaLabel& l) {
  ProgramRecord r;
  switch (l.kind) {
    case NfaLabel::Kind::ch: r.tag = regex_op::kChar; r.operand = l.byte; break;
    case NfaLabel::Kind::any_char: r.tag = regex_op::kAny; break;
    case NfaLabel::Kind::char_class:
      r.tag = regex_op::kClass;
      r.operand = l.negated ? 1 : 0;
      r.ranges = l.ranges;
      break;
    case NfaLabel::Kind::anchor_start: r.tag = regex_op::kLineStart; break;
    case NfaLabel::Kind::anchor_end: r.tag = regex_op::kLineEnd; break;
    case NfaLabel::Kind::epsilon: break;
  }
  return r;
}

}  // namespace

std::vector<std::uint8_t> serialize_nfa(const Nfa& nfa) {
  const std::size_t n = nfa.state_count();
  // Keep only states on some start->accept path.
  std::vector<std::vector<std::uint32_t>> rev(n);
  for (const auto& t : nfa.transitions()) rev[t.to].push_back(t.from);
  std::vector<char> coreach(n, 0);
  std::vector<std::uint32_t> stack(nfa.accepts().begin(), nfa.accepts().end());
  for (auto a : stack) coreach[a] = 1;
  while (!stack.empty()) {
    auto s = stack.back();
    stack.pop_back();
    for (auto p : rev[s])
      if (!coreach[p]) {
        coreach[p] = 1;
        stack.push_back(p);
      }
  }
  if (!coreach[nfa.start()]) {
    ProgramRecord never;
    never.tag = regex_op::kClass;
    ProgramRecord accept;
    accept.tag = regex_op::kAccept;
    return encode_records({never, accept});
  }

  // Alternatives per state: outgoing useful edges, then acceptance.
  struct Alt {
    const NfaTransition* edge = nullptr;  // null = accept
  };
  std::vector<std::vector<Alt>> alts(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!coreach[s]) continue;
    for (auto ti : nfa.outgoing(s)) {
      const auto& t = nfa.transitions()[ti];
      if (!coreach[t.to]) continue;
      if (t.to == s && t.label.kind == NfaLabel::Kind::epsilon) continue;
      alts[s].push_back({&t});
    }
    if (nfa.is_accept(s)) alts[s].push_back({nullptr});
  }

  // Block order: depth-first from the start, placing the target of a
  // state's last alternative immediately after it where possible.
  std::vector<std::uint32_t> order;
  std::vector<char> placed(n, 0);
  std::vector<std::uint32_t> pending{nfa.start()};
  while (!pending.empty()) {
    std::uint32_t s = pending.back();
    pending.pop_back();
    while (!placed[s]) {
      placed[s] = 1;
      order.push_back(s);
      for (auto it = alts[s].rbegin(); it != alts[s].rend(); ++it)
        if (it->edge && !placed[it->edge->to]) pending.push_back(it->edge->to);
      const auto& last = alts[s].back();
      if (!last.edge || placed[last.edge->to]) break;
      s = last.edge->to;
    }
  }

  // Emit records with symbolic targets.
  std::vector<ProgramRecord> recs;
  std::vector<std::uint32_t> block_start(n, 0);
  std::vector<std::uint32_t> local_targets;  // patched alternative headers
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::uint32_t s = order[oi];
    const std::uint32_t next_block = oi + 1 < order.size() ? order[oi + 1] : UINT32_MAX;
    block_start[s] = static_cast<std::uint32_t>(recs.size());
    const auto& as = alts[s];
    for (std::size_t ai = 0; ai < as.size(); ++ai) {
      const bool last = ai + 1 == as.size();
      std::size_t fork_at = SIZE_MAX;
      if (!last) {
        ProgramRecord fork;
        fork.tag = regex_op::kJumpForward | regex_op::kFork;
        fork.target_kind = ProgramRecord::Target::local;
        fork_at = recs.size();
        recs.push_back(fork);
      }
      if (!as[ai].edge) {
        ProgramRecord acc;
        acc.tag = regex_op::kAccept;
        recs.push_back(acc);
      } else {
        const NfaTransition& t = *as[ai].edge;
        if (t.label.kind != NfaLabel::Kind::epsilon) recs.push_back(label_record(t.label));
        if (!(last && t.to == next_block)) {
          ProgramRecord jump;
          jump.target_kind = ProgramRecord::Target::block;
          jump.target = t.to;
          recs.push_back(jump);
        }
      }
      if (fork_at != SIZE_MAX) recs[fork_at].target = static_cast<std::uint32_t>(recs.size());
    }
  }
  const auto end_index = static_cast<std::uint32_t>(recs.size());
  for (std::uint32_t i = 0; i < recs.size(); ++i) {
    auto& r = recs[i];
    if (r.target_kind == ProgramRecord::Target::none) continue;
    std::uint32_t target =
        r.target_kind == ProgramRecord::Target::block ? block_start[r.target] : r.target;
    // An empty trailing block resolves past the end; it cannot be a target
    // because every useful state emits at least one record or falls through.
    if (target >= end_index)
      throw Error(ErrorKind::too_many_states, "jump target past program end");
    if (r.target_kind == ProgramRecord::Target::block)
      r.tag = target > i ? regex_op::kJumpForward : regex_op::kJumpBackward;
    r.operand = static_cast<std::uint16_t>(target);
    if (target > 0xffff)
      throw Error(ErrorKind::too_many_states, "jump target exceeds 16 bits");
  }
  return encode_records(recs);
}

Nfa deserialize_nfa(std::span<const std::uint8_t> bytes) {
  auto fail = [](std::size_t at, const std::string& why) -> void {
    throw DecodeError(ErrorKind::malformed_regex_blob, at, why);
  };
  if (bytes.size() < 2) fail(0, "truncated header");
  const std::size_t count = bytes[0] | (bytes[1] << 8);
  if (count == 0) fail(0, "empty program");
  std::size_t pos = 2;
  std::vector<NfaTransition> trans;
  std::vector<std::uint32_t> accepts;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = pos;
    if (pos + 3 > bytes.size()) fail(at, "truncated record " + std::to_string(i));
    const std::uint8_t tag = bytes[pos];
    const std::uint16_t operand = static_cast<std::uint16_t>(bytes[pos + 1] | (bytes[pos + 2] << 8));
    pos += 3;
    auto need_next = [&]() {
      if (i + 1 >= count) fail(at, "record " + std::to_string(i) + " falls off the program end");
    };
    auto no_operand = [&]() {
      if (operand != 0) fail(at, "unexpected operand");
    };
    const std::uint8_t base = tag & static_cast<std::uint8_t>(~regex_op::kFork);
    const bool fork = (tag & regex_op::kFork) != 0;
    if (fork && base != regex_op::kJumpForward && base != regex_op::kJumpBackward)
      fail(at, "fork flag on a non-jump record");
    switch (base) {
      case regex_op::kChar:
        if (operand > 0xff) fail(at, "character operand exceeds a byte");
        need_next();
        trans.push_back({i, NfaLabel::ch(static_cast<std::uint8_t>(operand)), i + 1});
        break;
      case regex_op::kAny:
        no_operand();
        need_next();
        trans.push_back({i, NfaLabel::any_char(), i + 1});
        break;
      case regex_op::kClass: {
        if (operand > 1) fail(at, "bad class polarity");
        if (pos >= bytes.size()) fail(at, "truncated class");
        const std::size_t nr = bytes[pos++];
        if (pos + 2 * nr > bytes.size()) fail(at, "truncated class ranges");
        std::vector<ByteRange> ranges;
        for (std::size_t k = 0; k < nr; ++k) {
          ByteRange r{bytes[pos], bytes[pos + 1]};
          pos += 2;
          if (r.lo > r.hi) fail(at, "reversed class range");
          ranges.push_back(r);
        }
        need_next();
        trans.push_back({i, NfaLabel::char_class(operand == 1, std::move(ranges)), i + 1});
        break;
      }
      case regex_op::kLineStart:
        no_operand();
        need_next();
        trans.push_back({i, NfaLabel::anchor_start(), i + 1});
        break;
      case regex_op::kLineEnd:
        no_operand();
        need_next();
        trans.push_back({i, NfaLabel::anchor_end(), i + 1});
        break;
      case regex_op::kJumpForward:
      case regex_op::kJumpBackward: {
        const bool forward = base == regex_op::kJumpForward;
        if (operand >= count) fail(at, "jump target out of range");
        if (forward ? operand <= i : operand >= i)
          fail(at, std::string(forward ? "forward" : "backward") +
                       " jump violates index ordering");
        trans.push_back({i, NfaLabel::epsilon(), operand});
        if (fork) {
          need_next();
          trans.push_back({i, NfaLabel::epsilon(), i + 1});
        }
        break;
      }
      case regex_op::kAccept:
        no_operand();
        accepts.push_back(i);
        break;
      default:
        fail(at, "unknown record tag " + std::to_string(tag));
    }
  }
  if (pos != bytes.size()) fail(pos, "trailing bytes after program");
  if (accepts.empty()) fail(2, "program has no accept record");
  return Nfa(count, std::move(trans), 0, std::move(accepts));
}

// ---------------------------------------------------------------------------
// State removal

namespace {

RegexAst label_regex(const NfaLabel& l) {
  switch (l.kind) {
    case NfaLabel::Kind::epsilon: return RegexAst::empty();
    case NfaLabel::Kind::ch: return RegexAst::ch(l.byte);
    case NfaLabel::Kind::any_char: return RegexAst::any_char();
    case NfaLabel::Kind::char_class:
      if (l.ranges.empty()) return l.negated ? RegexAst::any_char() : RegexAst::nothing();
      return RegexAst::char_class(l.negated, l.ranges);
    case NfaLabel::Kind::anchor_start: return RegexAst::anchor_start();
    case NfaLabel::Kind::anchor_end: return RegexAst::anchor_end();
  }
  return RegexAst::empty();
}

}  // namespace

RegexAst nfa_to_regex(const Nfa& nfa, EliminationStats* stats,
                      std::size_t max_fragment_size) {
  const auto n = static_cast<std::uint32_t>(nfa.state_count());
  const std::uint32_t start = n, accept = n + 1;
  std::vector<std::map<std::uint32_t, RegexAst>> out(n + 2);
  std::vector<std::set<std::uint32_t>> in(n + 2);

  auto add = [&](std::uint32_t p, std::uint32_t q, RegexAst r) {
    auto it = out[p].find(q);
    if (it == out[p].end()) {
      out[p].emplace(q, std::move(r));
      in[q].insert(p);
    } else {
      it->second = rx::alt({it->second, std::move(r)});
    }
    if (out[p].at(q).size() > max_fragment_size)
      throw Error(ErrorKind::regex_too_complex,
                  "state removal produced a fragment over " +
                      std::to_string(max_fragment_size) + " nodes");
  };

  add(start, nfa.start(), RegexAst::empty());
  for (auto a : nfa.accepts()) add(a, accept, RegexAst::empty());
  for (const auto& t : nfa.transitions()) add(t.from, t.to, label_regex(t.label));

  std::size_t steps = 0;
  for (std::uint32_t k = 0; k < n; ++k) {
    std::optional<RegexAst> loop;
    if (auto it = out[k].find(k); it != out[k].end()) loop = rx::star(it->second);
    std::vector<std::pair<std::uint32_t, RegexAst>> succs;
    for (const auto& [q, r] : out[k])
      if (q != k) succs.emplace_back(q, r);
    std::vector<std::uint32_t> preds;
    for (auto p : in[k])
      if (p != k) preds.push_back(p);

    for (auto p : preds) {
      RegexAst into = out[p].at(k);
      for (const auto& [q, r] : succs) {
        std::vector<RegexAst> parts{into};
        if (loop) parts.push_back(*loop);
        parts.push_back(r);
        add(p, q, rx::seq(std::move(parts)));
      }
    }
    for (auto p : preds) out[p].erase(k);
    for (const auto& [q, r] : succs) in[q].erase(k);
    out[k].clear();
    in[k].clear();
    ++steps;
  }
  if (stats) stats->steps = steps;
  auto it = out[start].find(accept);
  return it == out[start].end() ? RegexAst::nothing() : it->second;
}

}  // namespace sbx
