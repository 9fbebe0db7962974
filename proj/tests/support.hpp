#pragma once

// Shared test helpers: fixture access, structural comparison up to edge
// renaming, random model generators and brute-force oracles.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chorconf/chorconf.hpp"

namespace chorconf {
inline void PrintTo(const Label& l, std::ostream* os) { *os << l.str(); }
}  // namespace chorconf

namespace testing_support {

using namespace chorconf;

inline std::string model_path(const std::string& rel) { return std::string(CHORCONF_MODELS_DIR) + "/" + rel; }

inline std::string read_model(const std::string& rel) {
  std::ifstream f(model_path(rel), std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline Choreography choreo(const std::string& rel) { return parse_choreography(read_model(rel)); }
inline Collaboration collab(const std::string& rel) { return parse_collaboration(read_model(rel)); }
inline Process process(const std::string& rel) { return parse_process(read_model(rel)); }

inline std::vector<ParticipantName> names(std::initializer_list<const char*> ns) {
  std::vector<ParticipantName> out;
  for (auto* n : ns) out.emplace_back(n);
  return out;
}

inline Label comm(const char* p, const char* q, const char* m) {
  return Label::comm({ParticipantName(p), ParticipantName(q), MessageName(m)});
}

// ---------------------------------------------------------------------------
// Edge renaming: every edge is renamed after the positions of the nodes that
// produce and consume it, so two models with the same node sequence compare
// equal regardless of edge names.

template <class Node>
std::map<EdgeId, EdgeId> canonical_names(const std::vector<const Node*>& nodes) {
  std::map<EdgeId, std::string> src, dst;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (auto& e : output_edges(*nodes[i])) src[e] = std::to_string(i);
    for (auto& e : input_edges(*nodes[i])) dst[e] = std::to_string(i);
  }
  std::map<EdgeId, EdgeId> out;
  for (auto& [e, s] : src) out.emplace(e, EdgeId("s" + s + "_t" + (dst.contains(e) ? dst[e] : "x")));
  for (auto& [e, d] : dst)
    if (!out.contains(e)) out.emplace(e, EdgeId("sx_t" + d));
  return out;
}

template <class Node>
Node rename_node(const Node& n, const std::map<EdgeId, EdgeId>& r) {
  auto one = [&](const EdgeId& e) { return r.at(e); };
  auto set = [&](const EdgeSet& es) {
    EdgeSet out;
    for (auto& e : es) out.push_back(one(e));
    std::sort(out.begin(), out.end());
    return out;
  };
  return std::visit(
      [&](const auto& x) -> Node {
        using T = std::decay_t<decltype(x)>;
        T y = x;
        if constexpr (std::is_same_v<T, node::Start>) {
          y.out = one(x.out);
        } else if constexpr (std::is_same_v<T, node::End>) {
          y.in = one(x.in);
          y.completed = one(x.completed);
        } else if constexpr (std::is_same_v<T, node::AndSplit> || std::is_same_v<T, node::XorSplit>) {
          y.in = one(x.in);
          y.outs = set(x.outs);
        } else if constexpr (std::is_same_v<T, node::AndJoin> || std::is_same_v<T, node::XorJoin>) {
          y.ins = set(x.ins);
          y.out = one(x.out);
        } else if constexpr (requires { x.branches; }) {
          y.in = one(x.in);
          for (auto& b : y.branches) b.out = one(b.out);
          std::sort(y.branches.begin(), y.branches.end());
        } else {
          y.in = one(x.in);
          y.out = one(x.out);
        }
        return y;
      },
      n);
}

inline Choreography canonical_edges(const Choreography& ch) {
  std::vector<const ChoreographyNode*> ns;
  for (auto& n : ch.nodes) ns.push_back(&n);
  auto r = canonical_names(ns);
  Choreography out;
  for (auto& n : ch.nodes) out.nodes.push_back(rename_node(n, r));
  return out;
}

inline Process canonical_edges(const Process& p) {
  std::vector<const ProcessNode*> ns;
  for (auto& n : p.nodes) ns.push_back(&n);
  auto r = canonical_names(ns);
  Process out;
  for (auto& n : p.nodes) out.nodes.push_back(rename_node(n, r));
  return out;
}

inline Collaboration canonical_edges(const Collaboration& c) {
  std::vector<const CollaborationNode*> ns;
  for (auto& pool : c.pools)
    for (auto& n : pool.nodes) ns.push_back(&n);
  auto r = canonical_names(ns);
  Collaboration out;
  for (auto& pool : c.pools) {
    Pool p{pool.participant, {}};
    for (auto& n : pool.nodes) p.nodes.push_back(rename_node(n, r));
    out.pools.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Independent LTS oracles. These deliberately avoid saturate() and work from
// the strong transition relation.

struct Oracle {
  const Lts& lts;
  std::vector<std::vector<std::pair<Label, std::size_t>>> succ;

  explicit Oracle(const Lts& l) : lts(l), succ(l.state_count) {
    for (auto& t : l.transitions) succ[t.from].emplace_back(t.label, t.to);
  }

  std::set<std::size_t> tau_closure(std::set<std::size_t> s) const {
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t u : std::set<std::size_t>(s))
        for (auto& [l, v] : succ[u])
          if (l.is_tau() && s.insert(v).second) grew = true;
    }
    return s;
  }

  // States reachable from `from` by tau* l tau* (tau*: l is tau).
  std::set<std::size_t> weak(const std::set<std::size_t>& from, const Label& l) const {
    auto pre = tau_closure(from);
    if (l.is_tau()) return pre;
    std::set<std::size_t> mid;
    for (std::size_t u : pre)
      for (auto& [a, v] : succ[u])
        if (a == l) mid.insert(v);
    return tau_closure(mid);
  }

  std::set<std::size_t> after_trace(const std::vector<Label>& trace) const {
    std::set<std::size_t> cur = tau_closure({lts.initial});
    for (auto& l : trace) cur = weak(cur, l);
    return cur;
  }

  bool admits(const std::vector<Label>& trace) const { return !after_trace(trace).empty(); }
};

/// Visible traces of length <= depth, by breadth-first enumeration.
inline std::set<std::vector<Label>> traces_up_to(const Lts& lts, std::size_t depth, const LabelSet& alphabet) {
  Oracle o(lts);
  std::set<std::vector<Label>> out;
  std::map<std::vector<Label>, std::set<std::size_t>> layer{{{}, o.tau_closure({lts.initial})}};
  out.insert({});
  for (std::size_t k = 0; k < depth && !layer.empty(); ++k) {
    std::map<std::vector<Label>, std::set<std::size_t>> next;
    for (auto& [tr, states] : layer)
      for (auto& l : alphabet) {
        auto s = o.weak(states, l);
        if (s.empty()) continue;
        auto t = tr;
        t.push_back(l);
        out.insert(t);
        next.emplace(std::move(t), std::move(s));
      }
    layer = std::move(next);
  }
  return out;
}

/// Number of reachable pairs of determinized states, computed without the
/// library's checker. Bounds the length of a shortest distinguishing trace.
inline std::size_t determinized_product_size(const Lts& a, const Lts& b, const LabelSet& alphabet) {
  Oracle oa(a), ob(b);
  std::set<std::pair<std::set<std::size_t>, std::set<std::size_t>>> seen;
  std::vector<std::pair<std::set<std::size_t>, std::set<std::size_t>>> todo{
      {oa.tau_closure({a.initial}), ob.tau_closure({b.initial})}};
  seen.insert(todo.front());
  while (!todo.empty()) {
    auto [x, y] = todo.back();
    todo.pop_back();
    for (auto& l : alphabet) {
      auto nx = oa.weak(x, l), ny = ob.weak(y, l);
      if (nx.empty() || ny.empty()) continue;
      if (seen.emplace(nx, ny).second) todo.push_back({nx, ny});
    }
  }
  return seen.size();
}

/// Weak bisimilarity by the textbook greatest fixpoint: strong moves on one
/// side answered by weak moves on the other.
inline bool naive_weak_bisimilar(const Lts& a, const Lts& b) {
  Oracle oa(a), ob(b);
  const std::size_t n = a.state_count, m = b.state_count;
  std::vector<std::vector<bool>> rel(n, std::vector<bool>(m, true));
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < m; ++q) {
        if (!rel[p][q]) continue;
        bool ok = true;
        for (auto& [l, p2] : oa.succ[p]) {
          bool matched = false;
          for (std::size_t q2 : ob.weak({q}, l)) matched = matched || rel[p2][q2];
          ok = ok && matched;
        }
        for (auto& [l, q2] : ob.succ[q]) {
          bool matched = false;
          for (std::size_t p2 : oa.weak({p}, l)) matched = matched || rel[p2][q2];
          ok = ok && matched;
        }
        if (!ok) {
          rel[p][q] = false;
          changed = true;
        }
      }
  }
  return rel[a.initial][b.initial];
}

/// Mechanical replay of a counterexample against the two (already hidden)
/// LTSs. Returns an empty string when the counterexample is valid.
inline std::string replay(const Counterexample& cx, const Lts& choreo, const Lts& collab) {
  Oracle oc(choreo), ol(collab);
  if (auto* t = std::get_if<DistinguishingTrace>(&cx)) {
    if (t->trace.empty()) return "empty trace";
    for (auto& l : t->trace)
      if (l.is_tau()) return "tau in trace";
    bool in_c = oc.admits(t->trace), in_l = ol.admits(t->trace);
    bool claimed_c = t->side == Side::choreography;
    if (claimed_c && !(in_c && !in_l)) return "trace not admitted by choreography alone";
    if (!claimed_c && !(in_l && !in_c)) return "trace not admitted by collaboration alone";
    return "";
  }
  const auto& p = std::get<NonSimulablePair>(cx);
  std::size_t c = choreo.initial, l = collab.initial;
  for (auto& g : p.path) {
    if (!oc.weak({c}, g.label).contains(g.choreo_state)) return "choreography cannot make game step";
    if (!ol.weak({l}, g.label).contains(g.collab_state)) return "collaboration cannot make game step";
    c = g.choreo_state;
    l = g.collab_state;
  }
  if (c != p.choreo_state || l != p.collab_state) return "final states do not match path";
  if (p.label.is_tau()) return "offending label is tau";
  bool c_can = !oc.weak({c}, p.label).empty(), l_can = !ol.weak({l}, p.label).empty();
  if (p.side == Side::choreography && !(c_can && !l_can)) return "choreography move is matched";
  if (p.side == Side::collaboration && !(l_can && !c_can)) return "collaboration move is matched";
  return "";
}

// ---------------------------------------------------------------------------
// Random generators

inline Lts random_lts(std::mt19937& rng, std::size_t max_states, const std::vector<Label>& alphabet,
                      double density = 0.25) {
  std::uniform_int_distribution<std::size_t> size(1, max_states);
  Lts lts;
  lts.state_count = size(rng);
  std::bernoulli_distribution edge(density);
  for (std::size_t s = 0; s < lts.state_count; ++s)
    for (std::size_t t = 0; t < lts.state_count; ++t)
      for (auto& l : alphabet)
        if (edge(rng)) lts.transitions.push_back({s, l, t});
  lts.normalize();
  return lts;
}

inline std::vector<Label> small_alphabet(std::size_t visible) {
  std::vector<Label> out{Label::tau()};
  const char* ms[] = {"a", "b", "c", "d"};
  for (std::size_t i = 0; i < visible; ++i) out.push_back(comm("P", "Q", ms[i]));
  return out;
}

/// One communication action of a participant in a generated scenario.
struct Action {
  bool send;
  MessageEdge msg;
};

/// Builds structured (block-nested) flows from a list of actions. Each action
/// appears exactly once, so message names never clash.
class FlowBuilder {
 public:
  FlowBuilder(std::mt19937& rng, std::string prefix) : rng_(rng), prefix_(std::move(prefix)) {}

  EdgeId fresh() { return EdgeId(prefix_ + std::to_string(next_++)); }

  // Emits nodes for `acts` between `in` and a fresh out edge, which is returned.
  template <class Emit>
  EdgeId block(std::vector<Action> acts, EdgeId in, Emit&& emit, std::size_t depth = 0) {
    if (acts.empty()) {
      EdgeId out = fresh();
      emit.task(in, out);
      return out;
    }
    if (acts.size() == 1) {
      EdgeId out = fresh();
      emit.action(acts[0], in, out, rng_);
      return out;
    }
    std::uniform_int_distribution<int> pick(0, depth > 2 ? 0 : 3);
    std::size_t cut = std::uniform_int_distribution<std::size_t>(1, acts.size() - 1)(rng_);
    std::vector<Action> left(acts.begin(), acts.begin() + cut), right(acts.begin() + cut, acts.end());
    switch (pick(rng_)) {
      case 1: {  // parallel
        EdgeId l = fresh(), r = fresh();
        emit.node(node::and_split(in, {l, r}));
        EdgeId lo = block(left, l, emit, depth + 1), ro = block(right, r, emit, depth + 1);
        EdgeId out = fresh();
        emit.node(node::and_join({lo, ro}, out));
        return out;
      }
      case 2: {  // exclusive choice
        EdgeId l = fresh(), r = fresh();
        emit.node(node::xor_split(in, {l, r}));
        EdgeId lo = block(left, l, emit, depth + 1), ro = block(right, r, emit, depth + 1);
        EdgeId out = fresh();
        emit.node(node::xor_join({lo, ro}, out));
        return out;
      }
      case 3:
        if (emit.can_race(left.front(), right.front())) {  // event-based race on the two heads
          EdgeId l = fresh(), r = fresh();
          emit.race(in, left.front(), l, right.front(), r);
          left.erase(left.begin());
          right.erase(right.begin());
          EdgeId lo = left.empty() ? l : block(left, l, emit, depth + 1);
          EdgeId ro = right.empty() ? r : block(right, r, emit, depth + 1);
          EdgeId out = fresh();
          emit.node(node::xor_join({lo, ro}, out));
          return out;
        }
        [[fallthrough]];
      default: {  // sequence
        EdgeId mid = block(left, in, emit, depth + 1);
        return block(right, mid, emit, depth + 1);
      }
    }
  }

 private:
  std::mt19937& rng_;
  std::string prefix_;
  std::size_t next_ = 1;
};

struct ProcessEmitter {
  Process& p;
  void task(EdgeId in, EdgeId out) { p.nodes.push_back(node::Task{in, out}); }
  template <class N>
  void node(N n) {
    p.nodes.push_back(std::move(n));
  }
  void action(const Action& a, EdgeId in, EdgeId out, std::mt19937& rng) {
    bool inter = std::bernoulli_distribution(0.3)(rng);
    const MessageName& m = a.msg.message;
    if (a.send)
      p.nodes.push_back(inter ? ProcessNode{node::InterSnd<MessageName>{in, out, m}}
                              : ProcessNode{node::TaskSnd<MessageName>{in, out, m}});
    else
      p.nodes.push_back(inter ? ProcessNode{node::InterRcv<MessageName>{in, out, m}}
                              : ProcessNode{node::TaskRcv<MessageName>{in, out, m}});
  }
  bool can_race(const Action& a, const Action& b) const { return !a.send && !b.send; }
  void race(EdgeId in, const Action& a, EdgeId ao, const Action& b, EdgeId bo) {
    p.nodes.push_back(node::event_based<MessageName>(in, {{a.msg.message, ao}, {b.msg.message, bo}}));
  }
};

struct ChoreoEmitter {
  Choreography& ch;
  void task(EdgeId in, EdgeId out) {
    // Choreographies have no silent task; use a degenerate exclusive pair.
    EdgeId a(in.str() + "x"), b(in.str() + "y");
    ch.nodes.push_back(node::xor_split(in, {a, b}));
    ch.nodes.push_back(node::xor_join({a, b}, out));
  }
  template <class N>
  void node(N n) {
    ch.nodes.push_back(std::move(n));
  }
  void action(const Action& a, EdgeId in, EdgeId out, std::mt19937&) {
    ch.nodes.push_back(node::Interaction{in, out, a.msg});
  }
  bool can_race(const Action&, const Action&) const { return true; }
  void race(EdgeId in, const Action& a, EdgeId ao, const Action& b, EdgeId bo) {
    ch.nodes.push_back(node::event_based<MessageEdge>(in, {{a.msg, ao}, {b.msg, bo}}));
  }
};

/// A random scenario: participants and the messages they exchange.
struct Scenario {
  std::vector<ParticipantName> participants;
  std::vector<MessageEdge> messages;
};

inline Scenario random_scenario(std::mt19937& rng, std::size_t max_participants, std::size_t max_messages) {
  Scenario s;
  std::size_t np = std::uniform_int_distribution<std::size_t>(2, max_participants)(rng);
  for (std::size_t i = 0; i < np; ++i) s.participants.emplace_back("p" + std::to_string(i));
  std::size_t nm = std::uniform_int_distribution<std::size_t>(1, max_messages)(rng);
  std::uniform_int_distribution<std::size_t> who(0, np - 1);
  for (std::size_t i = 0; i < nm; ++i) {
    std::size_t a = who(rng), b = who(rng);
    while (b == a) b = who(rng);
    s.messages.push_back({s.participants[a], s.participants[b], MessageName("m" + std::to_string(i))});
  }
  return s;
}

/// One process per participant holding exactly its sends and receives, in a
/// random order and random block structure.
inline std::vector<Process> random_processes(std::mt19937& rng, const Scenario& s) {
  std::vector<Process> out;
  for (auto& p : s.participants) {
    std::vector<Action> acts;
    for (auto& m : s.messages) {
      if (m.sender == p) acts.push_back({true, m});
      if (m.receiver == p) acts.push_back({false, m});
    }
    std::shuffle(acts.begin(), acts.end(), rng);
    Process proc;
    FlowBuilder fb(rng, p.str() + "_e");
    ProcessEmitter em{proc};
    EdgeId first = fb.fresh();
    proc.nodes.push_back(node::Start{first});
    EdgeId last = fb.block(acts, first, em);
    proc.nodes.push_back(node::End{last, fb.fresh()});
    out.push_back(std::move(proc));
  }
  return out;
}

inline Choreography random_choreography(std::mt19937& rng, const Scenario& s) {
  std::vector<Action> acts;
  for (auto& m : s.messages) acts.push_back({true, m});
  std::shuffle(acts.begin(), acts.end(), rng);
  Choreography ch;
  FlowBuilder fb(rng, "e");
  ChoreoEmitter em{ch};
  EdgeId first = fb.fresh();
  ch.nodes.push_back(node::Start{first});
  EdgeId last = fb.block(acts, first, em);
  ch.nodes.push_back(node::End{last, fb.fresh()});
  return ch;
}

}  // namespace testing_support
