#pragma once

// Domain types shared by every part of the library: identifiers, labels,
// node structures for choreographies, processes and collaborations, token
// markings, and the small algebra over them.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <type_traits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chorconf/detail/overloaded.hpp"
#include "chorconf/error.hpp"

namespace chorconf {

/// Opaque nonempty name. The tag keeps edges, participants and messages
/// from being mixed up.
template <class Tag>
class Identifier {
 public:
  Identifier() = default;
  explicit Identifier(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw std::invalid_argument("identifier must be nonempty");
  }

  const std::string& str() const noexcept { return value_; }

  friend bool operator==(const Identifier&, const Identifier&) = default;
  friend std::strong_ordering operator<=>(const Identifier& a, const Identifier& b) {
    return a.value_.compare(b.value_) <=> 0;
  }

 private:
  std::string value_;
};

using EdgeId = Identifier<struct EdgeTag>;
using ParticipantName = Identifier<struct ParticipantTag>;
using MessageName = Identifier<struct MessageTag>;

/// Sorted, duplicate-free edge set used by gateways.
using EdgeSet = std::vector<EdgeId>;

/// A (sender, receiver, message) triple. Used both as a collaboration
/// message edge and as the payload of a communication label.
struct MessageEdge {
  ParticipantName sender;
  ParticipantName receiver;
  MessageName message;

  friend bool operator==(const MessageEdge&, const MessageEdge&) = default;
  friend std::strong_ordering operator<=>(const MessageEdge&, const MessageEdge&) = default;

  std::string str() const { return sender.str() + "->" + receiver.str() + ":" + message.str(); }
};

/// Either the silent action or a communication p1->p2:m. Tau orders first.
class Label {
 public:
  static Label tau() { return Label{}; }

  static Label comm(MessageEdge exchange) {
    if (exchange.sender == exchange.receiver)
      throw std::invalid_argument("communication label with sender == receiver: " + exchange.str());
    Label l;
    l.comm_ = std::move(exchange);
    return l;
  }

  bool is_tau() const noexcept { return !comm_.has_value(); }
  const MessageEdge& exchange() const { return comm_.value(); }

  std::string str() const { return comm_ ? comm_->str() : std::string("tau"); }

  friend bool operator==(const Label&, const Label&) = default;
  friend std::strong_ordering operator<=>(const Label& a, const Label& b) {
    if (a.comm_.has_value() != b.comm_.has_value()) return a.comm_.has_value() ? std::strong_ordering::greater : std::strong_ordering::less;
    if (!a.comm_) return std::strong_ordering::equal;
    return *a.comm_ <=> *b.comm_;
  }

 private:
  std::optional<MessageEdge> comm_;
};

using LabelSet = std::set<Label>;

namespace node {

struct Start {
  EdgeId out;
  friend bool operator==(const Start&, const Start&) = default;
};

/// `completed` is the spurious edge recording that a token reached the end.
struct End {
  EdgeId in;
  EdgeId completed;
  friend bool operator==(const End&, const End&) = default;
};

struct AndSplit {
  EdgeId in;
  EdgeSet outs;
  friend bool operator==(const AndSplit&, const AndSplit&) = default;
};

struct AndJoin {
  EdgeSet ins;
  EdgeId out;
  friend bool operator==(const AndJoin&, const AndJoin&) = default;
};

struct XorSplit {
  EdgeId in;
  EdgeSet outs;
  friend bool operator==(const XorSplit&, const XorSplit&) = default;
};

struct XorJoin {
  EdgeSet ins;
  EdgeId out;
  friend bool operator==(const XorJoin&, const XorJoin&) = default;
};

/// One-way choreography task.
struct Interaction {
  EdgeId in;
  EdgeId out;
  MessageEdge exchange;
  friend bool operator==(const Interaction&, const Interaction&) = default;
};

/// Non-communicating process task.
struct Task {
  EdgeId in;
  EdgeId out;
  friend bool operator==(const Task&, const Task&) = default;
};

/// Sending or receiving element. `Msg` is a bare MessageName in processes
/// and a full MessageEdge once composed into a collaboration.
template <class Msg, class Kind>
struct Messaging {
  EdgeId in;
  EdgeId out;
  Msg message;
  friend bool operator==(const Messaging&, const Messaging&) = default;
};

template <class Msg> using TaskRcv = Messaging<Msg, struct TaskRcvKind>;
template <class Msg> using TaskSnd = Messaging<Msg, struct TaskSndKind>;
template <class Msg> using InterRcv = Messaging<Msg, struct InterRcvKind>;
template <class Msg> using InterSnd = Messaging<Msg, struct InterSndKind>;

template <class Msg>
struct Branch {
  Msg message;
  EdgeId out;
  friend bool operator==(const Branch&, const Branch&) = default;
  friend auto operator<=>(const Branch&, const Branch&) = default;
};

/// Event-based gateway. Branches are kept sorted by (message, out).
template <class Msg>
struct EventBased {
  EdgeId in;
  std::vector<Branch<Msg>> branches;
  friend bool operator==(const EventBased&, const EventBased&) = default;
};

inline EdgeSet make_edge_set(std::vector<EdgeId> edges, const char* what) {
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end())
    throw DuplicateEdgeError(std::string("edge '") + dup->str() + "' listed twice in " + what);
  if (edges.size() < 2)
    throw ArityError(std::string(what) + " needs at least two edges, got " + std::to_string(edges.size()));
  return edges;
}

inline AndSplit and_split(EdgeId in, std::vector<EdgeId> outs) { return {std::move(in), make_edge_set(std::move(outs), "andSplit")}; }
inline AndJoin and_join(std::vector<EdgeId> ins, EdgeId out) { return {make_edge_set(std::move(ins), "andJoin"), std::move(out)}; }
inline XorSplit xor_split(EdgeId in, std::vector<EdgeId> outs) { return {std::move(in), make_edge_set(std::move(outs), "xorSplit")}; }
inline XorJoin xor_join(std::vector<EdgeId> ins, EdgeId out) { return {make_edge_set(std::move(ins), "xorJoin"), std::move(out)}; }

template <class Msg>
EventBased<Msg> event_based(EdgeId in, std::vector<Branch<Msg>> branches) {
  if (branches.size() < 2)
    throw ArityError("eventBased needs at least two branches, got " + std::to_string(branches.size()));
  std::sort(branches.begin(), branches.end());
  return {std::move(in), std::move(branches)};
}

}  // namespace node

using ChoreographyNode = std::variant<node::Start, node::End, node::AndSplit, node::AndJoin, node::XorSplit,
                                      node::XorJoin, node::Interaction, node::EventBased<MessageEdge>>;

template <class Msg>
using FlowNode = std::variant<node::Start, node::End, node::AndSplit, node::AndJoin, node::XorSplit, node::XorJoin,
                              node::Task, node::TaskRcv<Msg>, node::TaskSnd<Msg>, node::InterRcv<Msg>,
                              node::InterSnd<Msg>, node::EventBased<Msg>>;

using ProcessNode = FlowNode<MessageName>;
using CollaborationNode = FlowNode<MessageEdge>;

struct Choreography {
  std::vector<ChoreographyNode> nodes;
  friend bool operator==(const Choreography&, const Choreography&) = default;
};

struct Process {
  std::vector<ProcessNode> nodes;
  friend bool operator==(const Process&, const Process&) = default;
};

struct Pool {
  ParticipantName participant;
  std::vector<CollaborationNode> nodes;
  friend bool operator==(const Pool&, const Pool&) = default;
};

/// Pools in composition order. Node indices used by the semantics are
/// flattened across pools in that order.
struct Collaboration {
  std::vector<Pool> pools;
  friend bool operator==(const Collaboration&, const Collaboration&) = default;

  std::size_t node_count() const {
    std::size_t n = 0;
    for (const auto& p : pools) n += p.nodes.size();
    return n;
  }

  /// Visits every node with its flattened index and owning pool.
  template <class F>
  void for_each_node(F&& f) const {
    std::size_t index = 0;
    for (const auto& pool : pools)
      for (const auto& n : pool.nodes) f(index++, pool, n);
  }
};

/// Equality ignoring the order of pools.
inline bool same_up_to_pool_order(const Collaboration& a, const Collaboration& b) {
  if (a.pools.size() != b.pools.size()) return false;
  auto by_name = [](const Pool& x, const Pool& y) { return x.participant < y.participant; };
  auto pa = a.pools;
  auto pb = b.pools;
  std::sort(pa.begin(), pa.end(), by_name);
  std::sort(pb.begin(), pb.end(), by_name);
  return pa == pb;
}

// ---------------------------------------------------------------------------
// Edge access

namespace detail {

inline std::vector<EdgeId> inputs_of(const node::Start&) { return {}; }
inline std::vector<EdgeId> inputs_of(const node::End& n) { return {n.in}; }
inline std::vector<EdgeId> inputs_of(const node::AndSplit& n) { return {n.in}; }
inline std::vector<EdgeId> inputs_of(const node::AndJoin& n) { return n.ins; }
inline std::vector<EdgeId> inputs_of(const node::XorSplit& n) { return {n.in}; }
inline std::vector<EdgeId> inputs_of(const node::XorJoin& n) { return n.ins; }
inline std::vector<EdgeId> inputs_of(const node::Interaction& n) { return {n.in}; }
inline std::vector<EdgeId> inputs_of(const node::Task& n) { return {n.in}; }
template <class M, class K>
std::vector<EdgeId> inputs_of(const node::Messaging<M, K>& n) { return {n.in}; }
template <class M>
std::vector<EdgeId> inputs_of(const node::EventBased<M>& n) { return {n.in}; }

inline std::vector<EdgeId> outputs_of(const node::Start& n) { return {n.out}; }
inline std::vector<EdgeId> outputs_of(const node::End& n) { return {n.completed}; }
inline std::vector<EdgeId> outputs_of(const node::AndSplit& n) { return n.outs; }
inline std::vector<EdgeId> outputs_of(const node::AndJoin& n) { return {n.out}; }
inline std::vector<EdgeId> outputs_of(const node::XorSplit& n) { return n.outs; }
inline std::vector<EdgeId> outputs_of(const node::XorJoin& n) { return {n.out}; }
inline std::vector<EdgeId> outputs_of(const node::Interaction& n) { return {n.out}; }
inline std::vector<EdgeId> outputs_of(const node::Task& n) { return {n.out}; }
template <class M, class K>
std::vector<EdgeId> outputs_of(const node::Messaging<M, K>& n) { return {n.out}; }
template <class M>
std::vector<EdgeId> outputs_of(const node::EventBased<M>& n) {
  std::vector<EdgeId> out;
  for (const auto& b : n.branches) out.push_back(b.out);
  return out;
}

}  // namespace detail

/// Edges a node consumes tokens from.
template <class... Ts>
std::vector<EdgeId> input_edges(const std::variant<Ts...>& n) {
  return std::visit([](const auto& x) { return detail::inputs_of(x); }, n);
}

/// Edges a node puts tokens on, including the spurious completion edge of an end event.
template <class... Ts>
std::vector<EdgeId> output_edges(const std::variant<Ts...>& n) {
  return std::visit([](const auto& x) { return detail::outputs_of(x); }, n);
}

/// Throws DuplicateEdgeError if an edge is produced by two nodes or consumed
/// by two nodes.
template <class Node>
void check_unique_edges(const std::vector<const Node*>& nodes) {
  std::set<EdgeId> sources, targets;
  for (const Node* n : nodes) {
    for (auto& e : output_edges(*n))
      if (!sources.insert(e).second) throw DuplicateEdgeError("edge '" + e.str() + "' has two sources");
    for (auto& e : input_edges(*n))
      if (!targets.insert(e).second) throw DuplicateEdgeError("edge '" + e.str() + "' has two targets");
  }
}

inline void check_unique_edges(const Choreography& ch) {
  std::vector<const ChoreographyNode*> ns;
  for (auto& n : ch.nodes) ns.push_back(&n);
  check_unique_edges(ns);
}

inline void check_unique_edges(const Process& p) {
  std::vector<const ProcessNode*> ns;
  for (auto& n : p.nodes) ns.push_back(&n);
  check_unique_edges(ns);
}

inline void check_unique_edges(const Collaboration& c) {
  std::vector<const CollaborationNode*> ns;
  for (auto& pool : c.pools)
    for (auto& n : pool.nodes) ns.push_back(&n);
  check_unique_edges(ns);
}

/// Every edge named anywhere in the model, sorted.
template <class Model>
std::set<EdgeId> all_edges(const Model& m) {
  std::set<EdgeId> out;
  auto add = [&](const auto& n) {
    for (auto& e : input_edges(n)) out.insert(e);
    for (auto& e : output_edges(n)) out.insert(e);
  };
  if constexpr (std::is_same_v<Model, Collaboration>) {
    for (auto& pool : m.pools)
      for (auto& n : pool.nodes) add(n);
  } else {
    for (auto& n : m.nodes) add(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Markings

/// Sparse counter; absent keys read as zero and zero entries are never stored,
/// so equality is equality of the nonzero entries.
template <class Key>
class TokenCounter {
 public:
  std::size_t operator[](const Key& k) const {
    auto it = counts_.find(k);
    return it == counts_.end() ? 0 : it->second;
  }

  void add(const Key& k, std::size_t n = 1) {
    if (n) counts_[k] += n;
  }

  void remove(const Key& k) {
    auto it = counts_.find(k);
    if (it == counts_.end()) throw UnderflowError("no token to remove");
    if (--it->second == 0) counts_.erase(it);
  }

  std::size_t total() const {
    std::size_t t = 0;
    for (auto& [k, v] : counts_) t += v;
    return t;
  }

  bool empty() const noexcept { return counts_.empty(); }
  const std::map<Key, std::size_t>& entries() const noexcept { return counts_; }

  friend bool operator==(const TokenCounter&, const TokenCounter&) = default;
  friend bool operator<(const TokenCounter& a, const TokenCounter& b) { return a.counts_ < b.counts_; }

 private:
  std::map<Key, std::size_t> counts_;
};

using SequenceState = TokenCounter<EdgeId>;
using MessageState = TokenCounter<MessageEdge>;

inline SequenceState inc_tokens(SequenceState s, const EdgeId& e) {
  s.add(e);
  return s;
}

inline SequenceState inc_tokens(SequenceState s, const EdgeSet& edges) {
  for (auto& e : edges) s.add(e);
  return s;
}

inline SequenceState dec_tokens(SequenceState s, const EdgeId& e) {
  if (s[e] == 0) throw UnderflowError("edge '" + e.str() + "' holds no token");
  s.remove(e);
  return s;
}

inline SequenceState dec_tokens(SequenceState s, const EdgeSet& edges) {
  for (auto& e : edges)
    if (s[e] == 0) throw UnderflowError("edge '" + e.str() + "' holds no token");
  for (auto& e : edges) s.remove(e);
  return s;
}

inline MessageState inc_messages(MessageState d, const MessageEdge& m) {
  d.add(m);
  return d;
}

inline MessageState dec_messages(MessageState d, const MessageEdge& m) {
  if (d[m] == 0) throw UnderflowError("message edge '" + m.str() + "' holds no message");
  d.remove(m);
  return d;
}

// ---------------------------------------------------------------------------
// Labels and message edges

/// Every communication label a choreography can produce.
inline LabelSet labels_choreo(const Choreography& ch) {
  LabelSet out;
  for (auto& n : ch.nodes) {
    if (auto* t = std::get_if<node::Interaction>(&n)) out.insert(Label::comm(t->exchange));
    if (auto* g = std::get_if<node::EventBased<MessageEdge>>(&n))
      for (auto& b : g->branches) out.insert(Label::comm(b.message));
  }
  return out;
}

/// Every communication label a collaboration can produce. Sends are silent,
/// so only receiving elements contribute.
inline LabelSet labels_collab(const Collaboration& c) {
  LabelSet out;
  c.for_each_node([&](std::size_t, const Pool&, const CollaborationNode& n) {
    std::visit(detail::Overloaded{
                   [&](const node::TaskRcv<MessageEdge>& x) { out.insert(Label::comm(x.message)); },
                   [&](const node::InterRcv<MessageEdge>& x) { out.insert(Label::comm(x.message)); },
                   [&](const node::EventBased<MessageEdge>& x) {
                     for (auto& b : x.branches) out.insert(Label::comm(b.message));
                   },
                   [](const auto&) {},
               },
               n);
  });
  return out;
}

using MessageMultiset = std::multiset<MessageEdge>;

inline MessageMultiset out_edges(const Collaboration& c) {
  MessageMultiset out;
  c.for_each_node([&](std::size_t, const Pool&, const CollaborationNode& n) {
    if (auto* x = std::get_if<node::TaskSnd<MessageEdge>>(&n)) out.insert(x->message);
    if (auto* x = std::get_if<node::InterSnd<MessageEdge>>(&n)) out.insert(x->message);
  });
  return out;
}

inline MessageMultiset in_edges(const Collaboration& c) {
  MessageMultiset in;
  c.for_each_node([&](std::size_t, const Pool&, const CollaborationNode& n) {
    if (auto* x = std::get_if<node::TaskRcv<MessageEdge>>(&n)) in.insert(x->message);
    if (auto* x = std::get_if<node::InterRcv<MessageEdge>>(&n)) in.insert(x->message);
    if (auto* x = std::get_if<node::EventBased<MessageEdge>>(&n))
      for (auto& b : x->branches) in.insert(b.message);
  });
  return in;
}

}  // namespace chorconf
