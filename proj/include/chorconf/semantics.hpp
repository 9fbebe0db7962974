#pragma once

// Token-game semantics of choreographies and collaborations, reachable
// state-space exploration, and hiding.

#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "chorconf/detail/overloaded.hpp"
#include "chorconf/error.hpp"
#include "chorconf/lts.hpp"
#include "chorconf/model.hpp"

namespace chorconf {

struct ExplorationBounds {
  std::size_t max_tokens_per_edge = 2;
  std::size_t max_messages_per_edge = 4;
  std::size_t max_states = 100000;
};

struct ChoreoConfig {
  SequenceState state;
  std::set<std::size_t> start_fired;

  friend bool operator==(const ChoreoConfig&, const ChoreoConfig&) = default;
  friend bool operator<(const ChoreoConfig& a, const ChoreoConfig& b) {
    return std::tie(a.state, a.start_fired) < std::tie(b.state, b.start_fired);
  }
};

struct CollabConfig {
  SequenceState state;
  MessageState messages;
  std::set<std::size_t> start_fired;

  friend bool operator==(const CollabConfig&, const CollabConfig&) = default;
  friend bool operator<(const CollabConfig& a, const CollabConfig& b) {
    return std::tie(a.state, a.messages, a.start_fired) < std::tie(b.state, b.messages, b.start_fired);
  }
};

/// One enabled step: the label it emits, the configuration it leads to and
/// the (flattened) index of the node that fired.
template <class Config>
struct Step {
  Label label;
  Config target;
  std::size_t node = 0;
};

namespace detail {

// Rules shared by choreographies and processes: events and gateways. Returns
// false if `n` is not one of them.
template <class Config, class Node>
bool control_steps(const Node& n, std::size_t index, const Config& cfg, std::vector<Step<Config>>& out) {
  const SequenceState& s = cfg.state;
  auto emit = [&](SequenceState next, bool fire_start = false) {
    Config c = cfg;
    c.state = std::move(next);
    if (fire_start) c.start_fired.insert(index);
    out.push_back({Label::tau(), std::move(c), index});
  };
  return std::visit(
      Overloaded{
          [&](const node::Start& x) {
            if (!cfg.start_fired.contains(index)) emit(inc_tokens(s, x.out), true);
            return true;
          },
          [&](const node::End& x) {
            if (s[x.in] > 0) emit(inc_tokens(dec_tokens(s, x.in), x.completed));
            return true;
          },
          [&](const node::AndSplit& x) {
            if (s[x.in] > 0) emit(inc_tokens(dec_tokens(s, x.in), x.outs));
            return true;
          },
          [&](const node::AndJoin& x) {
            bool all = true;
            for (auto& e : x.ins) all = all && s[e] > 0;
            if (all) emit(inc_tokens(dec_tokens(s, x.ins), x.out));
            return true;
          },
          [&](const node::XorSplit& x) {
            if (s[x.in] > 0)
              for (auto& o : x.outs) emit(inc_tokens(dec_tokens(s, x.in), o));
            return true;
          },
          [&](const node::XorJoin& x) {
            for (auto& i : x.ins)
              if (s[i] > 0) emit(inc_tokens(dec_tokens(s, i), x.out));
            return true;
          },
          [](const auto&) { return false; },
      },
      n);
}

}  // namespace detail

inline ChoreoConfig initial_config(const Choreography&) { return {}; }
inline CollabConfig initial_config(const Collaboration&) { return {}; }

inline std::vector<Step<ChoreoConfig>> choreo_steps(const Choreography& ch, const ChoreoConfig& cfg) {
  std::vector<Step<ChoreoConfig>> out;
  for (std::size_t i = 0; i < ch.nodes.size(); ++i) {
    const auto& n = ch.nodes[i];
    if (detail::control_steps(n, i, cfg, out)) continue;
    if (auto* t = std::get_if<node::Interaction>(&n)) {
      if (cfg.state[t->in] > 0)
        out.push_back({Label::comm(t->exchange), {inc_tokens(dec_tokens(cfg.state, t->in), t->out), cfg.start_fired}, i});
    } else if (auto* g = std::get_if<node::EventBased<MessageEdge>>(&n)) {
      if (cfg.state[g->in] > 0)
        for (auto& b : g->branches)
          out.push_back({Label::comm(b.message), {inc_tokens(dec_tokens(cfg.state, g->in), b.out), cfg.start_fired}, i});
    }
  }
  return out;
}

inline std::vector<Step<CollabConfig>> collab_steps(const Collaboration& c, const CollabConfig& cfg) {
  std::vector<Step<CollabConfig>> out;
  const SequenceState& s = cfg.state;
  auto move = [&](const EdgeId& in, const EdgeId& o) { return inc_tokens(dec_tokens(s, in), o); };
  c.for_each_node([&](std::size_t i, const Pool&, const CollaborationNode& n) {
    if (detail::control_steps(n, i, cfg, out)) return;
    auto send = [&](const auto& x) {
      if (s[x.in] > 0) out.push_back({Label::tau(), {move(x.in, x.out), inc_messages(cfg.messages, x.message), cfg.start_fired}, i});
    };
    auto receive = [&](const auto& x) {
      if (s[x.in] > 0 && cfg.messages[x.message] > 0)
        out.push_back({Label::comm(x.message),
                       {move(x.in, x.out), dec_messages(cfg.messages, x.message), cfg.start_fired}, i});
    };
    std::visit(detail::Overloaded{
                   [&](const node::Task& x) {
                     if (s[x.in] > 0) out.push_back({Label::tau(), {move(x.in, x.out), cfg.messages, cfg.start_fired}, i});
                   },
                   [&](const node::TaskSnd<MessageEdge>& x) { send(x); },
                   [&](const node::InterSnd<MessageEdge>& x) { send(x); },
                   [&](const node::TaskRcv<MessageEdge>& x) { receive(x); },
                   [&](const node::InterRcv<MessageEdge>& x) { receive(x); },
                   [&](const node::EventBased<MessageEdge>& x) {
                     if (s[x.in] == 0) return;
                     for (auto& b : x.branches)
                       if (cfg.messages[b.message] > 0)
                         out.push_back({Label::comm(b.message),
                                        {move(x.in, b.out), dec_messages(cfg.messages, b.message), cfg.start_fired}, i});
                   },
                   [](const auto&) {},
               },
               n);
  });
  return out;
}

inline std::vector<Step<ChoreoConfig>> steps(const Choreography& ch, const ChoreoConfig& cfg) { return choreo_steps(ch, cfg); }
inline std::vector<Step<CollabConfig>> steps(const Collaboration& c, const CollabConfig& cfg) { return collab_steps(c, cfg); }

/// Reachable configurations (indexed by LTS state) together with the LTS.
template <class Config>
struct StateSpace {
  std::vector<Config> configs;
  Lts lts;
};

namespace detail {

inline void check_bounds(const SequenceState& s, const ExplorationBounds& b) {
  for (auto& [e, n] : s.entries())
    if (n > b.max_tokens_per_edge)
      throw BoundExceeded(BoundKind::tokens_per_edge, "edge '" + e.str() + "' would hold " + std::to_string(n) +
                                                          " tokens (limit " + std::to_string(b.max_tokens_per_edge) + ")");
}

inline void check_bounds(const ChoreoConfig& c, const ExplorationBounds& b) { check_bounds(c.state, b); }

inline void check_bounds(const CollabConfig& c, const ExplorationBounds& b) {
  check_bounds(c.state, b);
  for (auto& [m, n] : c.messages.entries())
    if (n > b.max_messages_per_edge)
      throw BoundExceeded(BoundKind::messages_per_edge, "message edge '" + m.str() + "' would hold " +
                                                            std::to_string(n) + " messages (limit " +
                                                            std::to_string(b.max_messages_per_edge) + ")");
}

}  // namespace detail

/// Breadth-first exploration from the initial configuration. States are
/// numbered in discovery order and successors are visited in step order, so
/// the result is reproducible.
template <class Model>
auto explore(const Model& model, const ExplorationBounds& bounds = {}) {
  using Config = decltype(initial_config(model));
  StateSpace<Config> space;
  std::map<Config, std::size_t> index;
  std::deque<std::size_t> frontier;

  auto intern = [&](const Config& c) {
    auto [it, fresh] = index.try_emplace(c, space.configs.size());
    if (fresh) {
      detail::check_bounds(c, bounds);
      if (space.configs.size() >= bounds.max_states)
        throw BoundExceeded(BoundKind::states, "more than " + std::to_string(bounds.max_states) + " reachable states");
      space.configs.push_back(c);
      frontier.push_back(it->second);
    }
    return it->second;
  };

  intern(initial_config(model));
  while (!frontier.empty()) {
    std::size_t from = frontier.front();
    frontier.pop_front();
    Config current = space.configs[from];
    for (auto& st : steps(model, current)) {
      std::size_t to = intern(st.target);
      space.lts.transitions.push_back({from, st.label, to});
    }
  }
  space.lts.state_count = space.configs.size();
  space.lts.normalize();
  return space;
}

template <class Model>
Lts generate_lts(const Model& model, const ExplorationBounds& bounds = {}) {
  return explore(model, bounds).lts;
}

/// Relabels every transition whose label is in `hidden` to tau. Transitions
/// that become identical are merged.
inline Lts hide(Lts lts, const LabelSet& hidden) {
  if (hidden.empty()) return lts;
  for (auto& t : lts.transitions)
    if (hidden.contains(t.label)) t.label = Label::tau();
  lts.normalize();
  return lts;
}

inline LabelSet hiding_set(const LabelSet& collab_labels, const LabelSet& choreo_labels) {
  LabelSet out;
  for (auto& l : collab_labels)
    if (!l.is_tau() && !choreo_labels.contains(l)) out.insert(l);
  return out;
}

inline LabelSet hiding_set(const Choreography& ch, const Collaboration& c) {
  return hiding_set(labels_collab(c), labels_choreo(ch));
}

}  // namespace chorconf
