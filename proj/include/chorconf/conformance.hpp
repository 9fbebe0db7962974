#pragma once

// Weak bisimulation (BBC) and weak trace (TBC) conformance between a
// choreography LTS and a collaboration LTS, with counterexamples.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chorconf/lts.hpp"
#include "chorconf/model.hpp"
#include "chorconf/semantics.hpp"

namespace chorconf {

/// Saturated LTS: tau closures and weak visible steps.
struct WeakLts {
  Lts base;
  // closure[s] is sorted and contains s.
  std::vector<std::vector<std::size_t>> closure;
  // weak[s][a] = states reachable by tau* a tau*, sorted.
  std::vector<std::map<Label, std::vector<std::size_t>>> weak;

  std::size_t size() const noexcept { return base.state_count; }

  const std::vector<std::size_t>& after(std::size_t s, const Label& a) const {
    static const std::vector<std::size_t> none;
    if (a.is_tau()) return closure[s];
    auto it = weak[s].find(a);
    return it == weak[s].end() ? none : it->second;
  }
};

inline WeakLts saturate(const Lts& lts) {
  WeakLts w;
  w.base = lts;
  const std::size_t n = lts.state_count;
  auto succ = lts.successors();

  w.closure.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      w.closure[s].push_back(u);
      for (auto* t : succ[u])
        if (t->label.is_tau() && !seen[t->to]) {
          seen[t->to] = true;
          stack.push_back(t->to);
        }
    }
    std::sort(w.closure[s].begin(), w.closure[s].end());
  }

  w.weak.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::map<Label, std::set<std::size_t>> acc;
    for (std::size_t u : w.closure[s])
      for (auto* t : succ[u])
        if (!t->label.is_tau()) {
          auto& dst = acc[t->label];
          dst.insert(w.closure[t->to].begin(), w.closure[t->to].end());
        }
    for (auto& [a, ts] : acc) w.weak[s][a] = std::vector<std::size_t>(ts.begin(), ts.end());
  }
  return w;
}

enum class Relation { bbc, tbc };
enum class Side { choreography, collaboration };

inline const char* to_string(Relation r) { return r == Relation::bbc ? "BBC" : "TBC"; }
inline const char* to_string(Side s) { return s == Side::choreography ? "choreography" : "collaboration"; }

/// A visible trace admitted by `side` and not by the other model.
struct DistinguishingTrace {
  std::vector<Label> trace;
  Side side = Side::collaboration;
  friend bool operator==(const DistinguishingTrace&, const DistinguishingTrace&) = default;
};

/// One move of the bisimulation game: `mover` performs `label` (weakly) and
/// the opponent answers; the resulting state pair is recorded.
struct GameStep {
  Label label;
  Side mover = Side::choreography;
  std::size_t choreo_state = 0;
  std::size_t collab_state = 0;
  friend bool operator==(const GameStep&, const GameStep&) = default;
};

/// A path of game moves from the initial pair to a pair where `side` can do
/// `label` and the other side cannot match it at all.
struct NonSimulablePair {
  std::vector<GameStep> path;
  Label label;
  Side side = Side::choreography;
  std::size_t choreo_state = 0;
  std::size_t collab_state = 0;
  friend bool operator==(const NonSimulablePair&, const NonSimulablePair&) = default;
};

using Counterexample = std::variant<DistinguishingTrace, NonSimulablePair>;

inline std::string join_labels(const std::vector<Label>& labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) s += (i ? " · " : "") + labels[i].str();
  return s;
}

inline std::string describe(const Counterexample& c) {
  if (auto* t = std::get_if<DistinguishingTrace>(&c))
    return join_labels(t->trace) + " (admitted only by the " + to_string(t->side) + ")";
  const auto& p = std::get<NonSimulablePair>(c);
  std::vector<Label> moves;
  for (auto& g : p.path) moves.push_back(g.label);
  std::string s = moves.empty() ? std::string("at the initial states") : "after " + join_labels(moves);
  return s + ", the " + to_string(p.side) + " can do " + p.label.str() + " and the other model cannot (states " +
         std::to_string(p.choreo_state) + ", " + std::to_string(p.collab_state) + ")";
}

struct ConformanceResult {
  bool verdict = true;
  Relation relation = Relation::bbc;
  std::optional<Counterexample> counterexample;
};

namespace detail {

// Refinement levels of weak bisimilarity over the disjoint union of two
// saturated LTSs. levels[k][s] is the block of state s after k rounds;
// choreography states come first, collaboration states are offset by `shift`.
class Refinement {
 public:
  Refinement(const WeakLts& a, const WeakLts& b) : a_(a), b_(b), shift_(a.size()) {
    for (auto* w : {&a_, &b_})
      for (auto& m : w->weak)
        for (auto& [l, _] : m) label_ids_.try_emplace(l, 0);
    int next = 1;  // 0 is tau
    for (auto& [l, id] : label_ids_) id = next++;

    const std::size_t n = a.size() + b.size();
    levels_.push_back(std::vector<std::size_t>(n, 0));
    std::size_t blocks = 1;
    while (true) {
      const auto& prev = levels_.back();
      std::map<std::pair<std::size_t, Signature>, std::size_t> ids;
      std::vector<std::size_t> next_level(n);
      for (std::size_t s = 0; s < n; ++s) {
        auto key = std::make_pair(prev[s], signature(s, prev));
        next_level[s] = ids.try_emplace(std::move(key), ids.size()).first->second;
      }
      if (ids.size() == blocks) break;
      blocks = ids.size();
      levels_.push_back(std::move(next_level));
    }
  }

  std::size_t shift() const noexcept { return shift_; }
  const std::vector<std::size_t>& final_level() const { return levels_.back(); }

  bool equivalent(std::size_t s, std::size_t t) const { return final_level()[s] == final_level()[t]; }

  // Follows refinement splits from a non-equivalent pair down to a state pair
  // where one side has a move the other cannot answer.
  NonSimulablePair witness(std::size_t chor, std::size_t col) const {
    NonSimulablePair out;
    while (true) {
      std::size_t p = chor, q = col + shift_;
      std::size_t k = 1;
      while (levels_[k][p] == levels_[k][q]) ++k;
      const auto& prev = levels_[k - 1];
      auto sp = signature(p, prev), sq = signature(q, prev);
      // Smallest element present on exactly one side.
      std::pair<int, std::size_t> elem;
      Side mover;
      auto ip = sp.begin(), iq = sq.begin();
      while (true) {
        if (iq == sq.end() || (ip != sp.end() && *ip < *iq)) {
          elem = *ip;
          mover = Side::choreography;
          break;
        }
        if (ip == sp.end() || *iq < *ip) {
          elem = *iq;
          mover = Side::collaboration;
          break;
        }
        ++ip;
        ++iq;
      }
      Label a = label_of(elem.first);
      std::size_t mover_state = mover == Side::choreography ? p : q;
      std::size_t opp_state = mover == Side::choreography ? q : p;
      std::size_t target = 0;
      for (std::size_t t : after(mover_state, a))
        if (prev[t] == elem.second) {
          target = t;
          break;
        }
      const auto& answers = after(opp_state, a);
      if (answers.empty()) {
        out.label = a;
        out.side = mover;
        out.choreo_state = chor;
        out.collab_state = col;
        return out;
      }
      // Every answer lands outside the mover's block at level k-1; take the
      // smallest state.
      std::size_t reply = answers.front();
      if (mover == Side::choreography) {
        chor = target;
        col = reply - shift_;
      } else {
        chor = reply;
        col = target - shift_;
      }
      out.path.push_back({a, mover, chor, col});
    }
  }

 private:
  using Signature = std::vector<std::pair<int, std::size_t>>;

  Label label_of(int id) const {
    if (id == 0) return Label::tau();
    for (auto& [l, i] : label_ids_)
      if (i == id) return l;
    return Label::tau();
  }

  // Successors in union numbering.
  std::vector<std::size_t> after(std::size_t s, const Label& l) const {
    const WeakLts& w = s < shift_ ? a_ : b_;
    std::size_t off = s < shift_ ? 0 : shift_;
    std::vector<std::size_t> out;
    for (std::size_t t : w.after(s - off, l)) out.push_back(t + off);
    return out;
  }

  Signature signature(std::size_t s, const std::vector<std::size_t>& block) const {
    const WeakLts& w = s < shift_ ? a_ : b_;
    std::size_t off = s < shift_ ? 0 : shift_;
    Signature sig;
    for (std::size_t t : w.closure[s - off]) sig.emplace_back(0, block[t + off]);
    for (auto& [l, ts] : w.weak[s - off]) {
      int id = label_ids_.at(l);
      for (std::size_t t : ts) sig.emplace_back(id, block[t + off]);
    }
    std::sort(sig.begin(), sig.end());
    sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
    return sig;
  }

  const WeakLts& a_;
  const WeakLts& b_;
  std::size_t shift_;
  std::map<Label, int> label_ids_;
  std::vector<std::vector<std::size_t>> levels_;
};

}  // namespace detail

/// Decides weak bisimilarity of the initial states of `choreo` and
/// `hide(collab, hidden)`.
inline ConformanceResult check_bbc(const Lts& choreo, const Lts& collab, const LabelSet& hidden) {
  WeakLts a = saturate(choreo), b = saturate(hide(collab, hidden));
  detail::Refinement r(a, b);
  ConformanceResult res{true, Relation::bbc, std::nullopt};
  if (!r.equivalent(choreo.initial, collab.initial + r.shift())) {
    res.verdict = false;
    res.counterexample = r.witness(choreo.initial, collab.initial);
  }
  return res;
}

namespace detail {

using MacroState = std::vector<std::size_t>;

inline std::map<Label, MacroState> macro_successors(const WeakLts& w, const MacroState& m) {
  std::map<Label, std::set<std::size_t>> acc;
  for (std::size_t s : m)
    for (auto& [l, ts] : w.weak[s]) acc[l].insert(ts.begin(), ts.end());
  std::map<Label, MacroState> out;
  for (auto& [l, ts] : acc) out.emplace(l, MacroState(ts.begin(), ts.end()));
  return out;
}

}  // namespace detail

/// Decides equality of the visible trace sets of `choreo` and
/// `hide(collab, hidden)`. A failure carries a shortest distinguishing trace.
inline ConformanceResult check_tbc(const Lts& choreo, const Lts& collab, const LabelSet& hidden) {
  using detail::MacroState;
  WeakLts a = saturate(choreo), b = saturate(hide(collab, hidden));
  ConformanceResult res{true, Relation::tbc, std::nullopt};

  struct Node {
    MacroState left, right;
    std::size_t parent;
    std::optional<Label> via;
  };
  std::vector<Node> nodes;
  std::set<std::pair<MacroState, MacroState>> seen;
  std::deque<std::size_t> queue;

  auto push = [&](MacroState l, MacroState r, std::size_t parent, std::optional<Label> via) {
    if (!seen.emplace(l, r).second) return;
    nodes.push_back({std::move(l), std::move(r), parent, std::move(via)});
    queue.push_back(nodes.size() - 1);
  };
  push(a.closure[choreo.initial], b.closure[collab.initial], 0, std::nullopt);

  while (!queue.empty()) {
    std::size_t i = queue.front();
    queue.pop_front();
    auto ls = detail::macro_successors(a, nodes[i].left);
    auto rs = detail::macro_successors(b, nodes[i].right);
    std::optional<std::pair<Label, Side>> diff;
    for (auto& [l, _] : ls)
      if (!rs.contains(l)) {
        diff = {l, Side::choreography};
        break;
      }
    for (auto& [l, _] : rs)
      if (!ls.contains(l) && (!diff || l < diff->first)) {
        diff = {l, Side::collaboration};
        break;
      }
    if (diff) {
      std::vector<Label> trace{diff->first};
      for (std::size_t j = i; nodes[j].via; j = nodes[j].parent) trace.push_back(*nodes[j].via);
      std::reverse(trace.begin(), trace.end());
      res.verdict = false;
      res.counterexample = DistinguishingTrace{std::move(trace), diff->second};
      return res;
    }
    for (auto& [l, next] : ls) push(next, rs.at(l), i, l);
  }
  return res;
}

inline ConformanceResult check(Relation r, const Lts& choreo, const Lts& collab, const LabelSet& hidden) {
  return r == Relation::bbc ? check_bbc(choreo, collab, hidden) : check_tbc(choreo, collab, hidden);
}

}  // namespace chorconf
