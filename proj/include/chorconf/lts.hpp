#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "chorconf/model.hpp"

namespace chorconf {

struct Transition {
  std::size_t from = 0;
  Label label;
  std::size_t to = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
  friend std::strong_ordering operator<=>(const Transition& a, const Transition& b) {
    if (auto c = a.from <=> b.from; c != 0) return c;
    if (auto c = a.label <=> b.label; c != 0) return c;
    return a.to <=> b.to;
  }
};

/// Finite labelled transition system. State 0 is initial; transitions are
/// kept sorted by (from, label, to) without duplicates.
struct Lts {
  std::size_t state_count = 1;
  std::size_t initial = 0;
  std::vector<Transition> transitions;

  friend bool operator==(const Lts&, const Lts&) = default;

  void normalize() {
    std::sort(transitions.begin(), transitions.end());
    transitions.erase(std::unique(transitions.begin(), transitions.end()), transitions.end());
  }

  /// Throws std::logic_error when an invariant does not hold.
  void validate() const {
    if (initial >= state_count) throw std::logic_error("initial state out of range");
    for (std::size_t i = 0; i < transitions.size(); ++i) {
      const auto& t = transitions[i];
      if (t.from >= state_count || t.to >= state_count) throw std::logic_error("transition endpoint out of range");
      if (i && !(transitions[i - 1] < t)) throw std::logic_error("transitions not strictly sorted");
    }
  }

  LabelSet visible_labels() const {
    LabelSet out;
    for (auto& t : transitions)
      if (!t.label.is_tau()) out.insert(t.label);
    return out;
  }

  /// Outgoing transitions indexed by source state.
  std::vector<std::vector<const Transition*>> successors() const {
    std::vector<std::vector<const Transition*>> out(state_count);
    for (auto& t : transitions) out[t.from].push_back(&t);
    return out;
  }
};

}  // namespace chorconf
