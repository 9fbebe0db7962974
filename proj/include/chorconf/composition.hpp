#pragma once

// Well-composedness and composition of named processes into a collaboration.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chorconf/detail/overloaded.hpp"
#include "chorconf/error.hpp"
#include "chorconf/model.hpp"

namespace chorconf {

namespace composition_error {

/// The same message name is sent (or received) at two places.
struct MessageNameClash {
  MessageName message;
  std::string first;
  std::string second;
  friend bool operator==(const MessageNameClash&, const MessageNameClash&) = default;
};

struct SelfMessage {
  MessageName message;
  ParticipantName participant;
  friend bool operator==(const SelfMessage&, const SelfMessage&) = default;
};

/// A send nobody receives. The receiver is known only when checking an
/// already-composed collaboration.
struct UnmatchedSend {
  MessageName message;
  ParticipantName sender;
  std::optional<ParticipantName> receiver;
  friend bool operator==(const UnmatchedSend&, const UnmatchedSend&) = default;
};

struct UnmatchedReceive {
  MessageName message;
  ParticipantName receiver;
  std::optional<ParticipantName> sender;
  friend bool operator==(const UnmatchedReceive&, const UnmatchedReceive&) = default;
};

}  // namespace composition_error

using CompositionError = std::variant<composition_error::MessageNameClash, composition_error::SelfMessage,
                                      composition_error::UnmatchedSend, composition_error::UnmatchedReceive>;

inline std::string describe(const CompositionError& e) {
  using namespace composition_error;
  auto edge = [](const std::optional<ParticipantName>& from, const std::optional<ParticipantName>& to,
                 const MessageName& m) {
    return (from ? from->str() : std::string("?")) + "->" + (to ? to->str() : std::string("?")) + ":" + m.str();
  };
  return std::visit(detail::Overloaded{
                        [](const MessageNameClash& x) {
                          return "MessageNameClash " + x.message.str() + " (" + x.first + ", " + x.second + ")";
                        },
                        [](const SelfMessage& x) {
                          return "SelfMessage " + x.message.str() + " (" + x.participant.str() + ")";
                        },
                        [&](const UnmatchedSend& x) {
                          return "UnmatchedSend " + x.message.str() + " (" + edge(x.sender, x.receiver, x.message) + ")";
                        },
                        [&](const UnmatchedReceive& x) {
                          return "UnmatchedReceive " + x.message.str() + " (" + edge(x.sender, x.receiver, x.message) + ")";
                        },
                    },
                    e);
}

/// Thrown by compose; carries every error found.
class CompositionFailure : public Error {
 public:
  explicit CompositionFailure(std::vector<CompositionError> errors)
      : Error(summary(errors)), errors_(std::move(errors)) {}

  const std::vector<CompositionError>& errors() const noexcept { return errors_; }

 private:
  static std::string summary(const std::vector<CompositionError>& errors) {
    std::string s = "composition failed:";
    for (auto& e : errors) s += " " + describe(e) + ";";
    if (!errors.empty()) s.pop_back();
    return s;
  }

  std::vector<CompositionError> errors_;
};

struct WellComposedReport {
  std::vector<CompositionError> errors;
  bool ok() const noexcept { return errors.empty(); }
};

inline WellComposedReport well_composed(const Collaboration& c) {
  WellComposedReport r;
  MessageMultiset out = out_edges(c), in = in_edges(c);
  for (auto it = out.begin(); it != out.end(); it = out.upper_bound(*it)) {
    std::size_t extra = out.count(*it) > in.count(*it) ? out.count(*it) - in.count(*it) : 0;
    for (std::size_t k = 0; k < extra; ++k)
      r.errors.push_back(composition_error::UnmatchedSend{it->message, it->sender, it->receiver});
  }
  for (auto it = in.begin(); it != in.end(); it = in.upper_bound(*it)) {
    std::size_t extra = in.count(*it) > out.count(*it) ? in.count(*it) - out.count(*it) : 0;
    for (std::size_t k = 0; k < extra; ++k)
      r.errors.push_back(composition_error::UnmatchedReceive{it->message, it->receiver, it->sender});
  }
  std::set<MessageEdge> selfs;
  for (auto& m : out)
    if (m.sender == m.receiver) selfs.insert(m);
  for (auto& m : in)
    if (m.sender == m.receiver) selfs.insert(m);
  for (auto& m : selfs) r.errors.push_back(composition_error::SelfMessage{m.message, m.sender});
  return r;
}

using MessageFunction = std::map<MessageName, ParticipantName>;

namespace detail {

enum class Direction { send, receive };

inline void check_arguments(std::size_t processes, const std::vector<ParticipantName>& names) {
  if (processes != names.size())
    throw std::invalid_argument(std::to_string(processes) + " processes but " + std::to_string(names.size()) + " names");
  std::set<ParticipantName> seen;
  for (auto& n : names)
    if (!seen.insert(n).second) throw std::invalid_argument("participant name '" + n.str() + "' used twice");
}

// Builds S or R, collecting every clash instead of stopping at the first.
inline MessageFunction message_map(const std::vector<Process>& ps, const std::vector<ParticipantName>& names,
                                   Direction dir, std::vector<CompositionError>& errors) {
  MessageFunction f;
  std::map<MessageName, std::string> where;
  for (std::size_t p = 0; p < ps.size(); ++p) {
    for (std::size_t i = 0; i < ps[p].nodes.size(); ++i) {
      std::string here = names[p].str() + " node " + std::to_string(i);
      auto add = [&](const MessageName& m) {
        auto [it, fresh] = where.try_emplace(m, here);
        if (fresh)
          f.emplace(m, names[p]);
        else
          errors.push_back(composition_error::MessageNameClash{m, it->second, here});
      };
      std::visit(Overloaded{
                     [&](const node::TaskSnd<MessageName>& x) { if (dir == Direction::send) add(x.message); },
                     [&](const node::InterSnd<MessageName>& x) { if (dir == Direction::send) add(x.message); },
                     [&](const node::TaskRcv<MessageName>& x) { if (dir == Direction::receive) add(x.message); },
                     [&](const node::InterRcv<MessageName>& x) { if (dir == Direction::receive) add(x.message); },
                     [&](const node::EventBased<MessageName>& x) {
                       if (dir == Direction::receive)
                         for (auto& b : x.branches) add(b.message);
                     },
                     [](const auto&) {},
                 },
                 ps[p].nodes[i]);
    }
  }
  return f;
}

inline void throw_if(std::vector<CompositionError>& errors) {
  if (!errors.empty()) throw CompositionFailure(std::move(errors));
}

}  // namespace detail

/// Maps each sent message name to its sending participant. Throws
/// CompositionFailure listing every MessageNameClash.
inline MessageFunction snd_map(const std::vector<Process>& ps, const std::vector<ParticipantName>& names) {
  detail::check_arguments(ps.size(), names);
  std::vector<CompositionError> errors;
  auto f = detail::message_map(ps, names, detail::Direction::send, errors);
  detail::throw_if(errors);
  return f;
}

inline MessageFunction rcv_map(const std::vector<Process>& ps, const std::vector<ParticipantName>& names) {
  detail::check_arguments(ps.size(), names);
  std::vector<CompositionError> errors;
  auto f = detail::message_map(ps, names, detail::Direction::receive, errors);
  detail::throw_if(errors);
  return f;
}

namespace detail {

inline EdgeId rename(const EdgeId& e, const std::string& prefix) { return prefix.empty() ? e : EdgeId(prefix + e.str()); }

inline EdgeSet rename(const EdgeSet& es, const std::string& prefix) {
  EdgeSet out;
  for (auto& e : es) out.push_back(rename(e, prefix));
  std::sort(out.begin(), out.end());
  return out;
}

// Rewrites one process node into a collaboration node.
template <class Resolve>
CollaborationNode annotate(const ProcessNode& n, const std::string& prefix, Resolve&& resolve) {
  auto r = [&](const EdgeId& e) { return rename(e, prefix); };
  return std::visit(
      Overloaded{
          [&](const node::Start& x) -> CollaborationNode { return node::Start{r(x.out)}; },
          [&](const node::End& x) -> CollaborationNode { return node::End{r(x.in), r(x.completed)}; },
          [&](const node::AndSplit& x) -> CollaborationNode { return node::AndSplit{r(x.in), rename(x.outs, prefix)}; },
          [&](const node::AndJoin& x) -> CollaborationNode { return node::AndJoin{rename(x.ins, prefix), r(x.out)}; },
          [&](const node::XorSplit& x) -> CollaborationNode { return node::XorSplit{r(x.in), rename(x.outs, prefix)}; },
          [&](const node::XorJoin& x) -> CollaborationNode { return node::XorJoin{rename(x.ins, prefix), r(x.out)}; },
          [&](const node::Task& x) -> CollaborationNode { return node::Task{r(x.in), r(x.out)}; },
          [&](const node::TaskRcv<MessageName>& x) -> CollaborationNode {
            return node::TaskRcv<MessageEdge>{r(x.in), r(x.out), resolve(x.message)};
          },
          [&](const node::TaskSnd<MessageName>& x) -> CollaborationNode {
            return node::TaskSnd<MessageEdge>{r(x.in), r(x.out), resolve(x.message)};
          },
          [&](const node::InterRcv<MessageName>& x) -> CollaborationNode {
            return node::InterRcv<MessageEdge>{r(x.in), r(x.out), resolve(x.message)};
          },
          [&](const node::InterSnd<MessageName>& x) -> CollaborationNode {
            return node::InterSnd<MessageEdge>{r(x.in), r(x.out), resolve(x.message)};
          },
          [&](const node::EventBased<MessageName>& x) -> CollaborationNode {
            std::vector<node::Branch<MessageEdge>> bs;
            for (auto& b : x.branches) bs.push_back({resolve(b.message), r(b.out)});
            return node::event_based(r(x.in), std::move(bs));
          },
      },
      n);
}

}  // namespace detail

/// Composes named processes into a collaboration, turning every bare message
/// name m into the message edge S(m)->R(m):m. Throws CompositionFailure with
/// all errors found, or std::invalid_argument on bad arguments.
///
/// Edge names must not collide across processes; if they do, every edge of
/// every pool is prefixed with "<participant>.".
inline Collaboration compose(const std::vector<Process>& ps, const std::vector<ParticipantName>& names) {
  detail::check_arguments(ps.size(), names);
  std::vector<CompositionError> errors;
  MessageFunction snd = detail::message_map(ps, names, detail::Direction::send, errors);
  MessageFunction rcv = detail::message_map(ps, names, detail::Direction::receive, errors);
  for (auto& [m, p] : snd) {
    auto it = rcv.find(m);
    if (it == rcv.end())
      errors.push_back(composition_error::UnmatchedSend{m, p, std::nullopt});
    else if (it->second == p)
      errors.push_back(composition_error::SelfMessage{m, p});
  }
  for (auto& [m, p] : rcv)
    if (!snd.contains(m)) errors.push_back(composition_error::UnmatchedReceive{m, p, std::nullopt});
  detail::throw_if(errors);

  bool clash = false;
  std::set<EdgeId> seen;
  for (auto& p : ps) {
    for (auto& e : all_edges(p))
      if (seen.contains(e)) clash = true;
    auto mine = all_edges(p);
    seen.insert(mine.begin(), mine.end());
  }

  auto resolve = [&](const MessageName& m) { return MessageEdge{snd.at(m), rcv.at(m), m}; };
  Collaboration c;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Pool pool{names[i], {}};
    std::string prefix = clash ? names[i].str() + "." : "";
    for (auto& n : ps[i].nodes) pool.nodes.push_back(detail::annotate(n, prefix, resolve));
    c.pools.push_back(std::move(pool));
  }
  return c;
}

}  // namespace chorconf
