#pragma once

// Lowering of BPMN 2.0 XML choreographies, processes and collaborations to
// the core model.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "chorconf/error.hpp"
#include "chorconf/model.hpp"
#include "chorconf/text_syntax.hpp"

namespace chorconf {

inline constexpr const char* bpmn_namespace = "http://www.omg.org/spec/BPMN/20100524/MODEL";

namespace bpmn {

using boost::property_tree::ptree;

inline std::string local_name(const std::string& tag) {
  auto colon = tag.rfind(':');
  return colon == std::string::npos ? tag : tag.substr(colon + 1);
}

/// An XML element viewed through its local name.
struct Element {
  std::string kind;
  const ptree* tree = nullptr;

  std::optional<std::string> attr(const std::string& name) const {
    if (auto v = tree->get_optional<std::string>("<xmlattr>." + name)) return *v;
    return std::nullopt;
  }

  std::string id() const { return attr("id").value_or(""); }

  std::vector<Element> children() const {
    std::vector<Element> out;
    for (auto& [tag, sub] : *tree)
      if (tag != "<xmlattr>" && tag != "<xmlcomment>") out.push_back({local_name(tag), &sub});
    return out;
  }

  std::vector<Element> children(const std::string& kind_filter) const {
    std::vector<Element> out;
    for (auto& c : children())
      if (c.kind == kind_filter) out.push_back(c);
    return out;
  }

  std::string text() const {
    std::string s = tree->data();
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }
};

}  // namespace bpmn

/// Parsed BPMN document with an id index over all elements.
class BpmnDocument {
 public:
  static BpmnDocument from_string(const std::string& xml) {
    BpmnDocument doc;
    std::istringstream in(xml);
    try {
      boost::property_tree::read_xml(in, *doc.tree_);
    } catch (const boost::property_tree::xml_parser_error& e) {
      throw MalformedModelError(std::string("XML: ") + e.what());
    }
    bool found = false;
    for (auto& [tag, sub] : *doc.tree_) {
      if (bpmn::local_name(tag) != "definitions") continue;
      doc.root_ = {"definitions", &sub};
      found = true;
      auto prefix = tag.find(':') == std::string::npos ? std::string() : tag.substr(0, tag.find(':'));
      auto ns = doc.root_.attr(prefix.empty() ? "xmlns" : "xmlns:" + prefix);
      if (ns != bpmn_namespace)
        throw MalformedModelError("root element is not in the BPMN 2.0 model namespace");
    }
    if (!found) throw MalformedModelError("no <definitions> root element");
    doc.index(doc.root_);
    return doc;
  }

  static BpmnDocument from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw MalformedModelError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return from_string(ss.str());
  }

  const bpmn::Element& root() const { return root_; }

  std::optional<bpmn::Element> find(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

 private:
  BpmnDocument() = default;

  void index(const bpmn::Element& e) {
    for (auto& c : e.children()) {
      if (auto id = c.attr("id")) {
        if (!by_id_.emplace(*id, c).second) throw MalformedModelError("duplicate id '" + *id + "'");
      }
      index(c);
    }
  }

  // Heap-owned so that element pointers stay valid when the document moves.
  std::unique_ptr<bpmn::ptree> tree_ = std::make_unique<bpmn::ptree>();
  bpmn::Element root_;
  std::map<std::string, bpmn::Element> by_id_;
};

namespace bpmn {

inline const std::set<std::string>& unsupported_kinds() {
  static const std::set<std::string> s{
      "inclusiveGateway", "complexGateway", "subProcess", "adHocSubProcess", "transaction", "callActivity",
      "boundaryEvent", "subChoreography", "callChoreography", "timerEventDefinition", "conditionalEventDefinition",
      "signalEventDefinition", "errorEventDefinition", "escalationEventDefinition", "compensateEventDefinition",
      "cancelEventDefinition", "linkEventDefinition", "terminateEventDefinition", "standardLoopCharacteristics",
      "multiInstanceLoopCharacteristics"};
  return s;
}

inline const std::set<std::string>& plain_task_kinds() {
  static const std::set<std::string> s{"task", "userTask", "manualTask", "serviceTask", "scriptTask",
                                       "businessRuleTask"};
  return s;
}

inline const std::set<std::string>& flow_node_kinds() {
  static const std::set<std::string> s{"startEvent", "endEvent", "parallelGateway", "exclusiveGateway",
                                       "eventBasedGateway", "choreographyTask", "sendTask", "receiveTask",
                                       "intermediateCatchEvent", "intermediateThrowEvent", "task", "userTask",
                                       "manualTask", "serviceTask", "scriptTask", "businessRuleTask"};
  return s;
}

// Rejects out-of-scope constructs anywhere below `e`.
inline void reject_unsupported(const Element& e) {
  for (auto& c : e.children()) {
    if (c.kind == "BPMNDiagram" || c.kind == "extensionElements" || c.kind == "documentation") continue;
    if (unsupported_kinds().contains(c.kind)) throw UnsupportedElementError(c.kind, c.id());
    reject_unsupported(c);
  }
}

inline std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += text::is_identifier_char(c) ? c : '_';
  return out;
}

/// Sequence-flow graph of one flow container (choreography or process).
struct FlowGraph {
  std::vector<Element> nodes;  // document order
  std::map<std::string, std::vector<std::string>> ins, outs;  // node id -> flow ids
  std::map<std::string, std::pair<std::string, std::string>> flows;  // flow id -> (source, target)

  explicit FlowGraph(const Element& container) {
    std::set<std::string> ids;
    for (auto& c : container.children())
      if (flow_node_kinds().contains(c.kind)) {
        nodes.push_back(c);
        ids.insert(c.id());
      }
    for (auto& f : container.children("sequenceFlow")) {
      auto src = f.attr("sourceRef"), dst = f.attr("targetRef");
      if (!src || !dst || !ids.contains(*src) || !ids.contains(*dst))
        throw MalformedModelError("sequence flow '" + f.id() + "' has a dangling endpoint");
      flows[f.id()] = {*src, *dst};
      outs[*src].push_back(f.id());
      ins[*dst].push_back(f.id());
    }
  }

  std::string only_in(const Element& n) const { return only(ins, n, "incoming"); }
  std::string only_out(const Element& n) const { return only(outs, n, "outgoing"); }

  std::vector<std::string> all(const std::map<std::string, std::vector<std::string>>& m, const Element& n) const {
    auto it = m.find(n.id());
    return it == m.end() ? std::vector<std::string>{} : it->second;
  }

  std::string only(const std::map<std::string, std::vector<std::string>>& m, const Element& n,
                   const char* what) const {
    auto es = all(m, n);
    if (es.size() != 1)
      throw MalformedModelError(n.kind + " '" + n.id() + "' needs exactly one " + what + " sequence flow, has " +
                                std::to_string(es.size()));
    return es.front();
  }
};

inline std::vector<EdgeId> edge_ids(const std::vector<std::string>& ids) {
  std::vector<EdgeId> out;
  for (auto& i : ids) out.emplace_back(i);
  return out;
}

// Gateways and events common to both flow kinds. Returns nullopt for other elements.
template <class Node>
std::optional<Node> lower_control(const FlowGraph& g, const Element& n) {
  auto ins = g.all(g.ins, n), outs = g.all(g.outs, n);
  if (n.kind == "startEvent") {
    if (!ins.empty()) throw MalformedModelError("start event '" + n.id() + "' has incoming flows");
    return Node{node::Start{EdgeId(g.only_out(n))}};
  }
  if (n.kind == "endEvent") {
    if (!outs.empty()) throw MalformedModelError("end event '" + n.id() + "' has outgoing flows");
    return Node{node::End{EdgeId(g.only_in(n)), EdgeId(n.id() + "__completed")}};
  }
  if (n.kind == "parallelGateway" || n.kind == "exclusiveGateway") {
    bool par = n.kind == "parallelGateway";
    if (ins.size() == 1 && outs.size() > 1)
      return par ? Node{node::and_split(EdgeId(ins[0]), edge_ids(outs))}
                 : Node{node::xor_split(EdgeId(ins[0]), edge_ids(outs))};
    if (ins.size() > 1 && outs.size() == 1)
      return par ? Node{node::and_join(edge_ids(ins), EdgeId(outs[0]))}
                 : Node{node::xor_join(edge_ids(ins), EdgeId(outs[0]))};
    throw MalformedModelError(n.kind + " '" + n.id() + "' must either split one flow or join several into one");
  }
  return std::nullopt;
}

inline std::optional<Element> message_definition(const Element& n) {
  auto defs = n.children("messageEventDefinition");
  if (defs.empty()) return std::nullopt;
  return defs.front();
}

}  // namespace bpmn

// ---------------------------------------------------------------------------
// Choreographies

namespace bpmn::detail {

struct ChoreoContext {
  const BpmnDocument& doc;
  std::map<std::string, ParticipantName> participants;  // participant id -> name

  ParticipantName participant(const std::string& id) const {
    auto it = participants.find(id);
    if (it == participants.end()) throw MalformedModelError("unknown participant '" + id + "'");
    return it->second;
  }

  MessageName message_name(const Element& flow) const {
    auto ref = flow.attr("messageRef");
    if (ref) {
      auto m = doc.find(*ref);
      if (!m) throw MalformedModelError("message flow '" + flow.id() + "' refers to unknown message '" + *ref + "'");
      return MessageName(sanitize(m->attr("name").value_or(*ref)));
    }
    if (auto name = flow.attr("name")) return MessageName(sanitize(*name));
    throw MalformedModelError("message flow '" + flow.id() + "' carries no message");
  }

  // Request first, then the response (if any).
  std::vector<MessageEdge> exchanges(const Element& task) const {
    auto initiator = task.attr("initiatingParticipantRef");
    std::vector<MessageEdge> req, resp;
    for (auto& ref : task.children("messageFlowRef")) {
      auto f = doc.find(ref.text());
      if (!f || f->kind != "messageFlow") throw MalformedModelError("unknown message flow '" + ref.text() + "'");
      auto src = f->attr("sourceRef"), dst = f->attr("targetRef");
      if (!src || !dst) throw MalformedModelError("message flow '" + f->id() + "' lacks endpoints");
      MessageEdge x{participant(*src), participant(*dst), message_name(*f)};
      if (x.sender == x.receiver) throw MalformedModelError("message flow '" + f->id() + "' has the same endpoints");
      (!initiator || *src == *initiator ? req : resp).push_back(std::move(x));
    }
    if (req.size() != 1 || resp.size() > 1)
      throw MalformedModelError("choreography task '" + task.id() +
                                "' needs one initiating message and at most one return message");
    if (!resp.empty()) req.push_back(resp.front());
    return req;
  }
};

}  // namespace bpmn::detail

inline Choreography load_choreography(const BpmnDocument& doc) {
  using namespace bpmn;
  auto chors = doc.root().children("choreography");
  if (chors.empty()) throw MalformedModelError("document contains no choreography");
  const Element& ch = chors.front();
  reject_unsupported(ch);

  bpmn::detail::ChoreoContext ctx{doc, {}};
  for (auto& p : ch.children("participant"))
    ctx.participants.emplace(p.id(), ParticipantName(sanitize(p.attr("name").value_or(p.id()))));

  FlowGraph g(ch);
  std::map<std::string, Element> by_id;
  for (auto& n : g.nodes) by_id.emplace(n.id(), n);

  // Tasks that directly follow an event-based gateway become its branches.
  std::set<std::string> subsumed;
  for (auto& n : g.nodes)
    if (n.kind == "eventBasedGateway")
      for (auto& f : g.all(g.outs, n)) subsumed.insert(g.flows.at(f).second);

  Choreography out;
  for (auto& n : g.nodes) {
    if (subsumed.contains(n.id())) {
      if (n.kind != "choreographyTask")
        throw MalformedModelError("event-based gateway target '" + n.id() + "' is not a choreography task");
      continue;
    }
    if (auto c = lower_control<ChoreographyNode>(g, n)) {
      out.nodes.push_back(*c);
    } else if (n.kind == "choreographyTask") {
      auto xs = ctx.exchanges(n);
      EdgeId in(g.only_in(n)), o(g.only_out(n));
      if (xs.size() == 1) {
        out.nodes.push_back(node::Interaction{in, o, xs[0]});
      } else {
        EdgeId link(n.id() + "__link");
        out.nodes.push_back(node::Interaction{in, link, xs[0]});
        out.nodes.push_back(node::Interaction{link, o, xs[1]});
      }
    } else if (n.kind == "eventBasedGateway") {
      std::vector<node::Branch<MessageEdge>> branches;
      for (auto& f : g.all(g.outs, n)) {
        const Element& t = by_id.at(g.flows.at(f).second);
        if (g.all(g.ins, t).size() != 1)
          throw MalformedModelError("event-based branch '" + t.id() + "' has more than one incoming flow");
        auto xs = ctx.exchanges(t);
        if (xs.size() != 1)
          throw MalformedModelError("event-based branch '" + t.id() + "' must be a one-way choreography task");
        branches.push_back({xs[0], EdgeId(g.only_out(t))});
      }
      out.nodes.push_back(node::event_based(EdgeId(g.only_in(n)), std::move(branches)));
    } else {
      throw UnsupportedElementError(n.kind, "not allowed in a choreography");
    }
  }
  check_unique_edges(out);
  return out;
}

// ---------------------------------------------------------------------------
// Processes and collaborations

namespace bpmn::detail {

enum class Comm { none, send, receive };

inline Comm comm_kind(const Element& n) {
  if (n.kind == "sendTask") return Comm::send;
  if (n.kind == "receiveTask") return Comm::receive;
  if (n.kind == "intermediateThrowEvent" && message_definition(n)) return Comm::send;
  if (n.kind == "intermediateCatchEvent" && message_definition(n)) return Comm::receive;
  return Comm::none;
}

// Message name of a communicating element; `flow` is its message flow, if any.
inline MessageName element_message(const BpmnDocument& doc, const Element& n, const std::optional<Element>& flow) {
  std::optional<std::string> ref = n.attr("messageRef");
  if (!ref)
    if (auto d = message_definition(n)) ref = d->attr("messageRef");
  if (!ref && flow) ref = flow->attr("messageRef");
  if (ref) {
    auto m = doc.find(*ref);
    if (!m) throw MalformedModelError("element '" + n.id() + "' refers to unknown message '" + *ref + "'");
    return MessageName(sanitize(m->attr("name").value_or(*ref)));
  }
  if (auto name = n.attr("name")) return MessageName(sanitize(*name));
  throw MalformedModelError("communicating element '" + n.id() + "' has no message");
}

// Lowers a process with a message resolver Msg(element) for each
// communicating element.
template <class Msg, class Resolve>
std::vector<FlowNode<Msg>> lower_process(const Element& proc, Resolve&& resolve) {
  using Node = FlowNode<Msg>;
  reject_unsupported(proc);
  FlowGraph g(proc);
  std::map<std::string, Element> by_id;
  for (auto& n : g.nodes) by_id.emplace(n.id(), n);

  std::set<std::string> subsumed;
  for (auto& n : g.nodes)
    if (n.kind == "eventBasedGateway")
      for (auto& f : g.all(g.outs, n)) subsumed.insert(g.flows.at(f).second);

  std::vector<Node> out;
  for (auto& n : g.nodes) {
    if (subsumed.contains(n.id())) {
      if (comm_kind(n) != Comm::receive)
        throw MalformedModelError("event-based gateway target '" + n.id() + "' is not a receiving element");
      continue;
    }
    if (auto c = lower_control<Node>(g, n)) {
      out.push_back(*c);
      continue;
    }
    if (n.kind == "eventBasedGateway") {
      std::vector<node::Branch<Msg>> branches;
      for (auto& f : g.all(g.outs, n)) {
        const Element& t = by_id.at(g.flows.at(f).second);
        if (g.all(g.ins, t).size() != 1)
          throw MalformedModelError("event-based branch '" + t.id() + "' has more than one incoming flow");
        branches.push_back({resolve(t), EdgeId(g.only_out(t))});
      }
      out.push_back(node::event_based(EdgeId(g.only_in(n)), std::move(branches)));
      continue;
    }
    EdgeId in(g.only_in(n)), o(g.only_out(n));
    bool intermediate = n.kind.starts_with("intermediate");
    switch (comm_kind(n)) {
      case Comm::send:
        out.push_back(intermediate ? Node{node::InterSnd<Msg>{in, o, resolve(n)}} : Node{node::TaskSnd<Msg>{in, o, resolve(n)}});
        break;
      case Comm::receive:
        out.push_back(intermediate ? Node{node::InterRcv<Msg>{in, o, resolve(n)}} : Node{node::TaskRcv<Msg>{in, o, resolve(n)}});
        break;
      case Comm::none:
        if (!plain_task_kinds().contains(n.kind)) throw UnsupportedElementError(n.kind, n.id());
        out.push_back(node::Task{in, o});
        break;
    }
  }
  return out;
}

inline Element process_of(const BpmnDocument& doc, const std::string& pool_id) {
  auto pool = doc.find(pool_id);
  if (!pool) throw MalformedModelError("no pool '" + pool_id + "'");
  if (pool->kind == "process") return *pool;
  auto ref = pool->attr("processRef");
  if (pool->kind != "participant" || !ref) throw MalformedModelError("pool '" + pool_id + "' has no process");
  auto proc = doc.find(*ref);
  if (!proc || proc->kind != "process") throw MalformedModelError("pool '" + pool_id + "' has no process");
  return *proc;
}

// Message flows attached to each element id (as source or target).
inline std::map<std::string, Element> message_flows_by_endpoint(const BpmnDocument& doc) {
  std::map<std::string, Element> out;
  for (auto& c : doc.root().children("collaboration"))
    for (auto& f : c.children("messageFlow")) {
      if (auto s = f.attr("sourceRef")) out.emplace(*s, f);
      if (auto t = f.attr("targetRef")) out.emplace(*t, f);
    }
  return out;
}

}  // namespace bpmn::detail

/// Lowers the process of pool `pool_id` (a participant id, or a process id).
inline Process load_process(const BpmnDocument& doc, const std::string& pool_id) {
  using namespace bpmn;
  Element proc = bpmn::detail::process_of(doc, pool_id);
  auto flows = bpmn::detail::message_flows_by_endpoint(doc);
  auto resolve = [&](const Element& n) {
    auto it = flows.find(n.id());
    return bpmn::detail::element_message(doc, n, it == flows.end() ? std::nullopt : std::optional<Element>(it->second));
  };
  Process p{bpmn::detail::lower_process<MessageName>(proc, resolve)};
  check_unique_edges(p);
  return p;
}

/// Lowers every pool of the first collaboration, resolving message flows
/// into (sender, receiver, message) triples.
inline Collaboration load_collaboration(const BpmnDocument& doc) {
  using namespace bpmn;
  auto collabs = doc.root().children("collaboration");
  if (collabs.empty()) throw MalformedModelError("document contains no collaboration");
  const Element& col = collabs.front();
  reject_unsupported(col);

  struct PoolInfo {
    std::string id;
    ParticipantName name;
    Element process;
  };
  std::vector<PoolInfo> pools;
  std::map<std::string, ParticipantName> owner;  // element or participant id -> participant
  for (auto& p : col.children("participant")) {
    if (!p.attr("processRef")) continue;
    ParticipantName name(sanitize(p.attr("name").value_or(p.id())));
    for (auto& other : pools)
      if (other.name == name) throw MalformedModelError("two pools named '" + name.str() + "'");
    Element proc = bpmn::detail::process_of(doc, p.id());
    owner.emplace(p.id(), name);
    for (auto& n : proc.children()) owner.emplace(n.id(), name);
    pools.push_back({p.id(), name, proc});
  }
  if (pools.empty()) throw MalformedModelError("collaboration has no pool with a process");

  std::map<std::string, Element> flow_of;  // communicating element id -> its message flow
  for (auto& f : col.children("messageFlow")) {
    auto s = f.attr("sourceRef"), t = f.attr("targetRef");
    if (!s || !t || !owner.contains(*s) || !owner.contains(*t))
      throw MalformedModelError("message flow '" + f.id() + "' has an unknown endpoint");
    for (auto* end : {&*s, &*t}) {
      auto e = doc.find(*end);
      if (e->kind == "participant") continue;
      auto k = bpmn::detail::comm_kind(*e);
      if (k == bpmn::detail::Comm::none || (k == bpmn::detail::Comm::send) != (end == &*s))
        throw MalformedModelError("message flow '" + f.id() + "' is attached to '" + *end +
                                  "', which does not " + (end == &*s ? "send" : "receive") + " messages");
      if (!flow_of.emplace(*end, f).second)
        throw MalformedModelError("element '" + *end + "' has more than one message flow");
    }
  }

  auto resolve = [&](const Element& n) {
    auto it = flow_of.find(n.id());
    if (it == flow_of.end()) throw MalformedModelError("communicating element '" + n.id() + "' has no message flow");
    const Element& f = it->second;
    return MessageEdge{owner.at(*f.attr("sourceRef")), owner.at(*f.attr("targetRef")),
                       bpmn::detail::element_message(doc, n, f)};
  };

  Collaboration c;
  for (auto& p : pools) c.pools.push_back({p.name, bpmn::detail::lower_process<MessageEdge>(p.process, resolve)});
  check_unique_edges(c);
  return c;
}

inline Choreography load_choreography_file(const std::string& path) {
  return load_choreography(BpmnDocument::from_file(path));
}

inline Collaboration load_collaboration_file(const std::string& path) {
  return load_collaboration(BpmnDocument::from_file(path));
}

}  // namespace chorconf
