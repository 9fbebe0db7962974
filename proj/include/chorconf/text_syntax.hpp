#pragma once

// Textual notation for choreographies, processes and collaborations.
// Grammar: docs/text-syntax.md.

#include <cctype>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "chorconf/detail/overloaded.hpp"
#include "chorconf/error.hpp"
#include "chorconf/model.hpp"

namespace chorconf {

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

namespace text {

inline bool is_identifier_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!is_identifier_char(c)) return false;
  return true;
}

namespace detail {

enum class Tok { ident, lparen, rparen, lbrace, rbrace, comma, bar, colon, arrow, eof };

inline const char* spelling(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::comma: return "','";
    case Tok::bar: return "'|'";
    case Tok::colon: return "':'";
    case Tok::arrow: return "'->'";
    case Tok::eof: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blank();
      std::size_t b = pos_;
      if (pos_ >= src_.size()) {
        out.push_back({Tok::eof, "", {b, b}});
        return out;
      }
      char c = src_[pos_];
      auto single = [&](Tok k) {
        ++pos_;
        out.push_back({k, std::string(1, c), {b, pos_}});
      };
      switch (c) {
        case '(': single(Tok::lparen); continue;
        case ')': single(Tok::rparen); continue;
        case '{': single(Tok::lbrace); continue;
        case '}': single(Tok::rbrace); continue;
        case ',': single(Tok::comma); continue;
        case '|': single(Tok::bar); continue;
        case ':': single(Tok::colon); continue;
        default: break;
      }
      if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        pos_ += 2;
        out.push_back({Tok::arrow, "->", {b, pos_}});
        continue;
      }
      if (is_identifier_char(c)) {
        while (pos_ < src_.size() && is_identifier_char(src_[pos_])) ++pos_;
        out.push_back({Tok::ident, std::string(src_.substr(b, pos_ - b)), {b, pos_}});
        continue;
      }
      throw SyntaxError(location(b) + ": unexpected character '" + std::string(1, c) + "'", b, {});
    }
  }

  std::string location(std::size_t offset) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return std::to_string(line) + ":" + std::to_string(col);
  }

 private:
  void skip_blank() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

enum class Dialect { choreography, process, collaboration };

class Parser {
 public:
  Parser(std::string_view src, Dialect dialect) : lexer_(src), dialect_(dialect) { toks_ = lexer_.run(); }

  Choreography choreography() {
    Choreography ch;
    ch.nodes = elements([&] { return choreo_element(); });
    expect(Tok::eof);
    check_unique_edges(ch);
    return ch;
  }

  Process process() {
    Process p;
    p.nodes = elements([&] { return flow_element<MessageName>(); });
    expect(Tok::eof);
    check_unique_edges(p);
    return p;
  }

  Collaboration collaboration() {
    Collaboration c;
    do {
      keyword("pool");
      Pool pool;
      pool.participant = ParticipantName(ident("participant name"));
      expect(Tok::lbrace);
      pool.nodes = elements([&] { return flow_element<MessageEdge>(); });
      expect(Tok::rbrace);
      for (auto& other : c.pools)
        if (other.participant == pool.participant)
          throw SyntaxError(here() + ": duplicate pool '" + pool.participant.str() + "'", peek().span.begin, {});
      c.pools.push_back(std::move(pool));
      if (peek().kind == Tok::bar) advance();
    } while (peek().kind != Tok::eof);
    check_unique_edges(c);
    return c;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_++]; }
  std::string here() const { return lexer_.location(peek().span.begin); }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    std::string msg = here() + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? " or " : "") + expected[i];
    const Token& t = peek();
    msg += ", found " + (t.kind == Tok::eof ? std::string("end of input") : "'" + t.text + "'");
    throw SyntaxError(msg, t.span.begin, std::move(expected));
  }

  void expect(Tok k) {
    if (peek().kind != k) fail({spelling(k)});
    advance();
  }

  std::string ident(const char* what) {
    if (peek().kind != Tok::ident) fail({what});
    return advance().text;
  }

  void keyword(const char* kw) {
    if (peek().kind != Tok::ident || peek().text != kw) fail({std::string("'") + kw + "'"});
    advance();
  }

  EdgeId edge() { return EdgeId(ident("edge name")); }

  std::vector<EdgeId> edge_set() {
    expect(Tok::lbrace);
    std::vector<EdgeId> out{edge()};
    while (peek().kind == Tok::comma) {
      advance();
      out.push_back(edge());
    }
    expect(Tok::rbrace);
    return out;
  }

  MessageEdge exchange() {
    ParticipantName from(ident("sender"));
    expect(Tok::arrow);
    ParticipantName to(ident("receiver"));
    expect(Tok::colon);
    MessageName m(ident("message name"));
    return {std::move(from), std::move(to), std::move(m)};
  }

  // Node factories throw ArityError/DuplicateEdgeError without a position;
  // prefix the location of the element that caused it.
  template <class F>
  std::invoke_result_t<F&> located(std::size_t at, F&& f) {
    try {
      return f();
    } catch (const ArityError& e) {
      throw ArityError(lexer_.location(at) + ": " + e.what());
    } catch (const DuplicateEdgeError& e) {
      throw DuplicateEdgeError(lexer_.location(at) + ": " + e.what());
    }
  }

  template <class F>
  std::vector<std::invoke_result_t<F&>> elements(F&& element) {
    std::vector<std::invoke_result_t<F&>> out;
    out.push_back(element());
    while (peek().kind == Tok::bar) {
      // A bar followed by `pool` separates pools, not elements.
      if (dialect_ == Dialect::collaboration && pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == "pool") break;
      advance();
      out.push_back(element());
    }
    return out;
  }

  // Elements common to all three grammars. Returns nullopt if the keyword is
  // not one of them.
  template <class Node>
  std::optional<Node> control_element(const std::string& kw, std::size_t at) {
    if (kw == "start") {
      EdgeId o = edge();
      expect(Tok::rparen);
      return Node{node::Start{o}};
    }
    if (kw == "end") {
      EdgeId i = edge();
      expect(Tok::comma);
      EdgeId c = edge();
      expect(Tok::rparen);
      return Node{node::End{i, c}};
    }
    if (kw == "andSplit" || kw == "xorSplit") {
      EdgeId i = edge();
      expect(Tok::comma);
      auto outs = edge_set();
      expect(Tok::rparen);
      return located(at, [&] {
        return kw == "andSplit" ? Node{node::and_split(i, outs)} : Node{node::xor_split(i, outs)};
      });
    }
    if (kw == "andJoin" || kw == "xorJoin") {
      auto ins = edge_set();
      expect(Tok::comma);
      EdgeId o = edge();
      expect(Tok::rparen);
      return located(at, [&] {
        return kw == "andJoin" ? Node{node::and_join(ins, o)} : Node{node::xor_join(ins, o)};
      });
    }
    return std::nullopt;
  }

  ChoreographyNode choreo_element() {
    std::size_t at = peek().span.begin;
    std::string kw = ident("element keyword");
    expect(Tok::lparen);
    if (auto n = control_element<ChoreographyNode>(kw, at)) return *n;
    if (kw == "task") {
      EdgeId i = edge();
      expect(Tok::comma);
      EdgeId o = edge();
      expect(Tok::comma);
      auto x = exchange();
      expect(Tok::rparen);
      check_distinct(x, at);
      return node::Interaction{i, o, x};
    }
    if (kw == "eventBased") {
      EdgeId i = edge();
      expect(Tok::comma);
      expect(Tok::lbrace);
      std::vector<node::Branch<MessageEdge>> branches;
      do {
        if (!branches.empty()) advance();
        expect(Tok::lparen);
        auto x = exchange();
        check_distinct(x, at);
        expect(Tok::comma);
        EdgeId o = edge();
        expect(Tok::rparen);
        branches.push_back({x, o});
      } while (peek().kind == Tok::comma);
      expect(Tok::rbrace);
      expect(Tok::rparen);
      return located(at, [&] { return ChoreographyNode{node::event_based(i, branches)}; });
    }
    pos_ -= 2;
    fail({"start", "end", "andSplit", "andJoin", "xorSplit", "xorJoin", "task", "eventBased"});
  }

  void check_distinct(const MessageEdge& x, std::size_t at) {
    if (x.sender == x.receiver)
      throw SyntaxError(lexer_.location(at) + ": participant '" + x.sender.str() + "' exchanges a message with itself",
                        at, {});
  }

  template <class Msg>
  Msg message_payload() {
    if constexpr (std::is_same_v<Msg, MessageEdge>)
      return exchange();
    else
      return MessageName(ident("message name"));
  }

  template <class Msg>
  FlowNode<Msg> flow_element() {
    using Node = FlowNode<Msg>;
    std::size_t at = peek().span.begin;
    std::string kw = ident("element keyword");
    expect(Tok::lparen);
    if (auto n = control_element<Node>(kw, at)) return *n;
    if (kw == "task") {
      EdgeId i = edge();
      expect(Tok::comma);
      EdgeId o = edge();
      expect(Tok::rparen);
      return node::Task{i, o};
    }
    if (kw == "taskRcv" || kw == "taskSnd" || kw == "interRcv" || kw == "interSnd") {
      EdgeId i = edge();
      expect(Tok::comma);
      EdgeId o = edge();
      expect(Tok::comma);
      Msg m = message_payload<Msg>();
      expect(Tok::rparen);
      if (kw == "taskRcv") return node::TaskRcv<Msg>{i, o, m};
      if (kw == "taskSnd") return node::TaskSnd<Msg>{i, o, m};
      if (kw == "interRcv") return node::InterRcv<Msg>{i, o, m};
      return node::InterSnd<Msg>{i, o, m};
    }
    if (kw == "eventBased") {
      EdgeId i = edge();
      expect(Tok::comma);
      expect(Tok::lbrace);
      std::vector<node::Branch<Msg>> branches;
      do {
        if (!branches.empty()) advance();
        expect(Tok::lparen);
        Msg m = message_payload<Msg>();
        expect(Tok::comma);
        EdgeId o = edge();
        expect(Tok::rparen);
        branches.push_back({m, o});
      } while (peek().kind == Tok::comma);
      expect(Tok::rbrace);
      expect(Tok::rparen);
      return located(at, [&] { return Node{node::event_based(i, branches)}; });
    }
    pos_ -= 2;
    fail({"start", "end", "andSplit", "andJoin", "xorSplit", "xorJoin", "task", "taskRcv", "taskSnd", "interRcv",
          "interSnd", "eventBased"});
  }

  Lexer lexer_;
  Dialect dialect_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline std::string edges_str(const EdgeSet& es) {
  std::string s = "{";
  for (std::size_t i = 0; i < es.size(); ++i) s += (i ? ", " : "") + es[i].str();
  return s + "}";
}

inline std::string payload_str(const MessageName& m) { return m.str(); }
inline std::string payload_str(const MessageEdge& m) { return m.str(); }

template <class... Ts>
std::string element_str(const std::variant<Ts...>& n) {
  using ::chorconf::detail::Overloaded;
  return std::visit(
      Overloaded{
          [](const node::Start& x) { return "start(" + x.out.str() + ")"; },
          [](const node::End& x) { return "end(" + x.in.str() + ", " + x.completed.str() + ")"; },
          [](const node::AndSplit& x) { return "andSplit(" + x.in.str() + ", " + edges_str(x.outs) + ")"; },
          [](const node::AndJoin& x) { return "andJoin(" + edges_str(x.ins) + ", " + x.out.str() + ")"; },
          [](const node::XorSplit& x) { return "xorSplit(" + x.in.str() + ", " + edges_str(x.outs) + ")"; },
          [](const node::XorJoin& x) { return "xorJoin(" + edges_str(x.ins) + ", " + x.out.str() + ")"; },
          [](const node::Interaction& x) {
            return "task(" + x.in.str() + ", " + x.out.str() + ", " + x.exchange.str() + ")";
          },
          [](const node::Task& x) { return "task(" + x.in.str() + ", " + x.out.str() + ")"; },
          []<class M>(const node::TaskRcv<M>& x) {
            return "taskRcv(" + x.in.str() + ", " + x.out.str() + ", " + payload_str(x.message) + ")";
          },
          []<class M>(const node::TaskSnd<M>& x) {
            return "taskSnd(" + x.in.str() + ", " + x.out.str() + ", " + payload_str(x.message) + ")";
          },
          []<class M>(const node::InterRcv<M>& x) {
            return "interRcv(" + x.in.str() + ", " + x.out.str() + ", " + payload_str(x.message) + ")";
          },
          []<class M>(const node::InterSnd<M>& x) {
            return "interSnd(" + x.in.str() + ", " + x.out.str() + ", " + payload_str(x.message) + ")";
          },
          []<class M>(const node::EventBased<M>& x) {
            std::string s = "eventBased(" + x.in.str() + ", {";
            for (std::size_t i = 0; i < x.branches.size(); ++i)
              s += (i ? ", (" : "(") + payload_str(x.branches[i].message) + ", " + x.branches[i].out.str() + ")";
            return s + "})";
          },
      },
      n);
}

template <class Node>
std::string elements_str(const std::vector<Node>& nodes, const std::string& indent) {
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    s += indent + element_str(nodes[i]);
    s += (i + 1 < nodes.size()) ? " |\n" : "\n";
  }
  return s;
}

}  // namespace detail

}  // namespace text

inline Choreography parse_choreography(std::string_view src) {
  return text::detail::Parser(src, text::detail::Dialect::choreography).choreography();
}

inline Process parse_process(std::string_view src) {
  return text::detail::Parser(src, text::detail::Dialect::process).process();
}

inline Collaboration parse_collaboration(std::string_view src) {
  return text::detail::Parser(src, text::detail::Dialect::collaboration).collaboration();
}

/// Canonical text: one element per line, pools as `pool name { ... }`
/// blocks separated by `|`.
inline std::string print_model(const Choreography& ch) { return text::detail::elements_str(ch.nodes, ""); }

inline std::string print_model(const Process& p) { return text::detail::elements_str(p.nodes, ""); }

inline std::string print_model(const Collaboration& c) {
  std::string s;
  for (std::size_t i = 0; i < c.pools.size(); ++i) {
    s += "pool " + c.pools[i].participant.str() + " {\n";
    s += text::detail::elements_str(c.pools[i].nodes, "  ");
    s += (i + 1 < c.pools.size()) ? "} |\n" : "}\n";
  }
  return s;
}

}  // namespace chorconf
