#pragma once

// Aldebaran (.aut) reading and writing.

#include <cstddef>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include "chorconf/error.hpp"
#include "chorconf/lts.hpp"
#include "chorconf/text_syntax.hpp"

namespace chorconf {

inline std::string export_aut(const Lts& lts) {
  std::string out = "des (" + std::to_string(lts.initial) + ", " + std::to_string(lts.transitions.size()) + ", " +
                    std::to_string(lts.state_count) + ")\n";
  for (auto& t : lts.transitions)
    out += "(" + std::to_string(t.from) + ", \"" + t.label.str() + "\", " + std::to_string(t.to) + ")\n";
  return out;
}

namespace detail {

inline Label parse_aut_label(const std::string& text, std::size_t line) {
  if (text == "tau" || text == "i") return Label::tau();
  auto arrow = text.find("->");
  auto colon = arrow == std::string::npos ? std::string::npos : text.find(':', arrow + 2);
  if (colon == std::string::npos) throw AutSyntaxError(line, "label '" + text + "' is not of the form p->q:m");
  std::string from = text.substr(0, arrow), to = text.substr(arrow + 2, colon - arrow - 2),
              msg = text.substr(colon + 1);
  for (auto* part : {&from, &to, &msg})
    if (!text::is_identifier(*part)) throw AutSyntaxError(line, "bad name '" + *part + "' in label '" + text + "'");
  if (from == to) throw AutSyntaxError(line, "label '" + text + "' has the same sender and receiver");
  return Label::comm({ParticipantName(from), ParticipantName(to), MessageName(msg)});
}

}  // namespace detail

/// Parses an .aut document. A nonzero initial state is swapped with state 0
/// so the result keeps the usual numbering. Unquoted labels and `i` for the
/// silent action are accepted.
inline Lts parse_aut(std::string_view text) {
  static const std::regex header(R"(^\s*des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$)");
  static const std::regex edge(R"re(^\s*\(\s*(\d+)\s*,\s*(?:"([^"]*)"|([^,"()]+?))\s*,\s*(\d+)\s*\)\s*$)re");

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::size_t initial = 0, declared = 0;
  Lts lts;
  auto number = [&](const std::string& s) {
    try {
      return static_cast<std::size_t>(std::stoull(s));
    } catch (const std::exception&) {
      throw AutSyntaxError(lineno, "number out of range: " + s);
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::smatch m;
    if (!have_header) {
      if (!std::regex_match(line, m, header)) throw AutSyntaxError(lineno, "expected header 'des (I, T, S)'");
      initial = number(m[1]);
      declared = number(m[2]);
      lts.state_count = number(m[3]);
      if (lts.state_count == 0) throw AutSyntaxError(lineno, "state count must be positive");
      if (initial >= lts.state_count) throw AutSyntaxError(lineno, "initial state out of range");
      have_header = true;
      continue;
    }
    if (!std::regex_match(line, m, edge)) throw AutSyntaxError(lineno, "expected '(from, \"label\", to)'");
    std::size_t from = number(m[1]), to = number(m[4]);
    if (from >= lts.state_count || to >= lts.state_count) throw AutSyntaxError(lineno, "state index out of range");
    Label l = detail::parse_aut_label(m[2].matched ? m[2].str() : m[3].str(), lineno);
    lts.transitions.push_back({from, std::move(l), to});
  }
  if (!have_header) throw AutSyntaxError(lineno + 1, "missing header");
  if (lts.transitions.size() != declared)
    throw AutSyntaxError(lineno, "header declares " + std::to_string(declared) + " transitions, found " +
                                     std::to_string(lts.transitions.size()));
  if (initial != 0) {
    auto swap = [&](std::size_t s) { return s == initial ? 0 : s == 0 ? initial : s; };
    for (auto& t : lts.transitions) {
      t.from = swap(t.from);
      t.to = swap(t.to);
    }
  }
  lts.normalize();
  return lts;
}

}  // namespace chorconf
