#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chorconf {

/// Base of every error raised by the library. Anything else escaping a
/// public function is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A token was removed from an edge that holds none.
class UnderflowError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::string message, std::size_t position, std::vector<std::string> expected)
      : Error(std::move(message)), position_(position), expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

/// Gateway edge set with fewer than two edges, or event-based gateway with
/// fewer than two branches.
class ArityError : public Error {
 public:
  using Error::Error;
};

class DuplicateEdgeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedElementError : public Error {
 public:
  UnsupportedElementError(std::string element, const std::string& detail)
      : Error("unsupported BPMN element '" + element + "'" + (detail.empty() ? "" : ": " + detail)),
        element_(std::move(element)) {}

  const std::string& element() const noexcept { return element_; }

 private:
  std::string element_;
};

class MalformedModelError : public Error {
 public:
  using Error::Error;
};

enum class BoundKind { tokens_per_edge, messages_per_edge, states };

inline const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::tokens_per_edge: return "maxTokensPerEdge";
    case BoundKind::messages_per_edge: return "maxMessagesPerEdge";
    case BoundKind::states: return "maxStates";
  }
  return "?";
}

class BoundExceeded : public Error {
 public:
  BoundExceeded(BoundKind kind, const std::string& detail)
      : Error(std::string(to_string(kind)) + " exceeded: " + detail), kind_(kind) {}

  BoundKind kind() const noexcept { return kind_; }

 private:
  BoundKind kind_;
};

class AutSyntaxError : public Error {
 public:
  AutSyntaxError(std::size_t line, const std::string& detail)
      : Error("aut line " + std::to_string(line) + ": " + detail), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace chorconf
