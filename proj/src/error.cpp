#include "topocf/error.hpp"

#include <utility>

namespace topocf {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::contract: return "contract";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::too_few_points: return "too-few-points";
    case ErrorKind::degenerate_input: return "degenerate-affinity";
    case ErrorKind::not_in_registry: return "not-in-registry";
    case ErrorKind::bridge: return "bridge";
    case ErrorKind::unreachable: return "unreachable";
    case ErrorKind::no_candidate: return "no-candidate";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io:
    case ErrorKind::parse:
    case ErrorKind::bridge:
      return 2;
    case ErrorKind::unreachable:
    case ErrorKind::no_candidate:
      return 4;
    default:
      return 3;
  }
}

ParseError::ParseError(const std::string& source, std::size_t line, std::size_t column,
                       const std::string& what)
    : Error(ErrorKind::parse, source + ":" + std::to_string(line) + ":" +
                                  std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

UnreachableError::UnreachableError(int src, int dst)
    : Error(ErrorKind::unreachable, "node " + std::to_string(dst) +
                                        " is unreachable from node " + std::to_string(src)),
      src_(src),
      dst_(dst) {}

BridgeError::BridgeError(const std::string& message, int exit_status, std::string stderr_text)
    : Error(ErrorKind::bridge,
            message + " (exit status " + std::to_string(exit_status) + ")" +
                (stderr_text.empty() ? std::string()
                                     : ": " + stderr_text.substr(0, stderr_text.find_last_not_of(" \t\r\n") + 1))),
      exit_status_(exit_status),
      stderr_text_(std::move(stderr_text)) {}

}  // namespace topocf
