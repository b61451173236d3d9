#pragma once

#include <stdexcept>
#include <string>

namespace topocf {

enum class ErrorKind {
  io,
  parse,
  contract,
  empty_input,
  too_few_points,
  degenerate_input,
  not_in_registry,
  bridge,
  unreachable,
  no_candidate,
};

const char* to_string(ErrorKind kind);

/// Process exit code for an error escaping a CLI subcommand:
/// 2 input/IO, 3 contract violation, 4 planning failure.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column,
             const std::string& what);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class UnreachableError : public Error {
 public:
  UnreachableError(int src, int dst);

  int src() const noexcept { return src_; }
  int dst() const noexcept { return dst_; }

 private:
  int src_;
  int dst_;
};

/// Failure of an external codec process. Carries the exit status (or -1 when
/// the process never produced one, e.g. timeout) and whatever it wrote to stderr.
class BridgeError : public Error {
 public:
  BridgeError(const std::string& message, int exit_status, std::string stderr_text);

  int exit_status() const noexcept { return exit_status_; }
  const std::string& stderr_text() const noexcept { return stderr_text_; }

 private:
  int exit_status_;
  std::string stderr_text_;
};

}  // namespace topocf
