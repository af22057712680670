#pragma once

#include <stdexcept>
#include <string>

namespace semabr {

// Input violates a documented invariant or precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed text input. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Operation is not valid in the object's current state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A streaming session could not complete.
class SessionError : public std::runtime_error {
 public:
  SessionError(const std::string& what, int chunk)
      : std::runtime_error("chunk " + std::to_string(chunk) + ": " + what),
        chunk_(chunk) {}
  int chunk() const { return chunk_; }

 private:
  int chunk_;
};

}  // namespace semabr
