#pragma once

#include <stdexcept>
#include <string>

namespace kgtext {

// Invalid data or arguments supplied by the caller. CLI maps this to exit 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed serialized input; carries a position where known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : ValidationError(msg + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  explicit ParseError(const std::string& msg) : ValidationError(msg), position_(0) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Filesystem or stream failure. CLI maps this to exit 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kgtext
