#pragma once

#include <stdexcept>
#include <string>

namespace trajcast {

/// Malformed input file or record.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structurally well-formed input violating a domain invariant.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace trajcast
