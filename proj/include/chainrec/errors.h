#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chainrec {

// Invalid user input: bad scenario field, malformed DSL, bad word notation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation would exceed one of the hard work/size caps.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computed object violated an invariant that the algorithms guarantee.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : ConfigError(message + " at byte " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace chainrec
