#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jamrange {

// Malformed textual input (MAC addresses, channel specs, filter lines).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// Malformed binary frame record.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Value outside its domain (invalid channel number, reason code, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scenario file or simulation population is inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation requires a different interface mode.
class ModeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Caller broke an operation precondition (time travel, unknown id, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jamrange
