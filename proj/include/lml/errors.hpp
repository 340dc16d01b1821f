#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lml {

// Invalid run configuration (bad flag value, negative loss weight, ...).
// CLI maps this to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed dataset / results / checkpoint file. Exit code 3.
struct FormatError : std::runtime_error {
  FormatError(const std::string& msg, uint64_t byte_offset)
      : std::runtime_error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
  explicit FormatError(const std::string& msg) : std::runtime_error(msg), offset(0) {}
  uint64_t offset;
};

// Non-finite values where finite ones are required. Exit code 4.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Misuse of the training protocol (re-training a completed task,
// asking the expert for soft labels before any task finished, ...).
struct ProtocolError : std::logic_error {
  using std::logic_error::logic_error;
};

// Shape mismatch between matrices handed to an operation.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace lml
