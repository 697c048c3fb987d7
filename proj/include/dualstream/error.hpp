#pragma once

#include <stdexcept>
#include <string>

namespace dualstream {

// Thrown on unreadable or malformed external inputs (image files, configs,
// session scripts). CLI maps these to exit code 2.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when decoding wire bytes fails: bad magic, truncation, checksum
// mismatch, unknown tag, out-of-range field.
struct WireError : std::runtime_error {
  explicit WireError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a room-state transition rejects a message (room full,
// duplicate snapshot id, unknown peer, ...). State is left untouched.
struct StateError : std::runtime_error {
  explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dualstream
