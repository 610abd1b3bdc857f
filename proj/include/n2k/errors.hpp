#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace n2k {

// Bad shapes, malformed specs, unsupported options. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data-dependent failures: violated checkpoint invariants, non-finite
// gradients, failed verification. Maps to CLI exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file; carries the byte offset where parsing stopped.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t byte_offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::size_t offset;
};

}  // namespace n2k
