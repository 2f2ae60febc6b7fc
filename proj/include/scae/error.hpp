#pragma once

#include <stdexcept>
#include <string>

namespace scae {

// Shape/rank mismatches between tensors or between a tensor and an op contract.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// NaN/Inf produced where finite values are required.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// API misuse: backward on a non-scalar, backward twice without reset, etc.
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Malformed input file; byte_offset points at the first offending byte.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, size_t byte_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    size_t offset;
};

// Iterative solver failed to converge; carries the iteration count.
struct AlgorithmError : std::runtime_error {
    AlgorithmError(const std::string& what, long iterations)
        : std::runtime_error(what + " (after " + std::to_string(iterations) + " iterations)"),
          iters(iterations) {}
    long iters;
};

// Bad run configuration; line is 1-based when the source is a config file, 0 otherwise.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_no(line) {}
    int line_no;
};

// Corrupt or truncated compressed stream.
struct DecodeError : std::runtime_error {
    explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scae
