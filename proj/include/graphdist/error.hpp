#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace graphdist {

// Base of every error the library raises. The CLI maps the three families
// below onto exit codes (usage 2, data 3, refusal 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid arguments or inconsistent shapes: a caller bug.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionError : public InvalidArgument {
public:
    DimensionError(std::size_t expected, std::size_t actual)
        : InvalidArgument("vertex count mismatch: expected " + std::to_string(expected) + ", got " +
                          std::to_string(actual)) {}
    using InvalidArgument::InvalidArgument;
};

class EmptySampleError : public InvalidArgument {
public:
    EmptySampleError() : InvalidArgument("graph sample is empty") {}
};

class InsufficientSampleError : public InvalidArgument {
public:
    InsufficientSampleError(std::size_t needed, std::size_t actual)
        : InvalidArgument("sample too small: need at least " + std::to_string(needed) + " graphs, got " +
                          std::to_string(actual)) {}
};

// Malformed input data (files, signals).
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Zero rank variance in one of the inputs of a rank correlation.
class UndefinedCorrelation : public DataError {
public:
    UndefinedCorrelation() : DataError("correlation undefined for a constant sequence") {}
};

// Requests the library declines to compute (exhaustive enumeration too large,
// marginals not computable for a model).
class RefusedError : public Error {
public:
    using Error::Error;
};

class EnumerationRefused : public RefusedError {
public:
    EnumerationRefused(std::size_t v, std::size_t limit)
        : RefusedError("exhaustive enumeration refused for v=" + std::to_string(v) + " (limit " +
                       std::to_string(limit) + ")") {}
};

class ConfigError : public RefusedError {
public:
    using RefusedError::RefusedError;
};

} // namespace graphdist
