#pragma once

#include <stdexcept>
#include <string>

namespace wifisense {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid parameter or configuration (bad ranges, violated invariants).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Dimension or length mismatch between inputs.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Query outside the supported span (time out of keyframe range, batch
// longer than signal, ...).
class RangeError : public Error {
public:
    explicit RangeError(const std::string& msg) : Error(msg) {}
};

// Malformed input file contents.
class DataFormatError : public Error {
public:
    explicit DataFormatError(const std::string& msg) : Error(msg) {}
};

// Numerically undefined result (division by zero pilot, non-finite output).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

}  // namespace wifisense
