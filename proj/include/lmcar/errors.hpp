#pragma once

#include <stdexcept>
#include <string>

namespace lmcar {

/// Raised for malformed or inconsistent input data (files, shapes, labels).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a computation produces a non-finite intermediate value.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lmcar
