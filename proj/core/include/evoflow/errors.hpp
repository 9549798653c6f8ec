#pragma once

#include <stdexcept>
#include <string>

namespace evoflow {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated a precondition: bad argument, mismatched spaces,
/// invalid configuration. Maps to CLI exit code 2.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(what) {}
};

/// A configured cap was exceeded (group closure size, dense-matrix
/// dimension, product enumeration count). Maps to CLI exit code 3.
class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& what) : Error(what) {}
};

/// A computation produced non-finite values, diverged, or failed to
/// converge within budget. Maps to CLI exit code 3.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

} // namespace evoflow
