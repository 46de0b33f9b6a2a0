#pragma once

#include <stdexcept>
#include <string>

namespace cltrack {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller violated an operation's precondition (bad shape, out-of-order frame, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or malformed input file.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numeric failure: non-finite values where finite ones are required.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace cltrack
