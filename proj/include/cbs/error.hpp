#pragma once

#include <stdexcept>
#include <string>

namespace cbs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or flag combinations.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data that violates a documented contract.
class DataError : public Error {
public:
    using Error::Error;
};

/// Unreadable inputs or failed writes.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace cbs
