#pragma once

#include <stdexcept>
#include <string>

namespace spsim {

/// Base class for all errors raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A persisted file does not match its documented layout.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// Weight collapse and other unrecoverable numerical failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace spsim
