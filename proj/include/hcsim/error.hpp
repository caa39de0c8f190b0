#pragma once

#include <stdexcept>
#include <string>

namespace hcsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (bad label,
// non-power-of-two processor count, out-of-bounds alias, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid user configuration (CLI flags, constants file, chip mapping).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class OutOfMemory : public Error {
 public:
  using Error::Error;
};

// A remote spawn could not be completed; surfaced to the guest thread.
class SpawnFailed : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class InvalidClosure : public Error {
 public:
  using Error::Error;
};

class MalformedClosure : public Error {
 public:
  using Error::Error;
};

// Engine-level bug traps: scheduling in the past, deadlock.
class SimulationError : public Error {
 public:
  using Error::Error;
};

class SingularFit : public Error {
 public:
  using Error::Error;
};

class NoRoot : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace hcsim
