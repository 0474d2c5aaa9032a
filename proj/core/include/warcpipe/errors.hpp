#pragma once

#include <stdexcept>
#include <string>

namespace warcpipe {

// Root of everything the library throws on purpose.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A value violates a domain invariant (bad crawl id, malformed UUID, ...).
class ValidationError : public Error {
  public:
    using Error::Error;
};

// Configuration that cannot be used: detected at startup, maps to exit code 1.
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Model files missing or corrupt.
class ModelError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class IoError : public Error {
  public:
    using Error::Error;
};

// A remote or local segment could not be opened after all retry attempts.
class FetchError : public IoError {
  public:
    using IoError::IoError;
};

}  // namespace warcpipe
