#pragma once

#include <stdexcept>
#include <string>

namespace gstab {

// Base class for failures raised by the library. Precondition violations on
// plain arguments use std::invalid_argument instead.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A simulated path left the finite range (non-finite state or magnitude cap).
class IntegrationError : public Error {
public:
    using Error::Error;
};

// Reading or writing files failed.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gstab
