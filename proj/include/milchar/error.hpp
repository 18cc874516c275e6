#pragma once

#include <stdexcept>
#include <string>

namespace milchar {

// Base of everything the library throws on bad input or failed computation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller asked for something that makes no sense (bad flag, unknown name).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Input data violates a format or invariant; also used for I/O failures.
class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace milchar
