#pragma once

#include <stdexcept>
#include <string>

namespace corpuskit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input or configuration. The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace corpuskit
