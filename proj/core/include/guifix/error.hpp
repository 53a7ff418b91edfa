#pragma once

#include <stdexcept>
#include <string>

namespace guifix {

/// Base class for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace guifix
