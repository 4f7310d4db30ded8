#pragma once

#include <stdexcept>
#include <string>

namespace clisp {

// Root of every diagnostic the toolchain throws. The CLI maps concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An external program (C compiler, macro host) is missing or failed.
class ToolError : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant; reaching this is a toolchain bug.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace clisp
