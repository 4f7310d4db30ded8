#pragma once

#include <string>
#include <vector>

#include "clisp/frontend.hpp"

namespace clisp {

struct IRModuleText {
  std::string text;
  std::vector<std::string> symbols;  // defined and declared functions, in emission order
};

// Raised when an entry shim cannot be built for the requested function.
class EntryError : public Error {
 public:
  using Error::Error;
};

// int8 -> i8, int -> i32, int64 -> i64, float32 -> float, float64 -> double,
// any pointer -> ptr, struct Name -> %Name.
std::string llvm_type(const Type& type);

/// Lowers a typechecked module to textual LLVM IR with opaque pointers.
/// Locals live in entry-block allocas; no target triple is emitted.
IRModuleText emit(const TypedModule& module);

// An LLVM `main` that calls `main_fn` (which must be () -> int) and returns
// its result. Append to the text produced by emit().
std::string emit_entry_shim(const std::string& main_fn, const TypedModule& module);

}  // namespace clisp
