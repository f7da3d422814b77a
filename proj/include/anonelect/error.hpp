#pragma once

#include <stdexcept>
#include <string>

namespace anonelect {

struct Error : std::runtime_error {
  enum class Code {
    kInvalidInput,   // malformed document / arguments
    kValidation,     // structural validation failed (ports, connectivity, ...)
    kPrecondition,   // operation precondition violated
    kBudget,         // configured resource cap exceeded
    kProtocol,       // memory state inconsistent with the protocol
  };

  Error(Code c, const std::string& what) : std::runtime_error(what), code(c) {}
  Code code;
};

}  // namespace anonelect
