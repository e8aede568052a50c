#pragma once

#include <stdexcept>
#include <string>

namespace seqfluct {

enum class ErrorKind {
  validation,    // rejected input or parameter
  dimension,     // mismatched alphabet sizes or sequence lengths
  malformed,     // sequence is not an outcome of the model
  infeasible,    // (t, u, r) has no nonnegative integer block solution
  inapplicable,  // transformation precondition failed
  guard,         // enumeration or resource guard exceeded
  invariant,     // hard invariant violated (implementation bug)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

/// Process exit code for an error kind: 2 validation, 3 invariant, 4 guard.
int exit_code(ErrorKind kind) noexcept;

}  // namespace seqfluct
