#ifndef QTRAJ_ERRORS_HPP
#define QTRAJ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qtraj {

// Error categories map onto CLI exit codes (2/3/4).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad inputs: malformed models, violated preconditions, out-of-domain parameters.
struct ValidationError : Error {
  using Error::Error;
};

// Numerical failure at runtime: vanishing traces, frozen filters, rank ambiguity.
struct NumericalError : Error {
  using Error::Error;
};

// File system and parse failures.
struct IoError : Error {
  using Error::Error;
};

}  // namespace qtraj

#endif
