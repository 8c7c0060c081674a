#ifndef SHILLSIM_ERRORS_HPP
#define SHILLSIM_ERRORS_HPP

#include <stdexcept>

namespace shillsim {

// Bad arguments or configuration supplied by the caller.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input data failed parsing or validation.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric computation left its valid domain (divergence, NaN, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace shillsim

#endif
