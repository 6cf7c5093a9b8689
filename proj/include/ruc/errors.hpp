#ifndef RUC_ERRORS_HPP
#define RUC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ruc {

/// Malformed or inconsistent input data (case files, profiles, options).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver backend failed, or returned something that does not survive checking.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solution violates an invariant the model is supposed to enforce.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ruc

#endif  // RUC_ERRORS_HPP
