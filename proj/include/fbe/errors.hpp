#ifndef FBE_ERRORS_HPP
#define FBE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fbe {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a precondition.
class invalid_input : public error {
 public:
  using error::error;
};

/// A computation produced a non-finite value. Kept distinct from
/// invalid_input so callers can tell overflow apart from bad arguments.
class numeric_error : public error {
 public:
  using error::error;
};

/// A requested variant is not implemented.
class unsupported_feature : public error {
 public:
  using error::error;
};

/// An iterative routine ran out of iterations. Carries the best estimate
/// obtained so far.
class convergence_failure : public error {
 public:
  convergence_failure(const std::string& what, double best)
      : error(what), best_estimate(best) {}
  double best_estimate;
};

}  // namespace fbe

#endif
