#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rcslab {

/// A request would exceed the statevector qubit cap.
class resource_limit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed circuit / sample / key document. `position` is the byte offset
/// into the input where parsing failed (0 for semantic errors).
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t position = 0)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A fit was requested on data that cannot support it (too few points,
/// non-positive means, zero spread in the abscissa).
class degenerate_fit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator output is statistically consistent with a value outside its
/// meaningful domain (e.g. purity <= 0).
class indeterminate_result_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rcslab
