#pragma once

#include <stdexcept>

namespace locomip {

/// Malformed or schema-violating input document.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent optimization model (bad bounds, underivable big-M, ...).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace locomip
