#pragma once

#include <stdexcept>
#include <string>

namespace isoprob {

// Raised when a numerical routine cannot deliver its accuracy contract:
// quadrature that fails to converge, or an alternating sum that has lost
// too many significant digits. Parameter problems use std::domain_error /
// std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace isoprob
