#pragma once

#include <string>

namespace isoprob {

/// Shortest round-trip decimal form of a double, '.' separator, never
/// locale dependent.
std::string format_number(double value);

}  // namespace isoprob
