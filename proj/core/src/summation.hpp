#pragma once

#include <cmath>

namespace isoprob::detail {

// Neumaier's variant of Kahan summation; also tracks the sum of magnitudes
// so callers can tell how much cancellation happened.
class CompensatedSum {
 public:
  void add(double term) {
    const double t = sum_ + term;
    if (std::fabs(sum_) >= std::fabs(term)) {
      comp_ += (sum_ - t) + term;
    } else {
      comp_ += (term - t) + sum_;
    }
    sum_ = t;
    magnitude_ += std::fabs(term);
  }

  double value() const { return sum_ + comp_; }
  double magnitude() const { return magnitude_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  double magnitude_ = 0.0;
};

}  // namespace isoprob::detail
