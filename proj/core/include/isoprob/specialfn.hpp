#pragma once

// Real-valued special functions used by the closed forms and samplers.
// Everything here is pure and reentrant.

namespace isoprob::specialfn {

/// Gamma function for x > 0. Lanczos approximation, relative error below
/// 1e-12 on (0, 170]. Throws std::domain_error for x <= 0.
double gamma_fn(double x);

/// ln Gamma(x) for x > 0.
double log_gamma_fn(double x);

/// Regularized upper incomplete gamma Q(m, x) = Gamma(m, x) / Gamma(m) for
/// integer m >= 1, evaluated as the finite sum e^{-x} sum_{l<m} x^l / l!.
/// Large x is handled in log space.
double upper_incomplete_gamma_ratio(int m, double x);

/// ln(n!). Exact (integer product) for n <= 20.
double log_factorial(int n);

/// n! as a double; exact for n <= 22.
double factorial(int n);

/// Binomial coefficient C(n, k) as a double.
double binomial(int n, int k);

}  // namespace isoprob::specialfn
