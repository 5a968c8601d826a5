#pragma once

#include <functional>
#include <vector>

#include "isoprob/channel.hpp"

namespace isoprob {

/// Knobs for the numerical evaluation of the E[R^2] integrals.
struct QuadratureSpec {
  double rel_tol = 1e-9;
  int max_subdivisions = 1 << 15;
  int hermite_order = 64;

  void validate() const;
};

/// Success probability as a function of the average SNR y.
using SuccessFunction = std::function<double(double)>;

/// Gauss-Hermite nodes and weights for the weight function e^{-t^2}.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// E[f(Z)] for standard normal Z.
  double expectation(const std::function<double(double)>& f) const;
};

/// Cached rule of the given order; computed once, shared read-only.
const GaussHermiteRule& gauss_hermite_rule(int order);

/// E[R^2] for path loss with lognormal shadowing and no fading, as the
/// nested integral over distance and the path-loss density. Requires sigma > 0.
double expected_r2_numeric_nofade(const ChannelParams& params, const QuadratureSpec& spec = {});

/// Radial integral of 2 rho P_S(k ptx rho^-alpha / w) over [0, inf).
/// Shadowing is ignored.
double expected_r2_numeric_fading(const SuccessFunction& success, const ChannelParams& params,
                                  const QuadratureSpec& spec = {});

/// The same radial integral averaged over lognormal shadowing with a
/// Gauss-Hermite rule in the standard-normal shadowing variable. Requires sigma > 0.
double expected_r2_numeric_fading_shadow(const SuccessFunction& success,
                                         const ChannelParams& params,
                                         const QuadratureSpec& spec = {});

/// Gamma(m, m psi / y) / Gamma(m) for real m >= 0.5.
double success_prob_real_m(double y, double m, double psi);

/// Success function for an integer-m channel and a diversity scheme.
SuccessFunction make_success_function(const ChannelParams& params, const DiversityScheme& scheme);

/// Numerical E[R^2] for (params, scheme): radial-only when sigma == 0,
/// shadow-averaged otherwise.
double expected_r2_numeric(const ChannelParams& params, const DiversityScheme& scheme,
                           const QuadratureSpec& spec = {});

/// Numerical E[R^2] for a real Nakagami parameter with no diversity.
/// params.m is ignored.
double expected_r2_numeric_real_m(const ChannelParams& params, double m_real,
                                  const QuadratureSpec& spec = {});

}  // namespace isoprob
