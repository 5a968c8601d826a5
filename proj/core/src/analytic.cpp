#include "isoprob/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "isoprob/errors.hpp"
#include "isoprob/specialfn.hpp"
#include "summation.hpp"

namespace isoprob {
namespace {

// The SC alternating sum may lose at most this factor (six digits).
constexpr double kMaxCancellation = 1e6;

// (2/alpha) theta^{-2/alpha}
double fading_prefactor(const ChannelParams& p) {
  return (2.0 / p.alpha) * std::pow(p.theta(), -2.0 / p.alpha);
}

double shadow_factor(const ChannelParams& p) {
  return std::exp(2.0 * p.sigma * p.sigma / (p.alpha * p.alpha));
}

// Gamma(x + l) for l = 0..count-1, from one gamma_fn call and the
// recurrence Gamma(x + l) = (x + l - 1) Gamma(x + l - 1).
std::vector<double> shifted_gammas(double x, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  g[0] = specialfn::gamma_fn(x);
  for (int l = 1; l < count; ++l) g[l] = g[l - 1] * (x + l - 1);
  return g;
}

// sum_{l<terms} Gamma(2/alpha + l) / l!, scaled by the prefactor. Shared by
// the plain Nakagami and MRC forms so that MRC(M=1) is the same arithmetic.
double fading_series_r2(const ChannelParams& p, int terms) {
  const double x = 2.0 / p.alpha;
  detail::CompensatedSum sum;
  double term = specialfn::gamma_fn(x);
  sum.add(term);
  for (int l = 1; l < terms; ++l) {
    term *= (x + l - 1) / l;
    sum.add(term);
  }
  return fading_prefactor(p) * sum.value();
}

void validate_params(const ChannelParams& p) { p.validate(); }

}  // namespace

void IsolationQuery::validate() const {
  params.validate();
  scheme.validate();
  if (!(node_density >= 0.0) || !std::isfinite(node_density)) {
    throw std::invalid_argument("node density must be a non-negative finite number");
  }
}

double expected_r2_shadow_only(const ChannelParams& params) {
  validate_params(params);
  const double disk = std::pow(params.k * params.ptx / (params.psi * params.w),
                               2.0 / params.alpha);
  return disk * shadow_factor(params);
}

double expected_r2_nakagami(const ChannelParams& params) {
  validate_params(params);
  return fading_series_r2(params, params.m);
}

double expected_r2_nakagami_shadow(const ChannelParams& params) {
  return expected_r2_nakagami(params) * shadow_factor(params);
}

double expected_r2_mrc(const ChannelParams& params, int branches) {
  validate_params(params);
  if (branches < 1) throw std::domain_error("expected_r2_mrc: M must be >= 1");
  return fading_series_r2(params, params.m * branches) * shadow_factor(params);
}

double expected_r2_sc(const ChannelParams& params, int branches, const BetaTable& beta) {
  validate_params(params);
  if (branches < 1) throw std::domain_error("expected_r2_sc: M must be >= 1");
  if (branches > kMaxScBranches) {
    throw std::domain_error("expected_r2_sc: M = " + std::to_string(branches) +
                            " exceeds the supported maximum of " +
                            std::to_string(kMaxScBranches));
  }
  if (beta.m() != params.m || beta.max_order() < branches) {
    throw std::invalid_argument("expected_r2_sc: beta table does not match (m, M)");
  }

  const int m = params.m;
  const double x = 2.0 / params.alpha;
  const std::vector<double> gammas = shifted_gammas(x, branches * (m - 1) + 1);

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(branches * (branches * (m - 1) + 1)));
  for (int h = 1; h <= branches; ++h) {
    const double sign = (h % 2 == 1) ? 1.0 : -1.0;
    const double weight = sign * specialfn::binomial(branches, h);
    const double log_h = std::log(static_cast<double>(h));
    for (int l = 0; l <= h * (m - 1); ++l) {
      const double b = beta(l, h);
      if (b == 0.0) continue;
      terms.push_back(weight * b * std::exp(-(x + l) * log_h) * gammas[l]);
    }
  }
  std::sort(terms.begin(), terms.end(),
            [](double a, double b) { return std::fabs(a) < std::fabs(b); });

  detail::CompensatedSum sum;
  for (double t : terms) sum.add(t);
  const double value = sum.value();
  if (!(value > 0.0) || sum.magnitude() > kMaxCancellation * value) {
    throw NumericalError("expected_r2_sc: alternating sum lost more than six digits (M = " +
                         std::to_string(branches) + ", m = " + std::to_string(m) + ")");
  }
  return fading_prefactor(params) * value * shadow_factor(params);
}

double expected_r2(const ChannelParams& params, const DiversityScheme& scheme) {
  scheme.validate();
  const DiversityScheme s = scheme.normalized();
  const bool shadowed = params.sigma > 0.0;
  switch (s.kind) {
    case DiversityScheme::Kind::kNone:
      return shadowed ? expected_r2_nakagami_shadow(params) : expected_r2_nakagami(params);
    case DiversityScheme::Kind::kMrc:
      return expected_r2_mrc(params, s.branches);
    case DiversityScheme::Kind::kSc:
      if (s.branches > kMaxScBranches) {
        throw std::domain_error("selection combining supports at most " +
                                std::to_string(kMaxScBranches) + " branches");
      }
      return expected_r2_sc(params, s.branches, build_beta_table(params.m, s.branches));
  }
  throw std::logic_error("unreachable diversity kind");
}

double isolation_probability_from_r2(double node_density, double er2) {
  if (node_density == 0.0) return 1.0;
  return std::exp(-node_density * std::numbers::pi * er2);
}

double isolation_probability(const IsolationQuery& query) {
  query.validate();
  if (query.node_density == 0.0) return 1.0;
  return isolation_probability_from_r2(query.node_density,
                                       expected_r2(query.params, query.scheme));
}

double min_density_for_isolation(const ChannelParams& params, const DiversityScheme& scheme,
                                 double target_p_i) {
  if (!(target_p_i > 0.0 && target_p_i < 1.0)) {
    throw std::domain_error("target isolation probability must lie in (0, 1)");
  }
  return -std::log(target_p_i) / (std::numbers::pi * expected_r2(params, scheme));
}

std::vector<std::pair<double, double>> density_spread_tradeoff(
    const ChannelParams& params, const DiversityScheme& scheme, double target_p_i,
    const std::vector<double>& sigma_grid) {
  if (sigma_grid.empty()) {
    throw std::invalid_argument("density_spread_tradeoff: sigma grid is empty");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(sigma_grid.size());
  for (double sigma : sigma_grid) {
    ChannelParams p = params;
    p.sigma = sigma;
    out.emplace_back(sigma, min_density_for_isolation(p, scheme, target_p_i));
  }
  return out;
}

}  // namespace isoprob
