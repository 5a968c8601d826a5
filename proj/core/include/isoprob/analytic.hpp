#pragma once

#include <utility>
#include <vector>

#include "isoprob/channel.hpp"

namespace isoprob {

/// A single isolation-probability evaluation point.
struct IsolationQuery {
  ChannelParams params;
  DiversityScheme scheme;
  double node_density = 0.0;  // nodes per m^2

  void validate() const;
};

/// Largest diversity order accepted by the selection-combining closed form;
/// past this the alternating binomial sum is not trustworthy in doubles.
inline constexpr int kMaxScBranches = 16;

/// (k ptx / (psi w))^{2/alpha} e^{2 sigma^2 / alpha^2}: path loss and
/// shadowing only, no small-scale fading.
double expected_r2_shadow_only(const ChannelParams& params);

/// E[R^2] under Nakagami-m fading without shadowing (sigma is ignored).
double expected_r2_nakagami(const ChannelParams& params);

/// E[R^2] under Nakagami-m fading with lognormal shadowing.
double expected_r2_nakagami_shadow(const ChannelParams& params);

/// E[R^2] with an M-branch MRC receiver, shadowing included.
double expected_r2_mrc(const ChannelParams& params, int branches);

/// E[R^2] with an M-branch selection combiner, shadowing included.
/// Throws NumericalError if the alternating sum cancels away more than six
/// significant digits, and std::domain_error for M > kMaxScBranches.
double expected_r2_sc(const ChannelParams& params, int branches, const BetaTable& beta);

/// The single dispatch point from (scheme, sigma) to the closed forms above.
double expected_r2(const ChannelParams& params, const DiversityScheme& scheme);

/// exp(-lambda pi E[R^2]).
double isolation_probability(const IsolationQuery& query);

/// exp(-lambda pi er2), for callers that already hold E[R^2].
double isolation_probability_from_r2(double node_density, double er2);

/// Smallest node density whose isolation probability is at most target_p_i.
double min_density_for_isolation(const ChannelParams& params, const DiversityScheme& scheme,
                                 double target_p_i);

/// (sigma, lambda(sigma)) pairs holding the isolation probability at target_p_i.
std::vector<std::pair<double, double>> density_spread_tradeoff(
    const ChannelParams& params, const DiversityScheme& scheme, double target_p_i,
    const std::vector<double>& sigma_grid);

}  // namespace isoprob
