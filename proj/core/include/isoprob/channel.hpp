#pragma once

#include <string>
#include <vector>

namespace isoprob {

/// Link-level radio parameters, all stored in linear units.
///
/// The mean path loss at distance rho is k * rho^-alpha; sigma is the
/// standard deviation of the natural log of the path loss; m is the
/// Nakagami severity (integer on every closed-form path).
struct ChannelParams {
  double ptx = 1.0;    // transmit power, mW
  double w = 0.01;     // noise power, mW
  double k = 10.0;     // path-loss constant
  double psi = 10.0;   // SNR threshold
  double alpha = 4.0;  // path-loss exponent
  double sigma = 0.0;  // lognormal spread, natural-log units
  int m = 1;           // Nakagami severity

  /// Throws std::invalid_argument if any field is outside its domain.
  void validate() const;

  /// m * psi * w / (k * ptx): the recurring argument of the closed forms.
  double theta() const;

  /// k * ptx * rho^-alpha / w, the average SNR at distance rho before
  /// shadowing.
  double mean_snr(double rho) const;

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

/// 10^(db/10).
double db_to_linear(double db);

/// Converts a shadowing spread given in dB to natural-log units.
double sigma_from_db(double sigma_db);

/// Receive diversity: none, maximal ratio combining or selection combining
/// over `branches` i.i.d. Nakagami branches with a common average SNR.
struct DiversityScheme {
  enum class Kind { kNone, kMrc, kSc };

  Kind kind = Kind::kNone;
  int branches = 1;

  static DiversityScheme none() { return {}; }
  static DiversityScheme mrc(int branches) { return {Kind::kMrc, branches}; }
  static DiversityScheme sc(int branches) { return {Kind::kSc, branches}; }

  /// A single branch is the same receiver whatever the combiner.
  DiversityScheme normalized() const;

  void validate() const;
  std::string name() const;

  friend bool operator==(const DiversityScheme&, const DiversityScheme&) = default;
};

/// Parses "none", "mrc" or "sc" (with the branch count supplied separately).
DiversityScheme::Kind parse_scheme_kind(const std::string& text);

/// Coefficients beta(k, n) of [sum_{k<m} x^k / k!]^n, for n = 0..max_order.
class BetaTable {
 public:
  BetaTable(int m, int max_order, std::vector<std::vector<double>> rows);

  int m() const { return m_; }
  int max_order() const { return max_order_; }

  /// beta(k, n); zero outside 0 <= k <= n (m - 1).
  double operator()(int k, int n) const;

  /// Row n, indices 0..n(m-1).
  const std::vector<double>& row(int n) const { return rows_.at(n); }

 private:
  int m_;
  int max_order_;
  std::vector<std::vector<double>> rows_;
};

/// Builds the table by the multinomial recursion
/// beta(k, n) = sum_{i = k-m+1}^{k} beta(i, n-1) / (k - i)!, where i is
/// restricted to 0 <= i <= (n-1)(m-1).
BetaTable build_beta_table(int m, int max_order);

/// P[gamma >= psi] for Nakagami-m fading at average SNR y.
double success_prob_nakagami(double y, const ChannelParams& params);

/// Same with an M-branch MRC receiver (output SNR ~ Gamma(mM, y/m)).
double success_prob_mrc(double y, int branches, const ChannelParams& params);

/// Same with an M-branch selection combiner, via the beta expansion.
/// `beta` must be built for params.m and an order of at least `branches`.
double success_prob_sc(double y, int branches, const ChannelParams& params,
                       const BetaTable& beta);

/// Success probability for any scheme. Builds a beta table when needed.
double success_prob(double y, const ChannelParams& params, const DiversityScheme& scheme);

/// Lognormal density of the linear path loss `a` at distance rho.
/// Throws std::domain_error when sigma == 0 (the law is a point mass).
double path_loss_pdf(double a, double rho, const ChannelParams& params);

}  // namespace isoprob
