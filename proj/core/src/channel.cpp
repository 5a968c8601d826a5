#include "isoprob/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "isoprob/specialfn.hpp"
#include "summation.hpp"

namespace isoprob {
namespace {

constexpr double kLogSpaceThreshold = 700.0;

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_snr(double y, const char* fn) {
  if (!(y > 0.0)) {
    throw std::domain_error(std::string(fn) + ": average SNR must be positive");
  }
}

}  // namespace

void ChannelParams::validate() const {
  require(ptx > 0.0 && std::isfinite(ptx), "ptx must be positive");
  require(w > 0.0 && std::isfinite(w), "w must be positive");
  require(k > 0.0 && std::isfinite(k), "k must be positive");
  require(psi > 0.0 && std::isfinite(psi), "psi must be positive");
  require(alpha > 0.0 && std::isfinite(alpha), "alpha must be positive");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be non-negative");
  require(m >= 1, "m must be a positive integer");
}

double ChannelParams::theta() const { return m * psi * w / (k * ptx); }

double ChannelParams::mean_snr(double rho) const {
  return k * ptx * std::pow(rho, -alpha) / w;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double sigma_from_db(double sigma_db) { return sigma_db * std::numbers::ln10 / 10.0; }

DiversityScheme DiversityScheme::normalized() const {
  if (branches == 1) return none();
  return *this;
}

void DiversityScheme::validate() const {
  require(branches >= 1, "diversity order M must be >= 1");
  require(kind != Kind::kNone || branches == 1, "scheme 'none' takes exactly one branch");
}

std::string DiversityScheme::name() const {
  switch (kind) {
    case Kind::kNone:
      return "none";
    case Kind::kMrc:
      return "mrc";
    case Kind::kSc:
      return "sc";
  }
  return "none";
}

DiversityScheme::Kind parse_scheme_kind(const std::string& text) {
  if (text == "none") return DiversityScheme::Kind::kNone;
  if (text == "mrc") return DiversityScheme::Kind::kMrc;
  if (text == "sc") return DiversityScheme::Kind::kSc;
  throw std::invalid_argument("unknown diversity scheme '" + text + "'");
}

BetaTable::BetaTable(int m, int max_order, std::vector<std::vector<double>> rows)
    : m_(m), max_order_(max_order), rows_(std::move(rows)) {}

double BetaTable::operator()(int k, int n) const {
  if (n < 0 || n > max_order_ || k < 0) return 0.0;
  const auto& r = rows_[static_cast<std::size_t>(n)];
  return static_cast<std::size_t>(k) < r.size() ? r[static_cast<std::size_t>(k)] : 0.0;
}

BetaTable build_beta_table(int m, int max_order) {
  require(m >= 1, "build_beta_table: m must be >= 1");
  require(max_order >= 1, "build_beta_table: order must be >= 1");

  std::vector<double> inv_factorial(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) inv_factorial[j] = 1.0 / specialfn::factorial(j);

  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(max_order) + 1);
  rows.push_back({1.0});
  for (int n = 1; n <= max_order; ++n) {
    const auto& prev = rows.back();
    const int prev_top = (n - 1) * (m - 1);
    const int top = n * (m - 1);
    std::vector<double> row(static_cast<std::size_t>(top) + 1, 0.0);
    for (int k = 0; k <= top; ++k) {
      const int lo = std::max(0, k - m + 1);
      const int hi = std::min(k, prev_top);
      double acc = 0.0;
      for (int i = lo; i <= hi; ++i) acc += prev[i] * inv_factorial[k - i];
      row[k] = acc;
    }
    rows.push_back(std::move(row));
  }
  return BetaTable(m, max_order, std::move(rows));
}

double success_prob_nakagami(double y, const ChannelParams& params) {
  require_snr(y, "success_prob_nakagami");
  return specialfn::upper_incomplete_gamma_ratio(params.m, params.m * params.psi / y);
}

double success_prob_mrc(double y, int branches, const ChannelParams& params) {
  require_snr(y, "success_prob_mrc");
  if (branches < 1) throw std::domain_error("success_prob_mrc: M must be >= 1");
  return specialfn::upper_incomplete_gamma_ratio(params.m * branches,
                                                 params.m * params.psi / y);
}

double success_prob_sc(double y, int branches, const ChannelParams& params,
                       const BetaTable& beta) {
  require_snr(y, "success_prob_sc");
  if (branches < 1) throw std::domain_error("success_prob_sc: M must be >= 1");
  if (beta.m() != params.m || beta.max_order() < branches) {
    throw std::invalid_argument("success_prob_sc: beta table does not match (m, M)");
  }
  const int m = params.m;
  const double x = m * params.psi / y;
  const bool log_space = x > kLogSpaceThreshold;
  const double log_x = std::log(x);

  detail::CompensatedSum outer;
  for (int n = 1; n <= branches; ++n) {
    detail::CompensatedSum inner;
    if (log_space) {
      for (int k = 0; k <= n * (m - 1); ++k) {
        const double b = beta(k, n);
        if (b > 0.0) inner.add(std::exp(-n * x + k * log_x + std::log(b)));
      }
    } else {
      const double damp = std::exp(-n * x);
      double power = 1.0;
      for (int k = 0; k <= n * (m - 1); ++k) {
        inner.add(beta(k, n) * power * damp);
        power *= x;
      }
    }
    const double sign = (n % 2 == 1) ? 1.0 : -1.0;
    outer.add(sign * specialfn::binomial(branches, n) * inner.value());
  }
  const double p = outer.value();
  return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

double success_prob(double y, const ChannelParams& params, const DiversityScheme& scheme) {
  const DiversityScheme s = scheme.normalized();
  switch (s.kind) {
    case DiversityScheme::Kind::kNone:
      return success_prob_nakagami(y, params);
    case DiversityScheme::Kind::kMrc:
      return success_prob_mrc(y, s.branches, params);
    case DiversityScheme::Kind::kSc:
      return success_prob_sc(y, s.branches, params, build_beta_table(params.m, s.branches));
  }
  return 0.0;
}

double path_loss_pdf(double a, double rho, const ChannelParams& params) {
  if (params.sigma == 0.0) {
    throw std::domain_error("path_loss_pdf: sigma = 0 is a point mass, not a density");
  }
  if (!(a > 0.0) || !(rho > 0.0)) {
    throw std::domain_error("path_loss_pdf: a and rho must be positive");
  }
  const double median_log = std::log(params.k) - params.alpha * std::log(rho);
  const double z = (std::log(a) - median_log) / params.sigma;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * params.sigma * a);
}

}  // namespace isoprob
