#include "isoprob/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>

#include "isoprob/errors.hpp"

namespace isoprob {
namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

// Geometric panels after the first; the tail is abandoned once two panels
// in a row add less than this fraction of rel_tol to the running total.
constexpr int kMaxPanels = 400;
constexpr double kTailFraction = 1e-3;
constexpr int kQuietPanelsToStop = 2;

// Standard-normal range kept by the inner path-loss integral.
constexpr double kNormalCutoff = 40.0;
// Standard-normal tail mass beyond this is below 1e-300.
constexpr double kNegligibleTail = 37.0;

struct Segment {
  double a;
  double b;
  double value;
  double error;

  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment kronrod_segment(const auto& f, double a, double b) {
  double error = 0.0;
  // Depth 0: a single 15-point Kronrod estimate with its embedded Gauss
  // error estimate. At depth 0 Boost reports the error on the reference
  // interval [-1, 1], so it is rescaled here.
  const double q = Kronrod::integrate(f, a, b, 0, 0.0, &error);
  return {a, b, q, error * 0.5 * (b - a)};
}

// Globally adaptive Gauss-Kronrod: always bisect the segment with the
// largest error estimate until the summed error is below
// rel_tol * max(|value|, reference) or max_subdivisions is reached.
//
// Interior breakpoints, when given, seed the initial partition so that a
// feature narrower than the Kronrod node spacing cannot be stepped over.
template <typename F>
double integrate_panel(const F& f, double a, double b, const QuadratureSpec& spec,
                       double reference, std::vector<double> breakpoints = {}) {
  std::erase_if(breakpoints, [&](double x) { return !(x > a && x < b); });
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.insert(breakpoints.begin(), a);
  breakpoints.push_back(b);

  std::priority_queue<Segment> heap;
  double value = 0.0;
  double error = 0.0;
  int segments = 0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) continue;
    const Segment seg = kronrod_segment(f, breakpoints[i], breakpoints[i + 1]);
    heap.push(seg);
    value += seg.value;
    error += seg.error;
    ++segments;
  }

  const auto allowed = [&] { return spec.rel_tol * std::max(std::fabs(value), reference); };
  while (error > allowed() && segments < spec.max_subdivisions) {
    const Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // cannot split further
    heap.pop();
    const Segment left = kronrod_segment(f, worst.a, mid);
    const Segment right = kronrod_segment(f, mid, worst.b);
    heap.push(left);
    heap.push(right);
    ++segments;
    // Re-sum from the heap now and then to keep the running totals honest.
    if (segments % 64 == 0) {
      auto copy = heap;
      value = 0.0;
      error = 0.0;
      while (!copy.empty()) {
        value += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    } else {
      value += left.value + right.value - worst.value;
      error += left.error + right.error - worst.error;
    }
  }
  if (!std::isfinite(value) || error > allowed()) {
    throw NumericalError("adaptive quadrature did not reach rel_tol " +
                         std::to_string(spec.rel_tol) + " on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "] after " + std::to_string(segments) +
                         " subdivisions (error estimate " + std::to_string(error) +
                         ", value " + std::to_string(value) + ")");
  }
  return value;
}

// Integral over [0, inf) of (2/alpha) u^{2/alpha - 1} link(u) du, i.e. of
// 2 rho link(rho^alpha) d rho after u = rho^alpha. u_star is where the link
// probability changes character (mean SNR equal to the threshold).
//
// On [0, u_star] the variable t = (u / u_star)^{2/alpha} (that is rho^2 up
// to scale) removes the endpoint singularity of u^{2/alpha - 1}; beyond it
// panels double in width until the tail is negligible.
//
// A positive log_width marks a link probability that switches from one to
// zero within about log_width of log(u_star); the first two panels then get
// breakpoints across that band.
template <typename Link>
double radial_integral(const Link& link, double u_star, double alpha,
                       const QuadratureSpec& spec, double log_width = 0.0) {
  const double ex = 2.0 / alpha;
  std::vector<double> near_breaks;
  std::vector<double> far_breaks;
  if (log_width > 0.0) {
    for (double c : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      near_breaks.push_back(std::exp(-ex * c * log_width));
      far_breaks.push_back(u_star * std::exp(c * log_width));
    }
  }
  const auto near = [&](double t) { return link(u_star * std::pow(t, 0.5 * alpha)); };
  double total = std::pow(u_star, ex) * integrate_panel(near, 0.0, 1.0, spec, 0.0, near_breaks);

  const auto far = [&](double u) { return ex * std::pow(u, ex - 1.0) * link(u); };
  double lo = u_star;
  int quiet = 0;
  for (int panel = 0; panel < kMaxPanels; ++panel) {
    const double hi = 2.0 * lo;
    const double q = integrate_panel(far, lo, hi, spec, total,
                                     panel == 0 ? far_breaks : std::vector<double>{});
    total += q;
    if (q <= kTailFraction * spec.rel_tol * total) {
      if (++quiet >= kQuietPanelsToStop) return total;
    } else {
      quiet = 0;
    }
    lo = hi;
  }
  throw NumericalError("radial integral tail did not decay within " +
                       std::to_string(kMaxPanels) + " panels");
}

GaussHermiteRule compute_gauss_hermite(int order) {
  // Newton iteration on the orthonormal Hermite recurrence with the usual
  // asymptotic starting guesses for the largest roots.
  constexpr double kPiToMinusQuarter = 0.7511255444649425;
  constexpr double kEps = 1e-15;
  constexpr int kMaxIt = 100;

  const int n = order;
  GaussHermiteRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  auto& x = rule.nodes;
  auto& w = rule.weights;

  double z = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    int it = 0;
    for (; it < kMaxIt; ++it) {
      double p1 = kPiToMinusQuarter;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= kEps * std::max(1.0, std::fabs(z))) break;
    }
    if (it == kMaxIt) {
      throw NumericalError("Gauss-Hermite root " + std::to_string(i) + " of order " +
                           std::to_string(n) + " did not converge");
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  return rule;
}

void require_sigma(const ChannelParams& params, const char* fn) {
  if (!(params.sigma > 0.0)) {
    throw std::domain_error(std::string(fn) + ": requires sigma > 0");
  }
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (max_subdivisions < 1) throw std::invalid_argument("max_subdivisions must be >= 1");
  if (hermite_order < 8) throw std::invalid_argument("hermite_order must be >= 8");
}

double GaussHermiteRule::expectation(const std::function<double(double)>& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    acc += weights[i] * f(std::numbers::sqrt2 * nodes[i]);
  }
  return acc / std::sqrt(std::numbers::pi);
}

const GaussHermiteRule& gauss_hermite_rule(int order) {
  if (order < 1) throw std::invalid_argument("Gauss-Hermite order must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const GaussHermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<const GaussHermiteRule>(compute_gauss_hermite(order));
  return *slot;
}

double expected_r2_numeric_nofade(const ChannelParams& params, const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  require_sigma(params, "expected_r2_numeric_nofade");

  const double a_min = params.psi * params.w / params.ptx;
  const double log_a_min = std::log(a_min);
  QuadratureSpec inner_spec = spec;
  inner_spec.rel_tol = 0.1 * spec.rel_tol;

  // P[path loss >= psi w / ptx] at distance u^{1/alpha}, integrating the
  // lognormal density in the variable s with a = exp(mu + sigma s).
  const auto link = [&](double u) {
    const double rho = std::pow(u, 1.0 / params.alpha);
    const double mu = std::log(params.k) - std::log(u);
    const double s_min = (log_a_min - mu) / params.sigma;
    if (s_min >= kNegligibleTail) return 0.0;
    const double lo = std::max(s_min, -kNormalCutoff);
    const double hi = std::max(kNormalCutoff, lo + kNormalCutoff);
    const auto density = [&](double s) {
      const double a = std::exp(mu + params.sigma * s);
      return path_loss_pdf(a, rho, params) * a * params.sigma;
    };
    return integrate_panel(density, lo, hi, inner_spec, 0.0);
  };
  const double u_star = params.k * params.ptx / a_min;
  return radial_integral(link, u_star, params.alpha, spec, params.sigma);
}

double expected_r2_numeric_fading(const SuccessFunction& success, const ChannelParams& params,
                                  const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  const double snr_scale = params.k * params.ptx / params.w;
  const auto link = [&](double u) { return success(snr_scale / u); };
  return radial_integral(link, snr_scale / params.psi, params.alpha, spec);
}

double expected_r2_numeric_fading_shadow(const SuccessFunction& success,
                                         const ChannelParams& params,
                                         const QuadratureSpec& spec) {
  params.validate();
  spec.validate();
  require_sigma(params, "expected_r2_numeric_fading_shadow");
  const GaussHermiteRule& rule = gauss_hermite_rule(spec.hermite_order);
  const double base_scale = params.k * params.ptx / params.w;
  return rule.expectation([&](double x) {
    const double snr_scale = base_scale * std::exp(params.sigma * x);
    const auto link = [&](double u) { return success(snr_scale / u); };
    return radial_integral(link, snr_scale / params.psi, params.alpha, spec);
  });
}

double success_prob_real_m(double y, double m, double psi) {
  if (!(y > 0.0)) throw std::domain_error("success_prob_real_m: y must be positive");
  if (!(m >= 0.5)) throw std::domain_error("success_prob_real_m: m must be >= 0.5");
  if (!(psi > 0.0)) throw std::domain_error("success_prob_real_m: psi must be positive");
  return boost::math::gamma_q(m, m * psi / y);
}

SuccessFunction make_success_function(const ChannelParams& params,
                                      const DiversityScheme& scheme) {
  params.validate();
  scheme.validate();
  const DiversityScheme s = scheme.normalized();
  switch (s.kind) {
    case DiversityScheme::Kind::kNone:
      return [params](double y) { return success_prob_nakagami(y, params); };
    case DiversityScheme::Kind::kMrc:
      return [params, s](double y) { return success_prob_mrc(y, s.branches, params); };
    case DiversityScheme::Kind::kSc: {
      auto beta = std::make_shared<const BetaTable>(build_beta_table(params.m, s.branches));
      return [params, s, beta](double y) {
        return success_prob_sc(y, s.branches, params, *beta);
      };
    }
  }
  throw std::logic_error("unreachable diversity kind");
}

double expected_r2_numeric(const ChannelParams& params, const DiversityScheme& scheme,
                           const QuadratureSpec& spec) {
  const SuccessFunction success = make_success_function(params, scheme);
  if (params.sigma > 0.0) return expected_r2_numeric_fading_shadow(success, params, spec);
  return expected_r2_numeric_fading(success, params, spec);
}

double expected_r2_numeric_real_m(const ChannelParams& params, double m_real,
                                  const QuadratureSpec& spec) {
  if (!(m_real >= 0.5)) throw std::domain_error("real Nakagami m must be >= 0.5");
  const double psi = params.psi;
  const SuccessFunction success = [m_real, psi](double y) {
    return success_prob_real_m(y, m_real, psi);
  };
  if (params.sigma > 0.0) return expected_r2_numeric_fading_shadow(success, params, spec);
  return expected_r2_numeric_fading(success, params, spec);
}

}  // namespace isoprob
