// End-to-end checks of the closed forms against quadrature, simulation and
// each other. Prints one PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cli.hpp"
#include "isoprob/analytic.hpp"
#include "isoprob/channel.hpp"
#include "isoprob/errors.hpp"
#include "isoprob/quadrature.hpp"
#include "isoprob/simulator.hpp"

namespace {

using namespace isoprob;
using Clock = std::chrono::steady_clock;
using Rational = boost::multiprecision::cpp_rational;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

ChannelParams link_budget(int m, double alpha, double sigma) {
  ChannelParams p;
  p.ptx = 1.0;
  p.w = 0.01;
  p.k = 10.0;
  p.psi = 10.0;
  p.alpha = alpha;
  p.sigma = sigma;
  p.m = m;
  return p;
}

struct Cell {
  ChannelParams params;
  DiversityScheme scheme;
};

std::string describe(const Cell& c) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "m=%d %s%d alpha=%g sigma=%g", c.params.m,
                c.scheme.name().c_str(), c.scheme.branches, c.params.alpha, c.params.sigma);
  return buf;
}

// m in {1,2,4}, M in {1,2,4}, {none, MRC, SC}, alpha in {2,3,4,6}, sigma in {0,1,2}.
std::vector<Cell> oracle_grid() {
  std::vector<Cell> cells;
  for (int m : {1, 2, 4}) {
    for (double alpha : {2.0, 3.0, 4.0, 6.0}) {
      for (double sigma : {0.0, 1.0, 2.0}) {
        const ChannelParams p = link_budget(m, alpha, sigma);
        cells.push_back({p, DiversityScheme::none()});
        for (int branches : {1, 2, 4}) {
          cells.push_back({p, DiversityScheme::mrc(branches)});
          cells.push_back({p, DiversityScheme::sc(branches)});
        }
      }
    }
  }
  return cells;
}

int failures = 0;

void report(int criterion, bool pass, const std::string& summary) {
  std::printf("%s  criterion %d  %s\n", pass ? "PASS" : "FAIL", criterion, summary.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

void closed_form_vs_quadrature() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string worst_cell;
  int cells = 0;
  bool ok = true;
  for (const Cell& c : oracle_grid()) {
    try {
      const double closed = expected_r2(c.params, c.scheme);
      const double numeric = expected_r2_numeric(c.params, c.scheme);
      const double e = rel_err(closed, numeric);
      if (e > worst) {
        worst = e;
        worst_cell = describe(c);
      }
      ++cells;
    } catch (const std::exception& e) {
      std::printf("      %s: %s\n", describe(c).c_str(), e.what());
      ok = false;
    }
  }
  // Path loss and shadowing with no fading: closed form vs the nested integral.
  for (double alpha : {2.0, 3.0, 4.0, 6.0}) {
    for (double sigma : {1.0, 2.0}) {
      const ChannelParams p = link_budget(1, alpha, sigma);
      const double e = rel_err(expected_r2_shadow_only(p), expected_r2_numeric_nofade(p));
      if (e > worst) {
        worst = e;
        worst_cell = "no fading alpha=" + fmt("%g", alpha) + " sigma=" + fmt("%g", sigma);
      }
      ++cells;
    }
  }
  const double elapsed = seconds_since(start);
  ok = ok && worst <= 1e-6 && elapsed < 60.0;
  report(1, ok,
         "closed form vs quadrature: " + std::to_string(cells) + " cells, max rel err " +
             fmt("%.2e", worst) + " (" + worst_cell + "), " + fmt("%.1f s", elapsed));
}

void reduction_identities() {
  double worst_branch = 0.0;
  double worst_sigma0 = 0.0;
  double worst_factor = 0.0;
  for (int m = 1; m <= 6; ++m) {
    for (double alpha : {2.0, 2.5, 3.0, 4.0, 6.0}) {
      for (double sigma : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        const ChannelParams p = link_budget(m, alpha, sigma);
        for (double lambda : {1e-4, 1e-3, 1e-2}) {
          const double none = isolation_probability({p, DiversityScheme::none(), lambda});
          const double mrc = isolation_probability({p, DiversityScheme::mrc(1), lambda});
          const double sc = isolation_probability({p, DiversityScheme::sc(1), lambda});
          worst_branch = std::max({worst_branch, rel_err(mrc, none), rel_err(sc, none)});
        }
        ChannelParams flat = p;
        flat.sigma = 0.0;
        worst_sigma0 = std::max(
            worst_sigma0, rel_err(expected_r2_nakagami_shadow(flat), expected_r2_nakagami(flat)));
        const double factor = std::exp(2.0 * sigma * sigma / (alpha * alpha));
        worst_factor = std::max(
            worst_factor, rel_err(expected_r2_shadow_only(p) / expected_r2_shadow_only(flat), factor));
        const BetaTable beta = build_beta_table(m, 4);
        for (const DiversityScheme& s :
             {DiversityScheme::none(), DiversityScheme::mrc(2), DiversityScheme::mrc(4),
              DiversityScheme::sc(2), DiversityScheme::sc(4)}) {
          worst_factor =
              std::max(worst_factor, rel_err(expected_r2(p, s) / expected_r2(flat, s), factor));
        }
        worst_factor = std::max(
            worst_factor, rel_err(expected_r2_sc(p, 3, beta) / expected_r2_sc(flat, 3, beta), factor));
      }
    }
  }
  const bool ok = worst_branch <= 1e-12 && worst_sigma0 <= 1e-12 && worst_factor <= 1e-12;
  report(2, ok,
         fmt("reduction identities: single-branch %.1e, sigma=0 %.1e, shadowing factor %.1e",
             worst_branch, worst_sigma0, worst_factor));
}

std::vector<Rational> truncated_exp_power(int m, int n) {
  std::vector<Rational> base(static_cast<std::size_t>(m));
  Rational f = 1;
  for (int k = 0; k < m; ++k) {
    if (k > 0) f *= k;
    base[k] = Rational(1) / f;
  }
  std::vector<Rational> acc{Rational(1)};
  for (int i = 0; i < n; ++i) {
    std::vector<Rational> next(acc.size() + base.size() - 1, Rational(0));
    for (std::size_t a = 0; a < acc.size(); ++a) {
      for (std::size_t b = 0; b < base.size(); ++b) next[a + b] += acc[a] * base[b];
    }
    acc = std::move(next);
  }
  return acc;
}

void beta_and_selection() {
  double worst_beta = 0.0;
  double worst_sc = 0.0;
  for (int m = 1; m <= 6; ++m) {
    const BetaTable beta = build_beta_table(m, 6);
    for (int n = 0; n <= 6; ++n) {
      const std::vector<Rational> exact = truncated_exp_power(m, n);
      for (int k = 0; k < static_cast<int>(exact.size()); ++k) {
        worst_beta = std::max(worst_beta, rel_err(beta(k, n), static_cast<double>(exact[k])));
      }
    }
    const ChannelParams p = link_budget(m, 4.0, 0.0);
    for (int branches = 1; branches <= 6; ++branches) {
      for (int i = 0; i < 100; ++i) {
        const double y = p.psi * std::pow(10.0, -2.0 + 5.0 * i / 99.0);
        const double single = success_prob_nakagami(y, p);
        const double expected = 1.0 - std::pow(1.0 - single, branches);
        worst_sc = std::max(worst_sc, std::abs(success_prob_sc(y, branches, p, beta) - expected));
      }
    }
  }
  report(3, worst_beta <= 1e-12 && worst_sc <= 1e-10,
         fmt("beta table vs exact convolution max rel err %.1e; SC vs 1-(1-P)^M max abs err %.1e",
             worst_beta, worst_sc));
}

void monte_carlo_vs_analytic() {
  const auto start = Clock::now();
  std::vector<Cell> cells;
  for (int m : {1, 2, 4}) {
    for (const DiversityScheme& s :
         {DiversityScheme::none(), DiversityScheme::mrc(2), DiversityScheme::sc(2)}) {
      cells.push_back({link_budget(m, 4.0, 0.0), s});
    }
  }
  cells.push_back({link_budget(2, 4.0, 0.0), DiversityScheme::sc(4)});
  cells.push_back({link_budget(2, 4.0, 2.0), DiversityScheme::none()});
  cells.push_back({link_budget(2, 4.0, 2.0), DiversityScheme::mrc(2)});

  int within = 0;
  for (const Cell& c : cells) {
    SimConfig config;
    config.params = c.params;
    config.scheme = c.scheme;
    config.node_density = min_density_for_isolation(c.params, c.scheme, 0.5);
    config.boundary = Boundary::kToroidal;
    config.runs = 2000;
    config.master_seed = 20240611;
    const MonteCarloEstimate est = run_monte_carlo(config);
    const double analytic = isolation_probability({c.params, c.scheme, config.node_density});
    const double z = (est.p_isolated - analytic) / est.std_error;
    if (std::abs(z) <= 3.0) ++within;
    std::printf("      %-32s lambda=%.5f analytic=%.5f sim=%.5f se=%.5f z=%+.2f\n",
                describe(c).c_str(), config.node_density, analytic, est.p_isolated,
                est.std_error, z);
  }
  const double elapsed = seconds_since(start);
  report(4, within >= 11 && elapsed < 600.0,
         std::to_string(within) + "/12 simulated cells within 3 standard errors, " +
             fmt("%.1f s", elapsed));
}

bool strictly_monotone(const std::vector<double>& v, bool increasing) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
  }
  return true;
}

void trends() {
  std::vector<std::string> broken;
  const auto p_i = [](const ChannelParams& p, const DiversityScheme& s, double lambda) {
    return isolation_probability({p, s, lambda});
  };

  std::vector<double> v;
  for (double lambda : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) v.push_back(p_i(link_budget(2, 4, 0), {}, lambda));
  if (!strictly_monotone(v, false)) broken.push_back("lambda");

  v.clear();
  for (double sigma = 0.0; sigma <= 4.0; sigma += 0.25) v.push_back(p_i(link_budget(2, 4, sigma), {}, 1e-3));
  if (!strictly_monotone(v, false)) broken.push_back("sigma");

  v.clear();
  for (int m = 1; m <= 8; ++m) v.push_back(p_i(link_budget(m, 4, 0), {}, 1e-3));
  if (!strictly_monotone(v, false)) broken.push_back("m");

  v.clear();
  for (int branches = 1; branches <= 6; ++branches) {
    v.push_back(p_i(link_budget(2, 4, 0), DiversityScheme::mrc(branches), 1e-3));
  }
  if (!strictly_monotone(v, false)) broken.push_back("MRC order");

  for (double sigma : {0.0, 2.0, 4.0}) {
    v.clear();
    for (double alpha = 2.0; alpha <= 6.0; alpha += 0.25) v.push_back(p_i(link_budget(4, alpha, sigma), {}, 1e-5));
    if (!strictly_monotone(v, true)) broken.push_back("alpha at sigma=" + fmt("%g", sigma));
  }

  for (int branches : {2, 4}) {
    const ChannelParams p = link_budget(2, 4, 0);
    if (!(p_i(p, DiversityScheme::mrc(branches), 1e-3) <= p_i(p, DiversityScheme::sc(branches), 1e-3))) {
      broken.push_back("MRC <= SC at M=" + std::to_string(branches));
    }
  }

  v.clear();
  for (int branches = 1; branches <= 6; ++branches) {
    v.push_back(p_i(link_budget(2, 4, 0), DiversityScheme::sc(branches), 1e-3));
  }
  for (std::size_t i = 2; i < v.size(); ++i) {
    if (!(v[i - 1] - v[i] < v[i - 2] - v[i - 1])) broken.push_back("SC decrement shrinking");
  }

  std::string summary = "trends: decreasing in lambda, sigma, m, MRC order; increasing in alpha; "
                        "MRC below SC; shrinking SC gains";
  for (const std::string& b : broken) summary += " [broken: " + b + "]";
  report(5, broken.empty(), summary);
}

void point_value() {
  const ChannelParams p = link_budget(2, 4.0, 0.0);
  const double closed = expected_r2(p, DiversityScheme::none());
  const double numeric = expected_r2_numeric(p, DiversityScheme::none());

  // R^2 = (k ptx g / (psi w))^{2/alpha} with unit-mean Gamma(m, 1/m) fading g.
  std::mt19937_64 engine(12345);
  std::gamma_distribution<double> fading(p.m, 1.0 / p.m);
  const double disk = std::pow(p.k * p.ptx / (p.psi * p.w), 2.0 / p.alpha);
  constexpr int kDraws = 10'000'000;
  long double sum = 0.0L;
  for (int i = 0; i < kDraws; ++i) sum += std::pow(fading(engine), 2.0 / p.alpha);
  const double sampled = disk * static_cast<double>(sum / kDraws);

  const double p_i = isolation_probability_from_r2(1e-4, closed);
  const bool agree = rel_err(numeric, closed) <= 1e-3 && rel_err(sampled, closed) <= 1e-3;
  // Regression constants, frozen after the three routes above agreed.
  const bool frozen = rel_err(closed, 9.39985602986625179) <= 1e-12 &&
                      rel_err(p_i, 0.997051304103979648) <= 1e-12 &&
                      std::abs(closed - 9.3998) < 1e-4 && std::abs(p_i - 0.99705) < 1e-5;
  report(6, agree && frozen,
         fmt("point value: E[R^2] closed %.6f, quadrature %.6f, sampled %.6f; P_I %.6f",
             closed, numeric, sampled, p_i));
}

std::string run_simulate(const std::vector<std::string>& extra) {
  std::vector<std::string> args = {"simulate", "--m", "2", "--scheme", "mrc", "--M", "2",
                                   "--sigma", "1", "--lambda", "5e-3", "--runs", "400",
                                   "--seed", "99", "--format", "json"};
  args.insert(args.end(), extra.begin(), extra.end());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(args, out, err);
  return std::to_string(code) + "\n" + out.str();
}

void determinism() {
  const std::string serial = run_simulate({});
  const std::string again = run_simulate({});
  const std::string parallel = run_simulate({"--threads", "4"});
  const std::string other = run_simulate({"--seed", "100"});
  const bool ok = serial.rfind("0\n", 0) == 0 && serial == again && serial == parallel &&
                  serial != other;
  report(7, ok, "determinism: repeated and 4-thread simulate output bit-identical to serial");
}

void inversion_round_trip() {
  double worst = 0.0;
  int checked = 0;
  for (const Cell& c : oracle_grid()) {
    for (double target : {0.01, 0.1, 0.5, 0.9}) {
      const double lambda = min_density_for_isolation(c.params, c.scheme, target);
      worst = std::max(worst, std::abs(isolation_probability({c.params, c.scheme, lambda}) - target));
      ++checked;
    }
  }
  report(8, worst <= 1e-12,
         "density inversion: " + std::to_string(checked) + " round trips, max abs err " +
             fmt("%.1e", worst));
}

void guarded(int criterion, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(criterion, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, closed_form_vs_quadrature);
  guarded(2, reduction_identities);
  guarded(3, beta_and_selection);
  guarded(4, monte_carlo_vs_analytic);
  guarded(5, trends);
  guarded(6, point_value);
  guarded(7, determinism);
  guarded(8, inversion_round_trip);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures;
}
