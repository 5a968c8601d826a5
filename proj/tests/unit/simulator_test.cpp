#include "isoprob/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "isoprob/analytic.hpp"
#include "isoprob/quadrature.hpp"

namespace isoprob {
namespace {

ChannelParams link_budget(int m, double alpha = 4.0, double sigma = 0.0) {
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

// Shadow-averaged success probability at distance rho, by Gauss-Hermite.
double averaged_success(double rho, const ChannelParams& p, const DiversityScheme& s) {
  const SuccessFunction f = make_success_function(p, s);
  if (p.sigma == 0.0) return f(p.mean_snr(rho));
  return gauss_hermite_rule(64).expectation(
      [&](double z) { return f(std::exp(p.sigma * z) * p.mean_snr(rho)); });
}

TEST(RandomStream, DeterministicAndInRange) {
  RandomStream a = RandomStream::derive(42, 7, 1);
  RandomStream b = RandomStream::derive(42, 7, 1);
  RandomStream c = RandomStream::derive(42, 7, 2);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto va = a();
    EXPECT_EQ(va, b());
    differs |= va != c();
  }
  EXPECT_TRUE(differs);
  RandomStream u(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
    sum += x;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / 100000.0));
}

TEST(SimConfig, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.runs = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.area_side = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.node_density = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SampleTopology, MeanCountAndRange) {
  for (const auto& [lambda, mean] : {std::pair{1e-4, 1.0}, std::pair{1e-3, 10.0}}) {
    SimConfig c;
    c.node_density = lambda;
    c.master_seed = 99;
    constexpr int kRuns = 10000;
    double total = 0.0;
    for (int r = 0; r < kRuns; ++r) {
      const Topology t = sample_topology(c, r);
      total += static_cast<double>(t.positions.size());
      for (const Point& p : t.positions) {
        ASSERT_GE(p.x, 0.0);
        ASSERT_LT(p.x, c.area_side);
        ASSERT_GE(p.y, 0.0);
        ASSERT_LT(p.y, c.area_side);
      }
    }
    EXPECT_NEAR(total / kRuns, mean, 3.0 * std::sqrt(mean / kRuns)) << "lambda = " << lambda;
  }
}

TEST(SampleTopology, Deterministic) {
  SimConfig c;
  c.node_density = 5e-3;
  c.master_seed = 42;
  EXPECT_EQ(sample_topology(c, 3), sample_topology(c, 3));
  EXPECT_NE(sample_topology(c, 3), sample_topology(c, 4));
  c.node_density = 0.0;
  EXPECT_TRUE(sample_topology(c, 0).positions.empty());
}

TEST(PairDistance, Examples) {
  EXPECT_DOUBLE_EQ(pair_distance({0, 0}, {3, 4}, 100.0, Boundary::kBounded), 5.0);
  EXPECT_DOUBLE_EQ(pair_distance({1, 1}, {99, 1}, 100.0, Boundary::kToroidal), 2.0);
  EXPECT_DOUBLE_EQ(pair_distance({1, 1}, {99, 1}, 100.0, Boundary::kBounded), 98.0);
  EXPECT_DOUBLE_EQ(pair_distance({1, 99}, {99, 1}, 100.0, Boundary::kToroidal), std::sqrt(8.0));
}

TEST(DrawCombinedSnr, GammaMoments) {
  RandomStream s(17);
  constexpr int kDraws = 1'000'000;
  for (int m : {1, 3}) {
    const ChannelParams p = link_budget(m);
    const double y = 5.0;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double g = draw_combined_snr(y, p, DiversityScheme::none(), s);
      sum += g;
      sum2 += g * g;
    }
    const double mean = sum / kDraws;
    const double var = sum2 / kDraws - mean * mean;
    const double true_var = y * y / m;
    EXPECT_NEAR(mean, y, 3.0 * std::sqrt(true_var / kDraws));
    // Var of the sample variance for Gamma(m): var^2 (2 + 6/m) / N.
    EXPECT_NEAR(var, true_var, 3.0 * true_var * std::sqrt((2.0 + 6.0 / m) / kDraws));
  }
}

TEST(DrawCombinedSnr, MrcShapeIsMTimesM) {
  RandomStream s(5);
  const ChannelParams p = link_budget(2);
  constexpr int kDraws = 400'000;
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) sum += draw_combined_snr(3.0, p, DiversityScheme::mrc(3), s);
  // Gamma(6, 1.5): mean 9, variance 13.5.
  EXPECT_NEAR(sum / kDraws, 9.0, 3.0 * std::sqrt(13.5 / kDraws));
}

TEST(LinkTrial, RayleighClosedForm) {
  const ChannelParams p = link_budget(1);
  const double rho = 3.0;
  const double expected = std::exp(-p.psi * p.w * std::pow(rho, p.alpha) / (p.k * p.ptx));
  RandomStream s(11);
  constexpr int kDraws = 1'000'000;
  int hits = 0;
  for (int i = 0; i < kDraws; ++i) hits += link_trial(rho, p, DiversityScheme::none(), s);
  const double rate = static_cast<double>(hits) / kDraws;
  EXPECT_NEAR(rate, expected, 3.0 * std::sqrt(expected * (1.0 - expected) / kDraws));
}

TEST(LinkTrial, ShadowAveragedSuccessMatchesQuadrature) {
  struct Case {
    int m;
    DiversityScheme scheme;
    double rho;
  };
  for (const Case c : {Case{2, DiversityScheme::none(), 3.5}, Case{1, DiversityScheme::mrc(2), 4.0},
                       Case{2, DiversityScheme::sc(3), 4.5}}) {
    const ChannelParams p = link_budget(c.m, 4.0, 1.5);
    const double expected = averaged_success(c.rho, p, c.scheme);
    RandomStream s(1234);
    constexpr int kDraws = 1'000'000;
    int hits = 0;
    for (int i = 0; i < kDraws; ++i) hits += link_trial(c.rho, p, c.scheme, s);
    const double rate = static_cast<double>(hits) / kDraws;
    EXPECT_NEAR(rate, expected, 3.0 * std::sqrt(expected * (1.0 - expected) / kDraws))
        << c.scheme.name();
  }
}

TEST(LinkTrial, ShortRangeAlwaysConnects) {
  const ChannelParams p = link_budget(2, 4.0, 0.0);
  // y / psi = 1e6.
  const double rho = std::pow(p.k * p.ptx / (p.w * p.psi * 1e6), 1.0 / p.alpha);
  RandomStream s(8);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += link_trial(rho, p, DiversityScheme::none(), s);
  EXPECT_GT(hits / 100000.0, 0.9999);
  EXPECT_THROW(link_trial(0.0, p, DiversityScheme::none(), s), std::domain_error);
}

TEST(LinkCutoff, TailBelowThreshold) {
  for (double sigma : {0.0, 1.0, 2.0}) {
    for (const DiversityScheme s : {DiversityScheme::none(), DiversityScheme::sc(4)}) {
      const ChannelParams p = link_budget(2, 4.0, sigma);
      const double cutoff = link_cutoff_distance(p, s);
      EXPECT_TRUE(std::isfinite(cutoff));
      EXPECT_LT(averaged_success(cutoff, p, s), 1e-12);
      EXPECT_GT(averaged_success(0.5 * cutoff, p, s), 0.0);
    }
  }
}

TEST(IsolationCount, TrivialTopologies) {
  const ChannelParams p = link_budget(2);
  Topology empty;
  EXPECT_EQ(isolation_count(empty, p, {}, 1), (IsolationCount{0, 0}));
  Topology one;
  one.positions = {{50.0, 50.0}};
  EXPECT_EQ(isolation_count(one, p, {}, 1), (IsolationCount{1, 1}));
  Topology far;
  far.positions = {{0.0, 0.0}, {50.0, 50.0}};
  far.boundary = Boundary::kBounded;
  EXPECT_EQ(isolation_count(far, p, {}, 1, 10.0), (IsolationCount{2, 2}));
}

TEST(IsolationCount, TwoNodeClosedForm) {
  const ChannelParams p = link_budget(2, 4.0, 1.0);
  Topology two;
  two.positions = {{10.0, 10.0}, {13.0, 10.0}};
  const double link = averaged_success(3.0, p, DiversityScheme::none());
  constexpr int kRepeats = 100000;
  std::uint64_t isolated = 0;
  for (int r = 0; r < kRepeats; ++r) {
    const IsolationCount c = isolation_count(two, p, {}, static_cast<std::uint64_t>(r) + 1);
    ASSERT_TRUE(c.isolated == 0 || c.isolated == 2);
    isolated += c.isolated;
  }
  const double fraction = static_cast<double>(isolated) / (2.0 * kRepeats);
  EXPECT_NEAR(fraction, 1.0 - link, 3.0 * std::sqrt(link * (1.0 - link) / kRepeats));
}

SimConfig half_isolated_config() {
  SimConfig c;
  c.params = link_budget(2);
  c.node_density = min_density_for_isolation(c.params, c.scheme, 0.5);
  c.runs = 1000;
  c.master_seed = 2718;
  return c;
}

TEST(RunMonteCarlo, AgreesWithAnalyticAtHalf) {
  const MonteCarloEstimate est = run_monte_carlo(half_isolated_config());
  EXPECT_FALSE(est.degenerate);
  EXPECT_LE(std::fabs(est.p_isolated - 0.5), 3.0 * est.std_error);
  EXPECT_LE(est.ci_low, est.p_isolated);
  EXPECT_GE(est.ci_high, est.p_isolated);
  EXPECT_LE(est.total_isolated, est.total_nodes);
  EXPECT_EQ(est.runs_executed, 1000u);
}

TEST(RunMonteCarlo, SparseNetworkIsMostlyIsolated) {
  SimConfig c;
  c.params = link_budget(2);
  c.node_density = 1e-5;  // analytic P_I ~ 0.9997
  ASSERT_GT(isolation_probability({c.params, c.scheme, c.node_density}), 0.999);
  c.runs = 1000;
  const MonteCarloEstimate est = run_monte_carlo(c);
  EXPECT_GE(est.p_isolated, 0.99);
  EXPECT_GT(est.runs_empty, 0u);
}

TEST(RunMonteCarlo, FlagsDegenerateSampleSize) {
  SimConfig c;
  c.params = link_budget(2);
  c.node_density = 1e-5;  // 0.1 nodes per run
  c.runs = 100;
  const MonteCarloEstimate est = run_monte_carlo(c);
  EXPECT_LT(est.total_nodes, kMinReliableNodes);
  EXPECT_TRUE(est.degenerate);
}

TEST(RunMonteCarlo, DeterministicAcrossThreads) {
  SimConfig c = half_isolated_config();
  c.params.sigma = 1.0;
  c.scheme = DiversityScheme::sc(2);
  c.runs = 200;
  const MonteCarloEstimate serial = run_monte_carlo(c);
  EXPECT_EQ(run_monte_carlo(c), serial);
  c.threads = 4;
  EXPECT_EQ(run_monte_carlo(c), serial);
  c.master_seed += 1;
  EXPECT_NE(run_monte_carlo(c), serial);
}

TEST(RunMonteCarlo, BoundedModeHasEdgeBias) {
  SimConfig c = half_isolated_config();
  c.scheme = DiversityScheme::mrc(2);
  c.node_density = min_density_for_isolation(c.params, c.scheme, 0.5);
  c.runs = 500;
  const MonteCarloEstimate torus = run_monte_carlo(c);
  c.boundary = Boundary::kBounded;
  const MonteCarloEstimate box = run_monte_carlo(c);
  const double se = std::hypot(torus.std_error, box.std_error);
  EXPECT_GT(box.p_isolated - torus.p_isolated, -2.0 * se);
  EXPECT_GT(box.p_isolated, torus.p_isolated);
}

TEST(TopologyExport, FormatAndRoundTrip) {
  Topology t;
  t.area_side = 100.0;
  t.boundary = Boundary::kToroidal;
  t.positions = {{1.5, 2.25}, {99.125, 0.1}};
  std::ostringstream out;
  write_topology(out, t, 42, 3);
  EXPECT_EQ(out.str(), "# area_side=100 boundary=toroidal seed=42 run=3\n1.5,2.25\n99.125,0.1\n");
  std::istringstream in(out.str());
  EXPECT_EQ(read_topology(in), t);

  SimConfig c;
  c.node_density = 2e-3;
  c.boundary = Boundary::kBounded;
  const Topology sampled = sample_topology(c, 0);
  std::ostringstream out2;
  write_topology(out2, sampled, c.master_seed, 0);
  std::istringstream in2(out2.str());
  EXPECT_EQ(read_topology(in2), sampled);

  std::istringstream bad("1,2\n");
  EXPECT_THROW(read_topology(bad), std::invalid_argument);
}

}  // namespace
}  // namespace isoprob
