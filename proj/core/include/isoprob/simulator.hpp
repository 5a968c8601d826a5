#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "isoprob/channel.hpp"

namespace isoprob {

enum class Boundary { kBounded, kToroidal };

Boundary parse_boundary(const std::string& text);
std::string boundary_name(Boundary boundary);

/// SplitMix64. Small state, so one can be derived per node pair without
/// measurable cost. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  /// Stream keyed by (seed, a, b); distinct keys give unrelated streams.
  static RandomStream derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on [0, 1).
  double uniform();

 private:
  std::uint64_t state_;
};

/// Monte Carlo setup. Defaults follow the 100 m x 100 m, 1000-run layout.
struct SimConfig {
  ChannelParams params;
  DiversityScheme scheme;
  double node_density = 1e-3;  // nodes per m^2
  double area_side = 100.0;    // m
  Boundary boundary = Boundary::kToroidal;
  int runs = 1000;
  std::uint64_t master_seed = 1;
  int threads = 1;  // execution only; never changes the result

  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Topology {
  std::vector<Point> positions;
  double area_side = 100.0;
  Boundary boundary = Boundary::kToroidal;

  friend bool operator==(const Topology&, const Topology&) = default;
};

struct IsolationCount {
  std::uint64_t isolated = 0;
  std::uint64_t total = 0;

  friend bool operator==(const IsolationCount&, const IsolationCount&) = default;
};

struct MonteCarloEstimate {
  double p_isolated = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t total_nodes = 0;
  std::uint64_t total_isolated = 0;
  std::uint64_t runs_executed = 0;
  std::uint64_t runs_empty = 0;
  // Runs (with at least one node) that contain an isolated node.
  std::uint64_t runs_with_isolated = 0;
  double p_any_isolated = 0.0;
  // Fewer than kMinReliableNodes samples; std_error is not trustworthy.
  bool degenerate = false;

  friend bool operator==(const MonteCarloEstimate&, const MonteCarloEstimate&) = default;
};

inline constexpr std::uint64_t kMinReliableNodes = 100;

/// Poisson(lambda side^2) nodes, uniform on [0, side)^2. Deterministic in
/// (master_seed, run_index).
Topology sample_topology(const SimConfig& config, std::uint64_t run_index);

/// Euclidean distance; per-axis wraparound when toroidal.
double pair_distance(const Point& p1, const Point& p2, double area_side, Boundary boundary);

/// Combined receiver SNR for one link with average SNR y (shadowing already
/// applied): Gamma(m, y/m) per branch, summed for MRC, maximised for SC.
double draw_combined_snr(double y, const ChannelParams& params, const DiversityScheme& scheme,
                         RandomStream& stream);

/// One Boolean link realisation at distance rho: lognormal shadowing common
/// to all branches, independent fading per branch.
bool link_trial(double rho, const ChannelParams& params, const DiversityScheme& scheme,
                RandomStream& stream);

/// Distance beyond which the shadow-averaged link probability is below 1e-12.
double link_cutoff_distance(const ChannelParams& params, const DiversityScheme& scheme);

/// Degree-zero nodes of the random graph with one reciprocal link trial per
/// unordered pair. Pair (i, j), i < j, draws from the substream keyed by
/// (link_seed, i, j). Pairs farther apart than `cutoff` are never linked.
IsolationCount isolation_count(const Topology& topology, const ChannelParams& params,
                               const DiversityScheme& scheme, std::uint64_t link_seed,
                               double cutoff = std::numeric_limits<double>::infinity());

/// config.runs independent replications reduced into one estimate. The
/// result depends only on the config (thread count included or not).
MonteCarloEstimate run_monte_carlo(const SimConfig& config);

/// Writes the "# area_side=... boundary=... seed=... run=..." header and one
/// "x,y" line per node.
void write_topology(std::ostream& out, const Topology& topology, std::uint64_t seed,
                    std::uint64_t run_index);

/// Parses the format produced by write_topology.
Topology read_topology(std::istream& in);

}  // namespace isoprob
