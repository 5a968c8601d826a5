#include "isoprob/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "isoprob/format.hpp"

namespace isoprob {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kTopologyTag = 1;
constexpr std::uint64_t kLinkTag = 2;

// Normal quantile with upper tail 3.2e-14; together with a 5e-13 bound on
// the conditional success probability this keeps the cutoff below 1e-12.
constexpr double kShadowTailZ = 7.5;
constexpr double kConditionalCutoff = 5e-13;

constexpr double kZ95 = 1.959963984540054;

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("topology: bad number '" + text + "'");
  }
  return value;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct RunResult {
  std::uint64_t isolated = 0;
  std::uint64_t total = 0;
};

double shadow_multiplier(const ChannelParams& params, RandomStream& stream) {
  if (params.sigma == 0.0) return 1.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  return std::exp(params.sigma * normal(stream));
}

}  // namespace

Boundary parse_boundary(const std::string& text) {
  if (text == "bounded") return Boundary::kBounded;
  if (text == "toroidal") return Boundary::kToroidal;
  throw std::invalid_argument("unknown boundary mode '" + text + "'");
}

std::string boundary_name(Boundary boundary) {
  return boundary == Boundary::kBounded ? "bounded" : "toroidal";
}

RandomStream RandomStream::derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = mix64(seed + kGolden);
  s = mix64(s ^ (a * kGolden + 0x632BE59BD9B4E019ULL));
  s = mix64(s ^ (b * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
  return RandomStream(s);
}

RandomStream::result_type RandomStream::operator()() {
  state_ += kGolden;
  return mix64(state_);
}

double RandomStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

void SimConfig::validate() const {
  params.validate();
  scheme.validate();
  if (!(node_density >= 0.0) || !std::isfinite(node_density)) {
    throw std::invalid_argument("node density must be a non-negative finite number");
  }
  if (!(area_side > 0.0) || !std::isfinite(area_side)) {
    throw std::invalid_argument("area side must be positive");
  }
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

Topology sample_topology(const SimConfig& config, std::uint64_t run_index) {
  RandomStream stream = RandomStream::derive(config.master_seed, run_index, kTopologyTag);
  const double mean = config.node_density * config.area_side * config.area_side;
  Topology topo;
  topo.area_side = config.area_side;
  topo.boundary = config.boundary;
  if (mean <= 0.0) return topo;
  std::poisson_distribution<std::int64_t> count_dist(mean);
  const std::int64_t count = count_dist(stream);
  topo.positions.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const double x = config.area_side * stream.uniform();
    const double y = config.area_side * stream.uniform();
    topo.positions.push_back({x, y});
  }
  return topo;
}

double pair_distance(const Point& p1, const Point& p2, double area_side, Boundary boundary) {
  double dx = std::fabs(p1.x - p2.x);
  double dy = std::fabs(p1.y - p2.y);
  if (boundary == Boundary::kToroidal) {
    dx = std::min(dx, area_side - dx);
    dy = std::min(dy, area_side - dy);
  }
  return std::hypot(dx, dy);
}

double draw_combined_snr(double y, const ChannelParams& params, const DiversityScheme& scheme,
                         RandomStream& stream) {
  const DiversityScheme s = scheme.normalized();
  const double scale = y / params.m;
  switch (s.kind) {
    case DiversityScheme::Kind::kNone: {
      std::gamma_distribution<double> gamma(params.m, scale);
      return gamma(stream);
    }
    case DiversityScheme::Kind::kMrc: {
      // The sum of M i.i.d. Gamma(m, y/m) branches is Gamma(mM, y/m).
      std::gamma_distribution<double> gamma(static_cast<double>(params.m) * s.branches, scale);
      return gamma(stream);
    }
    case DiversityScheme::Kind::kSc: {
      std::gamma_distribution<double> gamma(params.m, scale);
      double best = 0.0;
      for (int b = 0; b < s.branches; ++b) best = std::max(best, gamma(stream));
      return best;
    }
  }
  throw std::logic_error("unreachable diversity kind");
}

bool link_trial(double rho, const ChannelParams& params, const DiversityScheme& scheme,
                RandomStream& stream) {
  if (!(rho > 0.0)) throw std::domain_error("link_trial: distance must be positive");
  const double y = shadow_multiplier(params, stream) * params.mean_snr(rho);
  return draw_combined_snr(y, params, scheme, stream) >= params.psi;
}

double link_cutoff_distance(const ChannelParams& params, const DiversityScheme& scheme) {
  params.validate();
  const double boost = std::exp(params.sigma * kShadowTailZ);
  const auto conditional = [&](double rho) {
    return success_prob(boost * params.mean_snr(rho), params, scheme);
  };
  // Bracket in log distance, then bisect.
  double lo = 1e-6;
  double hi = 1.0;
  while (conditional(hi) >= kConditionalCutoff) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (conditional(mid) >= kConditionalCutoff) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

IsolationCount isolation_count(const Topology& topology, const ChannelParams& params,
                               const DiversityScheme& scheme, std::uint64_t link_seed,
                               double cutoff) {
  const std::size_t n = topology.positions.size();
  std::vector<char> linked(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Both endpoints already have a neighbour: this pair cannot change
      // any degree-zero status, so it is not drawn.
      if (linked[i] && linked[j]) continue;
      const double d = pair_distance(topology.positions[i], topology.positions[j],
                                     topology.area_side, topology.boundary);
      if (d > cutoff) continue;
      bool up = true;
      if (d > 0.0) {
        RandomStream stream = RandomStream::derive(link_seed, i, j);
        up = link_trial(d, params, scheme, stream);
      }
      if (up) {
        linked[i] = 1;
        linked[j] = 1;
      }
    }
  }
  IsolationCount count;
  count.total = n;
  count.isolated = static_cast<std::uint64_t>(std::count(linked.begin(), linked.end(), 0));
  return count;
}

MonteCarloEstimate run_monte_carlo(const SimConfig& config) {
  config.validate();
  const double cutoff = link_cutoff_distance(config.params, config.scheme);
  const auto runs = static_cast<std::size_t>(config.runs);
  std::vector<RunResult> results(runs);

  const auto do_run = [&](std::size_t r) {
    const Topology topo = sample_topology(config, r);
    const std::uint64_t link_seed =
        RandomStream::derive(config.master_seed, r, kLinkTag)();
    const IsolationCount c = isolation_count(topo, config.params, config.scheme, link_seed, cutoff);
    results[r] = {c.isolated, c.total};
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), runs);
  if (workers <= 1) {
    for (std::size_t r = 0; r < runs; ++r) do_run(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < runs; r = next++) do_run(r);
      });
    }
  }

  MonteCarloEstimate est;
  est.runs_executed = runs;
  for (const RunResult& r : results) {
    est.total_nodes += r.total;
    est.total_isolated += r.isolated;
    if (r.total == 0) ++est.runs_empty;
    if (r.isolated > 0) ++est.runs_with_isolated;
  }
  const std::uint64_t nonempty = est.runs_executed - est.runs_empty;
  est.p_any_isolated =
      nonempty > 0 ? static_cast<double>(est.runs_with_isolated) / static_cast<double>(nonempty)
                   : 0.0;
  est.degenerate = est.total_nodes < kMinReliableNodes;
  if (est.total_nodes == 0) return est;

  const double n_total = static_cast<double>(est.total_nodes);
  const double p = static_cast<double>(est.total_isolated) / n_total;
  est.p_isolated = p;

  // Ratio estimator: nodes in one run are not independent, so the spread
  // is taken across runs (delta method), summed in run order.
  if (runs > 1) {
    double ss = 0.0;
    for (const RunResult& r : results) {
      const double resid = static_cast<double>(r.isolated) - p * static_cast<double>(r.total);
      ss += resid * resid;
    }
    const double r_count = static_cast<double>(runs);
    const double mean_nodes = n_total / r_count;
    est.std_error = std::sqrt(ss / (r_count - 1.0) / r_count) / mean_nodes;
  } else {
    est.std_error = std::sqrt(p * (1.0 - p) / n_total);
  }
  est.ci_low = std::clamp(p - kZ95 * est.std_error, 0.0, 1.0);
  est.ci_high = std::clamp(p + kZ95 * est.std_error, 0.0, 1.0);
  return est;
}

void write_topology(std::ostream& out, const Topology& topology, std::uint64_t seed,
                    std::uint64_t run_index) {
  out << "# area_side=" << format_number(topology.area_side)
      << " boundary=" << boundary_name(topology.boundary) << " seed=" << seed
      << " run=" << run_index << '\n';
  for (const Point& p : topology.positions) {
    out << format_number(p.x) << ',' << format_number(p.y) << '\n';
  }
}

Topology read_topology(std::istream& in) {
  Topology topo;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw std::invalid_argument("topology: missing header line");
  }
  std::istringstream header(line.substr(2));
  std::string field;
  bool have_side = false;
  bool have_boundary = false;
  while (header >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("topology: bad header field");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "area_side") {
      topo.area_side = parse_double(value);
      have_side = true;
    } else if (key == "boundary") {
      topo.boundary = parse_boundary(value);
      have_boundary = true;
    }
  }
  if (!have_side || !have_boundary) {
    throw std::invalid_argument("topology: header needs area_side and boundary");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("topology: bad line '" + line + "'");
    topo.positions.push_back({parse_double(line.substr(0, comma)), parse_double(line.substr(comma + 1))});
  }
  return topo;
}

}  // namespace isoprob
