#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <set>
#include <stdexcept>

#include <CLI11.hpp>

#include "isoprob/analytic.hpp"
#include "isoprob/errors.hpp"
#include "isoprob/quadrature.hpp"
#include "isoprob/simulator.hpp"
#include "report.hpp"
#include "sweep.hpp"

namespace isoprob::cli {
namespace {

// Flags that set the same quantity; a config entry is dropped when any
// member of its group is already on the command line.
const std::vector<std::set<std::string>> kFlagGroups = {
    {"k", "k-db"}, {"psi", "psi-db"}, {"sigma", "sigma-db"}};

struct Flags {
  double ptx = 1.0;
  double w = 0.01;
  double k = 10.0;
  double k_db = 10.0;
  double psi = 10.0;
  double psi_db = 10.0;
  double alpha = 4.0;
  double sigma = 0.0;
  double sigma_db = 0.0;
  int m = 1;
  double m_real = 1.0;
  std::string scheme = "none";
  int branches = 1;
  double lambda = 1e-3;

  double area = 100.0;
  std::string boundary = "toroidal";
  int runs = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string topology_out;
  std::uint64_t topology_run = 0;

  int figure = 0;
  std::string vary;
  std::string grid;
  std::string outputs;
  double target_pi = 0.0;

  std::string format = "text";
  std::string out;
  std::string config;
};

bool given(const CLI::App* app, const std::string& flag) { return app->count("--" + flag) > 0; }

void add_channel(CLI::App* app, Flags& f) {
  app->add_option("--ptx", f.ptx, "Transmit power, mW")->capture_default_str();
  app->add_option("--w", f.w, "Noise power, mW")->capture_default_str();
  auto* k = app->add_option("--k", f.k, "Path-loss constant, linear")->capture_default_str();
  app->add_option("--k-db", f.k_db, "Path-loss constant, dB")->excludes(k);
  auto* psi = app->add_option("--psi", f.psi, "SNR threshold, linear")->capture_default_str();
  app->add_option("--psi-db", f.psi_db, "SNR threshold, dB")->excludes(psi);
  app->add_option("--alpha", f.alpha, "Path-loss exponent")->capture_default_str();
  auto* sigma = app->add_option("--sigma", f.sigma, "Shadowing spread, natural-log units")
                    ->capture_default_str();
  app->add_option("--sigma-db", f.sigma_db, "Shadowing spread, dB")->excludes(sigma);
  app->add_option("--m", f.m, "Nakagami parameter (integer)")->capture_default_str();
  app->add_option("--m-real", f.m_real, "Non-integer Nakagami parameter (quadrature only)");
  app->add_option("--scheme", f.scheme, "Receive diversity")
      ->check(CLI::IsMember({"none", "mrc", "sc"}))
      ->capture_default_str();
  app->add_option("--M", f.branches, "Diversity branches")->capture_default_str();
}

void add_simulation(CLI::App* app, Flags& f) {
  app->add_option("--area", f.area, "Side of the square region, m")->capture_default_str();
  app->add_option("--boundary", f.boundary, "Region boundary")
      ->check(CLI::IsMember({"bounded", "toroidal"}))
      ->capture_default_str();
  app->add_option("--runs", f.runs, "Monte Carlo replications")->capture_default_str();
  app->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  app->add_option("--threads", f.threads, "Worker threads (result does not depend on it)")
      ->capture_default_str();
}

void add_output(CLI::App* app, Flags& f) {
  app->add_option("--format", f.format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();
  app->add_option("--out", f.out, "Write results to this file instead of stdout");
  app->add_option("--config", f.config, "key=value file; command-line flags take precedence");
}

ChannelParams channel_from(const CLI::App* app, const Flags& f) {
  ChannelParams p;
  p.ptx = f.ptx;
  p.w = f.w;
  p.k = given(app, "k-db") ? db_to_linear(f.k_db) : f.k;
  p.psi = given(app, "psi-db") ? db_to_linear(f.psi_db) : f.psi;
  p.alpha = f.alpha;
  p.sigma = given(app, "sigma-db") ? sigma_from_db(f.sigma_db) : f.sigma;
  p.m = f.m;
  p.validate();
  return p;
}

DiversityScheme scheme_from(const Flags& f) {
  const DiversityScheme scheme{parse_scheme_kind(f.scheme), f.branches};
  scheme.validate();
  return scheme;
}

SimConfig simulation_from(const Flags& f) {
  SimConfig config;
  config.area_side = f.area;
  config.boundary = parse_boundary(f.boundary);
  config.runs = f.runs;
  config.master_seed = f.seed;
  config.threads = f.threads;
  return config;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string config_path(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  return path;
}

// Turns config lines into "--key=value" tokens placed right after the
// subcommand, so later command-line occurrences win under TakeLast.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App* sub) {
  const std::string path = config_path(args);
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");

  std::set<std::string> on_command_line;
  for (const std::string& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    on_command_line.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos
                                                                         : a.find('=') - 2));
  }
  const auto shadowed = [&](const std::string& key) {
    if (on_command_line.count(key)) return true;
    for (const auto& group : kFlagGroups) {
      if (!group.count(key)) continue;
      for (const std::string& other : group) {
        if (on_command_line.count(other)) return true;
      }
    }
    return false;
  };

  std::vector<std::string> injected;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key == "config") {
      throw std::invalid_argument(path + ":" + std::to_string(number) + ": nested config");
    }
    if (!sub->get_option_no_throw("--" + key)) {
      // Shared files may carry options of other subcommands.
      const auto siblings = sub->get_parent()->get_subcommands({});
      const bool known = std::any_of(siblings.begin(), siblings.end(), [&](const CLI::App* s) {
        return s->get_option_no_throw("--" + key) != nullptr;
      });
      if (!known) {
        throw std::invalid_argument(path + ":" + std::to_string(number) + ": unknown option '" +
                                    key + "'");
      }
      continue;
    }
    if (shadowed(key)) continue;
    injected.push_back(eq == std::string::npos ? "--" + key
                                               : "--" + key + "=" + trim(line.substr(eq + 1)));
  }

  std::vector<std::string> expanded;
  expanded.push_back(args.front());
  expanded.insert(expanded.end(), injected.begin(), injected.end());
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

Value optional_value(const std::optional<double>& v) {
  return v ? Value{*v} : Value{};
}

void describe_channel(Record& r, const CLI::App* app, const Flags& f, const ChannelParams& p,
                      const DiversityScheme& scheme) {
  const DiversityScheme effective = scheme.normalized();
  r.set("scheme", effective.name());
  r.set("M", static_cast<std::int64_t>(effective.branches));
  if (given(app, "m-real")) {
    r.set("m", f.m_real);
  } else {
    r.set("m", static_cast<std::int64_t>(p.m));
  }
  r.set("alpha", p.alpha);
  r.set("sigma", p.sigma);
}

void check_m_real(const CLI::App* app, const Flags& f, const DiversityScheme& scheme) {
  if (!given(app, "m-real")) return;
  if (!(f.m_real >= 0.5) || !std::isfinite(f.m_real)) {
    throw std::invalid_argument("--m-real must be >= 0.5");
  }
  if (scheme.normalized().kind != DiversityScheme::Kind::kNone) {
    throw std::invalid_argument("--m-real supports --scheme none only");
  }
}

int cmd_eval(const CLI::App* app, const Flags& f, std::ostream& out) {
  const ChannelParams params = channel_from(app, f);
  const DiversityScheme scheme = scheme_from(f);
  check_m_real(app, f, scheme);
  if (!(f.lambda >= 0.0) || !std::isfinite(f.lambda)) {
    throw std::invalid_argument("lambda must be finite and >= 0");
  }
  SweepOutputs outputs = given(app, "outputs") ? parse_outputs(f.outputs)
                                               : SweepOutputs{true, true, false};
  if (outputs.simulation) throw std::invalid_argument("eval has no simulation output; use simulate");
  if (given(app, "m-real")) outputs = {false, true, false};
  if (!outputs.analytic && !outputs.quadrature) throw std::invalid_argument("no outputs requested");

  std::optional<double> er2_a;
  std::optional<double> er2_q;
  if (outputs.analytic) er2_a = expected_r2(params, scheme);
  if (outputs.quadrature) {
    er2_q = given(app, "m-real") ? expected_r2_numeric_real_m(params, f.m_real)
                                 : expected_r2_numeric(params, scheme);
  }

  Record r;
  describe_channel(r, app, f, params, scheme);
  r.set("lambda", f.lambda);
  r.set("er2_analytic", optional_value(er2_a));
  r.set("p_i_analytic",
        er2_a ? Value{isolation_probability_from_r2(f.lambda, *er2_a)} : Value{});
  r.set("er2_quadrature", optional_value(er2_q));
  r.set("p_i_quadrature",
        er2_q ? Value{isolation_probability_from_r2(f.lambda, *er2_q)} : Value{});
  write_single(out, parse_format(f.format), r);
  return kExitOk;
}

int cmd_sweep(const CLI::App* app, const Flags& f, std::ostream& out, std::ostream& err) {
  SweepSpec spec;
  if (given(app, "figure")) {
    for (const char* flag : {"ptx", "w", "k", "k-db", "psi", "psi-db", "alpha", "sigma",
                             "sigma-db", "m", "m-real", "scheme", "M", "lambda", "vary", "grid",
                             "target-pi"}) {
      if (given(app, flag)) {
        throw std::invalid_argument(std::string("--figure fixes the parameters; drop --") + flag);
      }
    }
    spec = figure_preset(f.figure);
  } else {
    if (!given(app, "vary") || !given(app, "grid")) {
      throw std::invalid_argument("sweep needs --figure, or --vary with --grid");
    }
    spec.variable = parse_variable(f.vary);
    static const std::map<SweepVariable, std::vector<std::string>> kFixedFlags = {
        {SweepVariable::kLambda, {"lambda"}},
        {SweepVariable::kSigma, {"sigma", "sigma-db"}},
        {SweepVariable::kAlpha, {"alpha"}},
        {SweepVariable::kM, {"m", "m-real"}},
        {SweepVariable::kBranches, {"M"}}};
    for (const std::string& flag : kFixedFlags.at(spec.variable)) {
      if (given(app, flag)) {
        throw std::invalid_argument("--" + flag + " conflicts with --vary " + f.vary);
      }
    }
    spec.grid = parse_grid(f.grid);
    SweepSeries series;
    series.params = channel_from(app, f);
    series.scheme = DiversityScheme{parse_scheme_kind(f.scheme), f.branches};
    if (spec.variable != SweepVariable::kBranches) series.scheme.validate();
    series.label = series.scheme.name();
    series.node_density = f.lambda;
    spec.series.push_back(series);
    if (given(app, "target-pi")) spec.target_p_i = f.target_pi;
    if (given(app, "m-real")) spec.m_real = f.m_real;
  }
  spec.outputs = given(app, "outputs") ? parse_outputs(f.outputs) : SweepOutputs{};
  if (spec.m_real) {
    spec.outputs.analytic = false;
    if (!given(app, "outputs")) spec.outputs.quadrature = true;
  }
  spec.simulation = simulation_from(f);

  const SweepResult result = run_sweep(spec, err);
  write_table(out, parse_format(f.format), sweep_columns(spec), result.rows);
  if (result.failed_points == static_cast<int>(result.rows.size())) {
    err << "error: every sweep point failed\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_simulate(const CLI::App* app, const Flags& f, std::ostream& out, std::ostream& err) {
  if (given(app, "m-real")) {
    throw std::invalid_argument("the simulator draws integer-m fading; --m-real is not supported");
  }
  SimConfig config = simulation_from(f);
  config.params = channel_from(app, f);
  config.scheme = scheme_from(f);
  config.node_density = f.lambda;
  config.validate();

  if (given(app, "topology-out")) {
    if (f.topology_run >= static_cast<std::uint64_t>(config.runs)) {
      throw std::invalid_argument("--topology-run must be below --runs");
    }
    std::ofstream file(f.topology_out);
    if (!file) throw std::invalid_argument("cannot write '" + f.topology_out + "'");
    write_topology(file, sample_topology(config, f.topology_run), config.master_seed,
                   f.topology_run);
  }

  const MonteCarloEstimate est = run_monte_carlo(config);
  const double p_analytic = isolation_probability({config.params, config.scheme,
                                                   config.node_density});

  Record r;
  describe_channel(r, app, f, config.params, config.scheme);
  r.set("lambda", config.node_density);
  r.set("area", config.area_side);
  r.set("boundary", boundary_name(config.boundary));
  r.set("runs", static_cast<std::int64_t>(config.runs));
  r.set("seed", std::to_string(config.master_seed));
  r.set("p_i_sim", est.p_isolated);
  r.set("sim_stderr", est.std_error);
  r.set("sim_ci_low", est.ci_low);
  r.set("sim_ci_high", est.ci_high);
  r.set("p_i_analytic", p_analytic);
  r.set("z_score", est.std_error > 0.0 ? Value{(est.p_isolated - p_analytic) / est.std_error}
                                       : Value{});
  r.set("p_any_isolated", est.p_any_isolated);
  r.set("total_nodes", static_cast<std::int64_t>(est.total_nodes));
  r.set("total_isolated", static_cast<std::int64_t>(est.total_isolated));
  r.set("runs_empty", static_cast<std::int64_t>(est.runs_empty));
  r.set("runs_with_isolated", static_cast<std::int64_t>(est.runs_with_isolated));
  r.set("degenerate", std::string(est.degenerate ? "true" : "false"));
  write_single(out, parse_format(f.format), r);

  if (est.degenerate) {
    err << "error: only " << est.total_nodes << " nodes sampled (need " << kMinReliableNodes
        << "); raise --lambda, --area or --runs\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_invert(const CLI::App* app, const Flags& f, std::ostream& out) {
  const ChannelParams params = channel_from(app, f);
  const DiversityScheme scheme = scheme_from(f);
  check_m_real(app, f, scheme);
  if (!(f.target_pi > 0.0 && f.target_pi < 1.0)) {
    throw std::invalid_argument("--target-pi must lie in (0, 1)");
  }

  Record r;
  describe_channel(r, app, f, params, scheme);
  r.set("target_pi", f.target_pi);
  double lambda = 0.0;
  double er2 = 0.0;
  if (given(app, "m-real")) {
    er2 = expected_r2_numeric_real_m(params, f.m_real);
    lambda = -std::log(f.target_pi) / (std::numbers::pi * er2);
    r.set("er2_analytic", {});
    r.set("er2_quadrature", er2);
  } else {
    er2 = expected_r2(params, scheme);
    lambda = min_density_for_isolation(params, scheme, f.target_pi);
    r.set("er2_analytic", er2);
    r.set("er2_quadrature", {});
  }
  r.set("lambda", lambda);
  r.set("p_i_roundtrip", isolation_probability_from_r2(lambda, er2));
  write_single(out, parse_format(f.format), r);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Node isolation probability of Poisson ad hoc networks", "isoprob"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Flags f;
  CLI::App* eval = app.add_subcommand("eval", "E[R^2] and P_I at one parameter point");
  add_channel(eval, f);
  eval->add_option("--lambda", f.lambda, "Node density, nodes/m^2")->capture_default_str();
  eval->add_option("--outputs", f.outputs, "Subset of analytic,quadrature");
  add_output(eval, f);

  CLI::App* sweep = app.add_subcommand("sweep", "P_I over a grid of one parameter");
  add_channel(sweep, f);
  sweep->add_option("--lambda", f.lambda, "Node density, nodes/m^2")->capture_default_str();
  sweep->add_option("--figure", f.figure, "Built-in preset")->check(CLI::Range(2, 7));
  sweep->add_option("--vary", f.vary, "Swept variable: lambda, sigma, alpha, m or M");
  sweep->add_option("--grid", f.grid, "v1,v2,... or lin:a:b:n or log:a:b:n");
  sweep->add_option("--target-pi", f.target_pi, "Solve lambda for this P_I at each point");
  sweep->add_option("--outputs", f.outputs,
                    "Subset of analytic,quadrature,simulation (default analytic)");
  add_simulation(sweep, f);
  add_output(sweep, f);

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of P_I");
  add_channel(simulate, f);
  simulate->add_option("--lambda", f.lambda, "Node density, nodes/m^2")->capture_default_str();
  add_simulation(simulate, f);
  simulate->add_option("--topology-out", f.topology_out, "Export one sampled topology as CSV");
  simulate->add_option("--topology-run", f.topology_run, "Run index of the exported topology")
      ->capture_default_str();
  add_output(simulate, f);

  CLI::App* invert = app.add_subcommand("invert", "Node density that reaches a target P_I");
  add_channel(invert, f);
  invert->add_option("--target-pi", f.target_pi, "Target isolation probability")->required();
  add_output(invert, f);

  for (CLI::App* sub : {eval, sweep, simulate, invert}) {
    for (CLI::Option* opt : sub->get_options()) {
      if (opt->get_name() != "--help") {
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      }
    }
  }

  try {
    std::vector<std::string> expanded = args;
    if (!args.empty()) {
      if (CLI::App* sub = app.get_subcommand_no_throw(args.front())) {
        expanded = expand_config(args, sub);
      }
    }
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::ofstream file;
  std::ostream* sink = &out;
  const CLI::App* active = app.get_subcommands().front();
  if (given(active, "out")) {
    file.open(f.out);
    if (!file) {
      err << "error: cannot write '" << f.out << "'\n";
      return kExitUsage;
    }
    sink = &file;
  }

  try {
    if (active == eval) return cmd_eval(eval, f, *sink);
    if (active == sweep) return cmd_sweep(sweep, f, *sink, err);
    if (active == simulate) return cmd_simulate(simulate, f, *sink, err);
    return cmd_invert(invert, f, *sink);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace isoprob::cli
