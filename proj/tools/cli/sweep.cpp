#include "sweep.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "isoprob/analytic.hpp"
#include "isoprob/format.hpp"

namespace isoprob::cli {
namespace {

constexpr const char* kResultColumns[] = {"lambda",   "p_i_analytic", "er2_analytic",
                                          "p_i_quadrature", "p_i_sim", "sim_stderr",
                                          "sim_ci_low", "sim_ci_high"};

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

bool is_integer_variable(SweepVariable v) {
  return v == SweepVariable::kM || v == SweepVariable::kBranches;
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  std::string part;
  while (std::getline(stream, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  if (n > 1) out.back() = b;
  return out;
}

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> out = linspace(std::log10(a), std::log10(b), n);
  for (double& v : out) v = std::pow(10.0, v);
  out.front() = a;
  out.back() = b;
  return out;
}

SweepSeries apply(const SweepSeries& base, SweepVariable variable, double value) {
  SweepSeries point = base;
  switch (variable) {
    case SweepVariable::kLambda:
      point.node_density = value;
      break;
    case SweepVariable::kSigma:
      point.params.sigma = value;
      break;
    case SweepVariable::kAlpha:
      point.params.alpha = value;
      break;
    case SweepVariable::kM:
      point.params.m = static_cast<int>(value);
      break;
    case SweepVariable::kBranches:
      point.scheme.branches = static_cast<int>(value);
      break;
  }
  return point;
}

ChannelParams figure_channel(int m, double alpha, double sigma) {
  ChannelParams p;
  p.ptx = 1.0;
  p.w = 0.01;
  p.k = 10.0;
  p.psi = 10.0;
  p.m = m;
  p.alpha = alpha;
  p.sigma = sigma;
  return p;
}

std::string label(const std::string& name, double value) {
  return name + "=" + format_number(value);
}

}  // namespace

SweepVariable parse_variable(const std::string& text) {
  if (text == "lambda") return SweepVariable::kLambda;
  if (text == "sigma") return SweepVariable::kSigma;
  if (text == "alpha") return SweepVariable::kAlpha;
  if (text == "m") return SweepVariable::kM;
  if (text == "M") return SweepVariable::kBranches;
  throw std::invalid_argument("cannot sweep over '" + text + "' (use lambda, sigma, alpha, m or M)");
}

std::string variable_name(SweepVariable variable) {
  switch (variable) {
    case SweepVariable::kLambda:
      return "lambda";
    case SweepVariable::kSigma:
      return "sigma";
    case SweepVariable::kAlpha:
      return "alpha";
    case SweepVariable::kM:
      return "m";
    case SweepVariable::kBranches:
      return "M";
  }
  return "lambda";
}

SweepOutputs parse_outputs(const std::string& text) {
  SweepOutputs outputs{false, false, false};
  for (const std::string& item : split(text, ',')) {
    if (item == "analytic") {
      outputs.analytic = true;
    } else if (item == "quadrature") {
      outputs.quadrature = true;
    } else if (item == "simulation") {
      outputs.simulation = true;
    } else {
      throw std::invalid_argument("unknown output '" + item +
                                  "' (use analytic, quadrature or simulation)");
    }
  }
  return outputs;
}

std::vector<double> parse_grid(const std::string& text) {
  const std::vector<std::string> parts = split(text, ':');
  if (parts.size() == 4 && (parts[0] == "lin" || parts[0] == "log")) {
    const double a = parse_double(parts[1]);
    const double b = parse_double(parts[2]);
    const double n = parse_double(parts[3]);
    if (n < 1 || n != std::floor(n) || n > 1e6) {
      throw std::invalid_argument("grid point count must be a positive integer");
    }
    if (parts[0] == "log") {
      if (!(a > 0 && b > 0)) throw std::invalid_argument("log grid bounds must be positive");
      return logspace(a, b, static_cast<int>(n));
    }
    return linspace(a, b, static_cast<int>(n));
  }
  if (parts.size() != 1) throw std::invalid_argument("bad grid '" + text + "'");
  std::vector<double> grid;
  for (const std::string& item : split(text, ',')) grid.push_back(parse_double(item));
  return grid;
}

void SweepSpec::validate() const {
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw std::invalid_argument("sweep grid values must be finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("sweep grid must be strictly increasing");
    }
    if (is_integer_variable(variable) && (grid[i] < 1 || grid[i] != std::floor(grid[i]))) {
      throw std::invalid_argument(variable_name(variable) + " grid must hold positive integers");
    }
  }
  if (series.empty()) throw std::invalid_argument("sweep has no series");
  if (!outputs.analytic && !outputs.quadrature && !outputs.simulation) {
    throw std::invalid_argument("no outputs requested");
  }
  if (target_p_i) {
    if (!(*target_p_i > 0.0 && *target_p_i < 1.0)) {
      throw std::invalid_argument("target P_I must lie in (0, 1)");
    }
    if (variable == SweepVariable::kLambda) {
      throw std::invalid_argument("a target P_I fixes lambda; sweep another variable");
    }
  }
  if (m_real) {
    if (!(*m_real >= 0.5) || !std::isfinite(*m_real)) {
      throw std::invalid_argument("--m-real must be >= 0.5");
    }
    if (outputs.analytic || outputs.simulation) {
      throw std::invalid_argument("--m-real supports quadrature output only");
    }
    if (variable == SweepVariable::kM) throw std::invalid_argument("--m-real fixes m");
  }
  for (const SweepSeries& s : series) {
    if (variable == SweepVariable::kBranches && s.scheme.kind == DiversityScheme::Kind::kNone) {
      throw std::invalid_argument("sweeping M needs --scheme mrc or sc");
    }
    if (m_real && s.scheme.normalized().kind != DiversityScheme::Kind::kNone) {
      throw std::invalid_argument("--m-real supports --scheme none only");
    }
    for (double v : grid) {
      const SweepSeries point = apply(s, variable, v);
      point.params.validate();
      point.scheme.validate();
      if (!(point.node_density >= 0.0) || !std::isfinite(point.node_density)) {
        throw std::invalid_argument("lambda must be finite and >= 0");
      }
    }
  }
  if (outputs.simulation) simulation.validate();
  if (outputs.quadrature) quadrature.validate();
}

SweepSpec figure_preset(int figure) {
  SweepSpec spec;
  const std::vector<double> lambdas = logspace(1e-5, 1e-3, 21);
  const std::vector<double> sigmas = linspace(0.0, 4.0, 17);
  switch (figure) {
    case 2:
      spec.variable = SweepVariable::kLambda;
      spec.grid = lambdas;
      for (double sigma : {0.0, 2.0, 4.0}) {
        spec.series.push_back({label("sigma", sigma), figure_channel(2, 4.0, sigma), {}, 1e-3});
      }
      break;
    case 3:
      spec.variable = SweepVariable::kLambda;
      spec.grid = lambdas;
      for (int m : {1, 2, 3, 4}) {
        spec.series.push_back({label("m", m), figure_channel(m, 4.0, 2.0), {}, 1e-3});
      }
      break;
    case 4:
      spec.variable = SweepVariable::kSigma;
      spec.grid = sigmas;
      spec.target_p_i = 0.01;
      spec.series.push_back({"m=4", figure_channel(4, 4.0, 0.0), {}, 1e-3});
      break;
    case 5:
      spec.variable = SweepVariable::kAlpha;
      spec.grid = linspace(2.0, 6.0, 17);
      for (double sigma : {0.0, 2.0, 4.0}) {
        spec.series.push_back({label("sigma", sigma), figure_channel(4, 4.0, sigma), {}, 1e-5});
      }
      break;
    case 6:
    case 7:
      spec.variable = SweepVariable::kSigma;
      spec.grid = sigmas;
      for (int branches : {1, 2, 3, 4}) {
        const DiversityScheme scheme =
            figure == 6 ? DiversityScheme::mrc(branches) : DiversityScheme::sc(branches);
        spec.series.push_back({label("M", branches), figure_channel(2, 4.0, 0.0), scheme, 1e-5});
      }
      break;
    default:
      throw std::invalid_argument("no preset for figure " + std::to_string(figure) +
                                  " (use 2 to 7)");
  }
  return spec;
}

std::vector<std::string> sweep_columns(const SweepSpec& spec) {
  std::vector<std::string> columns{"series"};
  if (spec.variable != SweepVariable::kLambda) columns.push_back(variable_name(spec.variable));
  for (const char* c : kResultColumns) columns.emplace_back(c);
  return columns;
}

SweepResult run_sweep(const SweepSpec& spec, std::ostream& warnings) {
  spec.validate();
  SweepResult result;

  for (const SweepSeries& series : spec.series) {
    // Consecutive points with identical channels (lambda sweeps) share E[R^2].
    std::optional<std::pair<ChannelParams, DiversityScheme>> cached_key;
    // NaN marks a value that was not requested or failed.
    double er2_a = kMissing;
    double er2_q = kMissing;
    std::string error_a;
    std::string error_q;

    for (double value : spec.grid) {
      const SweepSeries point = apply(series, spec.variable, value);
      const auto key = std::make_pair(point.params, point.scheme);
      const std::string where = "series " + series.label + ", " + variable_name(spec.variable) +
                                "=" + format_number(value);
      const auto warn = [&](const std::string& what, const std::string& message) {
        warnings << "warning: " << where << ": " << what << " failed: " << message << '\n';
      };

      if (!cached_key || *cached_key != key) {
        cached_key = key;
        er2_a = kMissing;
        er2_q = kMissing;
        error_a.clear();
        error_q.clear();
        if (spec.outputs.analytic) {
          try {
            er2_a = expected_r2(point.params, point.scheme);
          } catch (const std::exception& e) {
            error_a = e.what();
          }
        }
        if (spec.outputs.quadrature) {
          try {
            er2_q = spec.m_real
                        ? expected_r2_numeric_real_m(point.params, *spec.m_real, spec.quadrature)
                        : expected_r2_numeric(point.params, point.scheme, spec.quadrature);
          } catch (const std::exception& e) {
            error_q = e.what();
          }
        }
      }
      if (!error_a.empty()) warn("closed form", error_a);
      if (!error_q.empty()) warn("quadrature", error_q);

      Record row;
      row.set("series", series.label);
      if (spec.variable != SweepVariable::kLambda) {
        if (is_integer_variable(spec.variable)) {
          row.set(variable_name(spec.variable), static_cast<std::int64_t>(value));
        } else {
          row.set(variable_name(spec.variable), value);
        }
      }
      for (const char* c : kResultColumns) row.set(c, {});

      std::optional<double> lambda;
      if (!spec.target_p_i) {
        lambda = point.node_density;
      } else if (!std::isnan(er2_a)) {
        lambda = min_density_for_isolation(point.params, point.scheme, *spec.target_p_i);
      } else if (!std::isnan(er2_q)) {
        lambda = -std::log(*spec.target_p_i) / (std::numbers::pi * er2_q);
      }

      bool produced = false;
      if (lambda) {
        row.set("lambda", *lambda);
        if (!std::isnan(er2_a)) {
          row.set("p_i_analytic", isolation_probability_from_r2(*lambda, er2_a));
          row.set("er2_analytic", er2_a);
          produced = true;
        }
        if (!std::isnan(er2_q)) {
          row.set("p_i_quadrature", isolation_probability_from_r2(*lambda, er2_q));
          produced = true;
        }
        if (spec.outputs.simulation) {
          SimConfig config = spec.simulation;
          config.params = point.params;
          config.scheme = point.scheme;
          config.node_density = *lambda;
          try {
            const MonteCarloEstimate est = run_monte_carlo(config);
            row.set("p_i_sim", est.p_isolated);
            row.set("sim_stderr", est.std_error);
            row.set("sim_ci_low", est.ci_low);
            row.set("sim_ci_high", est.ci_high);
            produced = true;
            if (est.degenerate) {
              warnings << "warning: " << where << ": simulation saw only " << est.total_nodes
                       << " nodes; its standard error is unreliable\n";
            }
          } catch (const std::exception& e) {
            warn("simulation", e.what());
          }
        }
      }
      if (!produced) ++result.failed_points;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

}  // namespace isoprob::cli
