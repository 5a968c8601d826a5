#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "isoprob/channel.hpp"
#include "isoprob/quadrature.hpp"
#include "isoprob/simulator.hpp"
#include "report.hpp"

namespace isoprob::cli {

enum class SweepVariable { kLambda, kSigma, kAlpha, kM, kBranches };

SweepVariable parse_variable(const std::string& text);
std::string variable_name(SweepVariable variable);

struct SweepOutputs {
  bool analytic = true;
  bool quadrature = false;
  bool simulation = false;
};

/// Comma-separated subset of {analytic, quadrature, simulation}.
SweepOutputs parse_outputs(const std::string& text);

/// One curve: the parameters held fixed while the swept variable moves.
struct SweepSeries {
  std::string label;
  ChannelParams params;
  DiversityScheme scheme;
  double node_density = 1e-3;
};

struct SweepSpec {
  SweepVariable variable = SweepVariable::kLambda;
  std::vector<double> grid;
  std::vector<SweepSeries> series;
  // When set, lambda is solved per point so that P_I hits this value.
  std::optional<double> target_p_i;
  // Non-integer Nakagami parameter; quadrature only.
  std::optional<double> m_real;
  SweepOutputs outputs;
  SimConfig simulation;  // params, scheme and density are overwritten per point
  QuadratureSpec quadrature;

  void validate() const;
};

/// Grid syntax: "v1,v2,...", "lin:a:b:n" or "log:a:b:n".
std::vector<double> parse_grid(const std::string& text);

/// Parameter sets of figures 2 to 7 (sigma in natural-log units).
SweepSpec figure_preset(int figure);

std::vector<std::string> sweep_columns(const SweepSpec& spec);

struct SweepResult {
  std::vector<Record> rows;
  int failed_points = 0;
};

/// Rows come out in series-major, grid order. Per-point failures leave
/// empty fields and write a warning line to `warnings`.
SweepResult run_sweep(const SweepSpec& spec, std::ostream& warnings);

}  // namespace isoprob::cli
