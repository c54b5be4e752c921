#pragma once

/// @file pipeline.hpp
/// @brief simulate -> record -> certify, file outputs, exit codes and the
/// built-in refinement study.

#include <array>
#include <filesystem>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kvwave/certify.hpp"
#include "kvwave/energetics.hpp"
#include "kvwave/problem.hpp"

namespace kvwave {

/// Process exit codes of the command line tool.
enum class ExitCode : int {
  ok = 0,
  config_error = 2,        ///< unreadable, malformed or inadmissible configuration
  diverged = 3,            ///< solution left the finite range
  hypothesis_failure = 4,  ///< E(0) >= E1, initial data outside the well, or the trajectory left it
  io_error = 5,            ///< output files could not be written
  numerical_failure = 6,   ///< CFL violation, solver breakdown, negative memory functional
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimResult {
  std::vector<EnergyRecord> series;
  std::optional<CertificationReport> report;
  bool diverged = false;
  long steps_taken = 0;
  double wall_seconds = 0.0;
};

/// Runs the simulation and, if requested, the certification of the run.
SimResult run_pipeline(const ProblemSpec& spec, bool certify = true);

/// Constants and hypotheses at t = 0 without time stepping.
CertificationReport certify_only(const ProblemSpec& spec);

ExitCode exit_code_for(const SimResult& result);

std::string series_csv(const std::vector<EnergyRecord>& series);
nlohmann::json report_to_json(const CertificationReport& report, const ProblemSpec& spec);
/// Indented JSON text with floating-point numbers as %.17g (non-finite as null).
std::string json_text(const nlohmann::json& j);

/// Writes the series CSV and (if present) the report JSON. Relative output
/// paths are resolved against `output_dir`. Throws IoError on failure.
void write_outputs(const SimResult& result, const ProblemSpec& spec,
                   const std::filesystem::path& output_dir);

/// Self-convergence study: the config is rerun with dt halved (time) or with
/// both n_cells -> 2 n_cells + 1 and dt halved (space). Differences between
/// consecutive levels are measured at the final time on the coarsest grid.
enum class RefinementKind { time, space };

struct ConvergenceLevel {
  double dt = 0.0;
  std::array<int, 2> n_cells{0, 0};
  double difference = 0.0;  ///< relative L2 distance to the next finer level
  double order = 0.0;       ///< log2 of successive difference ratios (0 for the first)
};

struct ConvergenceStudy {
  RefinementKind kind = RefinementKind::time;
  std::vector<ConvergenceLevel> levels;
};

ConvergenceStudy self_convergence(const ProblemSpec& spec, RefinementKind kind, int levels);
nlohmann::json convergence_to_json(const ConvergenceStudy& study);

/// u and v at the final recorded level.
struct FinalFields {
  Field u, v;
  double t = 0.0;
};
FinalFields run_to_end(const ProblemSpec& spec);

}  // namespace kvwave
