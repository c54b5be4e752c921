#pragma once

/// @file config.hpp
/// @brief JSON configuration files: parsing with field-path errors, and the
/// full dump used by `spec-dump`.
///
/// Layout (all sections except domain, material, coupling and initial are
/// optional and fall back to defaults):
///
///   {
///     "domain":   {"dim": 1, "lengths": [3.14159], "n_cells": [99]},
///     "material": {"m0": 1.0, "m1": 0.1, "gamma": 1.0},
///     "kernels":  {"g1": [{"a": 0.25, "b": 1.0}], "g2": [...]},
///     "coupling": {"a": 1.0, "b": 1.0, "p": 1.0},
///     "initial":  {"u0_modes": [{"index": [1], "amplitude": 0.05}], "u1_modes": [], ...},
///     "numerics": {"dt": 1e-3, "t_end": 10, "memory_mode": "direct",
///                  "linear_solver": {"kind": "auto", "tolerance": 1e-12, "max_iterations": 5000},
///                  "divergence_threshold": 1e12, "cfl_safety": 0.5},
///     "outputs":  {"series_path": "series.csv", "report_path": "report.json", "stride": 1},
///     "certify":  {"eta_trials": 2000, "refine_steps": 200, "modes_per_axis": 8, "audit_samples": 1000},
///     "seed": 20240101
///   }

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "kvwave/problem.hpp"

namespace kvwave {

/// Any problem with a configuration document. The message starts with the
/// file name and either a line:column (syntax) or a field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses and validates. `origin` names the source in error messages.
ProblemSpec parse_config_text(const std::string& text, const std::string& origin = "<config>");
ProblemSpec parse_config(const std::string& path);

ProblemSpec spec_from_json(const nlohmann::json& j, const std::string& origin = "<config>");
/// Every field, defaults included; spec_from_json(spec_to_json(s)) == s.
nlohmann::json spec_to_json(const ProblemSpec& spec);

}  // namespace kvwave
