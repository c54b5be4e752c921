// kvwave: simulate and certify the coupled viscoelastic Kirchhoff system.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kvwave/config.hpp"
#include "kvwave/integrator.hpp"
#include "kvwave/pipeline.hpp"

namespace {

using namespace kvwave;

struct Options {
  std::string config;
  std::string output_dir = ".";
  std::optional<int> stride;
  std::optional<std::uint64_t> seed;
  std::string memory_mode;
  std::string kind = "time";
  int levels = 3;
  std::string output;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON configuration file")
      ->required()
      ->envname("KVWAVE_CONFIG");
  cmd->add_option("--seed", o.seed, "seed for the eta search")->envname("KVWAVE_SEED");
  cmd->add_option("--memory-mode", o.memory_mode, "direct or prony")
      ->check(CLI::IsMember({"direct", "prony"}))
      ->envname("KVWAVE_MEMORY_MODE");
}

ProblemSpec load(const Options& o) {
  ProblemSpec spec = parse_config(o.config);
  if (o.stride) spec.outputs.stride = *o.stride;
  if (o.seed) spec.seed = *o.seed;
  if (!o.memory_mode.empty()) spec.numerics.memory_mode = memory_mode_from_string(o.memory_mode);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("command line: ") + e.what());
  }
  return spec;
}

void print_summary(const SimResult& r) {
  std::fprintf(stderr, "steps: %ld  records: %zu  diverged: %s  wall: %.3f s\n", r.steps_taken,
               r.series.size(), r.diverged ? "yes" : "no", r.wall_seconds);
  if (!r.report) return;
  const auto& c = *r.report;
  std::fprintf(stderr,
               "eta = %.6g  alpha* = %.6g  E1 = %.6g  E0 = %.6g  lambda = %.6g\n"
               "E0 < E1: %s  initial in well: %s  lambda > 0: %s  trajectory in well: %s\n"
               "fitted rate = %.6g  theorem rate = %.6g  bound satisfied: %s\n",
               c.eta_estimate, c.alpha_star, c.E1, c.E0, c.lambda,
               c.hyp_E0_below_E1 ? "yes" : "no", c.hyp_initial_in_well ? "yes" : "no",
               c.hyp_lambda_positive ? "yes" : "no", c.trajectory_in_well ? "yes" : "no",
               c.fitted_rate, c.theorem_rate_bound, c.bound_satisfied ? "yes" : "no");
}

int cmd_run(const Options& o) {
  const ProblemSpec spec = load(o);
  const SimResult r = run_pipeline(spec, true);
  write_outputs(r, spec, o.output_dir);
  print_summary(r);
  return static_cast<int>(exit_code_for(r));
}

int cmd_certify(const Options& o) {
  const ProblemSpec spec = load(o);
  const CertificationReport rep = certify_only(spec);
  const std::filesystem::path path = std::filesystem::path(o.output_dir) / spec.outputs.report_path;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::string text = json_text(report_to_json(rep, spec));
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (std::fclose(f) != 0 || !ok) throw IoError("write failed for " + path.string());
  std::fputs(text.c_str(), stdout);
  if (!rep.hyp_E0_below_E1 || !rep.hyp_initial_in_well)
    return static_cast<int>(ExitCode::hypothesis_failure);
  return 0;
}

int cmd_convergence(const Options& o) {
  const ProblemSpec spec = load(o);
  const RefinementKind kind = o.kind == "space" ? RefinementKind::space : RefinementKind::time;
  const std::string text = json_text(convergence_to_json(self_convergence(spec, kind, o.levels)));
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_spec_dump(const Options& o) {
  const ProblemSpec spec = load(o);
  const std::string text = json_text(spec_to_json(spec));
  if (o.output.empty()) {
    std::fputs(text.c_str(), stdout);
    return 0;
  }
  std::FILE* f = std::fopen(o.output.c_str(), "wb");
  if (!f) throw IoError("cannot open " + o.output + " for writing");
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  if (std::fclose(f) != 0 || !ok) throw IoError("write failed for " + o.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and certifier for coupled viscoelastic Kirchhoff wave systems"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "simulate, record the energy series and certify");
  add_common(run, o);
  run->add_option("--output-dir", o.output_dir, "directory for relative output paths")
      ->envname("KVWAVE_OUTPUT_DIR");
  run->add_option("--stride", o.stride, "record every n-th step")
      ->check(CLI::PositiveNumber)
      ->envname("KVWAVE_STRIDE");

  auto* cert = app.add_subcommand("certify", "constants and hypotheses only, no time stepping");
  add_common(cert, o);
  cert->add_option("--output-dir", o.output_dir, "directory for the report")
      ->envname("KVWAVE_OUTPUT_DIR");

  auto* conv = app.add_subcommand("convergence", "self-convergence study under refinement");
  add_common(conv, o);
  conv->add_option("--kind", o.kind, "time or space")->check(CLI::IsMember({"time", "space"}));
  conv->add_option("--levels", o.levels, "number of refinement levels")
      ->check(CLI::Range(3, 8));

  auto* dump = app.add_subcommand("spec-dump", "print the fully resolved configuration");
  add_common(dump, o);
  dump->add_option("--output", o.output, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::config_error);
  }

  try {
    if (*run) return cmd_run(o);
    if (*cert) return cmd_certify(o);
    if (*conv) return cmd_convergence(o);
    return cmd_spec_dump(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config_error);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config_error);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::io_error);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::io_error);
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return static_cast<int>(ExitCode::numerical_failure);
  }
}
