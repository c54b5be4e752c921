#include "kvwave/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "kvwave/integrator.hpp"

namespace kvwave {

namespace {

using nlohmann::json;

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// JSON text with every floating-point number rendered as %.17g.
void dump17(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(k).dump() + ": ";
        dump17(v, out, indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump17(j[i], out, indent, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? g17(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string to_text(const json& j) {
  std::string s;
  dump17(j, s, 2, 0);
  s += "\n";
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::filesystem::path resolve(const std::filesystem::path& dir, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute() || dir.empty()) return path;
  return dir / path;
}

}  // namespace

SimResult run_pipeline(const ProblemSpec& spec, bool certify) {
  const auto start = std::chrono::steady_clock::now();
  const Integrator integrator(spec);
  SimResult result;

  std::optional<CertificationReport> report;
  std::optional<WellMonitor> monitor;
  if (certify) {
    report = prepare_report(integrator.spec(), integrator.grid());
    monitor.emplace(*report, integrator.spec());
  }

  EnergyRecorder recorder(integrator.spec());
  Observer obs = [&](const Snapshot& s, const SimState&) {
    const EnergyRecord& r = recorder.record(s);
    if (monitor) monitor->observe(r);
  };
  const RunResult run_result = run(integrator, {obs}, spec.outputs.stride);

  result.series = recorder.series();
  result.diverged = run_result.diverged;
  result.steps_taken = run_result.steps_taken;
  if (report) {
    check_hypotheses(*report, result.series.front(), integrator.spec());
    monitor->finish(*report);
    decay_fit(result.series, *report);
    if (result.diverged) report->notes.push_back("run diverged before t_end");
    if (const long c = run_result.final_state.memory_clamps; c > 0)
      report->notes.push_back("memory functional: " + std::to_string(c) +
                              " tiny negative values (above -1e-12 relative) clamped to 0");
    result.report = std::move(report);
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

CertificationReport certify_only(const ProblemSpec& spec) {
  const Integrator integrator(spec);
  CertificationReport report = prepare_report(integrator.spec(), integrator.grid());
  Snapshot first;
  (void)integrator.initialize(&first);
  check_hypotheses(report, compute_E(first, integrator.spec()), integrator.spec());
  report.theorem_rate_bound = report.lambda / report.C0;
  report.proof_rate_bound = 2.0 * report.theorem_rate_bound;
  report.bound_applicable = report.lambda > 0.0;
  report.notes.push_back("constants only: no time stepping, trajectory and decay not checked");
  return report;
}

ExitCode exit_code_for(const SimResult& result) {
  if (result.diverged) return ExitCode::diverged;
  if (result.report) {
    const auto& r = *result.report;
    if (!r.hyp_E0_below_E1 || !r.hyp_initial_in_well || !r.trajectory_in_well)
      return ExitCode::hypothesis_failure;
  }
  return ExitCode::ok;
}

std::string series_csv(const std::vector<EnergyRecord>& series) {
  std::string s = "t,E,I,J,kinetic,memory,potential,dissipation_residual,alpha_t\n";
  for (const auto& r : series) {
    s += g17(r.t) + ',' + g17(r.E_value) + ',' + g17(r.I_value) + ',' + g17(r.J_value) + ',' +
         g17(r.kinetic) + ',' + g17(r.memory) + ',' + g17(r.potential) + ',' +
         g17(r.dissipation_residual) + ',' + g17(r.alpha) + '\n';
  }
  return s;
}

json report_to_json(const CertificationReport& r, const ProblemSpec& spec) {
  const Grid grid = spec.grid();
  json mesh;
  json lengths = json::array(), cells = json::array(), h = json::array();
  for (int a = 0; a < grid.dim(); ++a) {
    lengths.push_back(grid.length(a));
    cells.push_back(grid.n_cells(a));
    h.push_back(grid.h(a));
  }
  mesh["dim"] = grid.dim();
  mesh["lengths"] = lengths;
  mesh["n_cells"] = cells;
  mesh["h"] = h;
  mesh["dt"] = spec.numerics.dt;
  mesh["t_end"] = spec.numerics.t_end;
  mesh["memory_mode"] = to_string(spec.numerics.resolved_memory_mode());

  json j;
  j["eta_estimate"] = r.eta_estimate;
  j["eta_best_random"] = r.eta_best_random;
  j["eta_audit"] = {{"samples", r.eta_audit_samples}, {"violations", r.eta_audit_violations}};
  j["B"] = r.B;
  j["alpha_star"] = finite_or_null(r.alpha_star);
  j["E1"] = finite_or_null(r.E1);
  j["k1"] = r.k1;
  j["k2"] = r.k2;
  j["k"] = r.k;
  j["C_p"] = r.C_p;
  j["C1"] = r.C1;
  j["C3"] = r.C3;
  j["C0"] = r.C0;
  j["lambda"] = r.lambda;
  j["E0"] = r.E0;
  j["initial_well_norm"] = r.initial_well_norm;
  j["hyp_E0_below_E1"] = r.hyp_E0_below_E1;
  j["hyp_initial_in_well"] = r.hyp_initial_in_well;
  j["hyp_lambda_positive"] = r.hyp_lambda_positive;
  j["trajectory_checked"] = r.trajectory_checked;
  j["trajectory_in_well"] = r.trajectory_in_well;
  j["well_G_bound_holds"] = r.well_G_bound_holds;
  j["energy_chain_holds"] = r.energy_chain_holds;
  j["max_alpha"] = r.max_alpha;
  j["samples_monitored"] = r.samples_monitored;
  j["fit_available"] = r.fit_available;
  j["fitted_rate"] = r.fitted_rate;
  j["fit_window"] = {{"start", r.fit_window_start},
                     {"end", r.fit_window_end},
                     {"samples", r.fit_samples}};
  j["theorem_rate_bound"] = r.theorem_rate_bound;
  j["bound_applicable"] = r.bound_applicable;
  j["bound_satisfied"] = r.bound_satisfied;
  j["bound_samples_checked"] = r.bound_samples_checked;
  j["proof_rate_bound"] = r.proof_rate_bound;
  j["proof_bound_satisfied"] = r.proof_bound_satisfied;
  j["proof_bound_samples_checked"] = r.proof_bound_samples_checked;
  j["seed"] = r.seed;
  j["mesh"] = mesh;
  j["notes"] = r.notes;
  return j;
}

void write_outputs(const SimResult& result, const ProblemSpec& spec,
                   const std::filesystem::path& output_dir) {
  write_file(resolve(output_dir, spec.outputs.series_path), series_csv(result.series));
  if (result.report) {
    json j = report_to_json(*result.report, spec);
    j["run"] = {{"diverged", result.diverged},
                {"steps_taken", result.steps_taken},
                {"records", result.series.size()}};
    write_file(resolve(output_dir, spec.outputs.report_path), to_text(j));
  }
}

std::string json_text(const json& j) { return to_text(j); }

FinalFields run_to_end(const ProblemSpec& spec) {
  const Integrator integrator(spec);
  FinalFields out;
  Observer keep = [&](const Snapshot& s, const SimState&) {
    out.u = s.u;
    out.v = s.v;
    out.t = s.t;
  };
  const RunResult r = run(integrator, {keep}, 1 << 30);
  if (r.diverged) throw std::runtime_error("run_to_end: solution diverged");
  return out;
}

namespace {

// Restriction of a field on the level-`shift` refined grid to the coarse nodes.
std::vector<double> restrict_to(const Field& fine, const Grid& coarse, int shift) {
  const Grid& g = fine.grid();
  const int f = 1 << shift;
  std::vector<double> out(coarse.size());
  const int cnx = coarse.n_cells(0);
  const int fnx = g.n_cells(0);
  const int cny = coarse.dim() == 2 ? coarse.n_cells(1) : 1;
  for (int j = 0; j < cny; ++j) {
    const int fj = coarse.dim() == 2 ? (j + 1) * f - 1 : 0;
    for (int i = 0; i < cnx; ++i) {
      const int fi = (i + 1) * f - 1;
      out[i + static_cast<std::size_t>(cnx) * j] = fine[fi + static_cast<std::size_t>(fnx) * fj];
    }
  }
  return out;
}

}  // namespace

ConvergenceStudy self_convergence(const ProblemSpec& spec, RefinementKind kind, int levels) {
  if (levels < 3) throw std::invalid_argument("convergence: need at least 3 levels");
  const Grid coarse = spec.grid();
  std::vector<std::vector<double>> u_sol, v_sol;
  ConvergenceStudy study;
  study.kind = kind;
  for (int l = 0; l < levels; ++l) {
    ProblemSpec s = spec;
    s.numerics.dt = spec.numerics.dt / (1 << l);
    if (kind == RefinementKind::space) {
      for (int a = 0; a < s.domain.dim; ++a)
        s.domain.n_cells[a] = (spec.domain.n_cells[a] + 1) * (1 << l) - 1;
    }
    const FinalFields ff = run_to_end(s);
    const int shift = kind == RefinementKind::space ? l : 0;
    u_sol.push_back(restrict_to(ff.u, coarse, shift));
    v_sol.push_back(restrict_to(ff.v, coarse, shift));
    study.levels.push_back(ConvergenceLevel{.dt = s.numerics.dt, .n_cells = s.domain.n_cells});
  }
  for (int l = 0; l + 1 < levels; ++l) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u_sol[l].size(); ++i) {
      const double du = u_sol[l][i] - u_sol[l + 1][i];
      const double dv = v_sol[l][i] - v_sol[l + 1][i];
      num += du * du + dv * dv;
      den += u_sol[l + 1][i] * u_sol[l + 1][i] + v_sol[l + 1][i] * v_sol[l + 1][i];
    }
    study.levels[l].difference = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    if (l > 0 && study.levels[l].difference > 0.0)
      study.levels[l].order = std::log2(study.levels[l - 1].difference / study.levels[l].difference);
  }
  return study;
}

json convergence_to_json(const ConvergenceStudy& study) {
  json j;
  j["kind"] = study.kind == RefinementKind::time ? "time" : "space";
  json lv = json::array();
  for (std::size_t l = 0; l < study.levels.size(); ++l) {
    const auto& x = study.levels[l];
    json e = {{"dt", x.dt}, {"n_cells", {x.n_cells[0], x.n_cells[1]}}};
    if (l + 1 < study.levels.size()) e["difference_to_next"] = x.difference;
    if (l > 0 && l + 1 < study.levels.size()) e["observed_order"] = x.order;
    lv.push_back(e);
  }
  j["levels"] = lv;
  return j;
}

}  // namespace kvwave
