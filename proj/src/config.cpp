#include "kvwave/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace kvwave {

namespace {

using nlohmann::json;

std::string type_name(const json& j) {
  if (j.is_number()) return "number";
  return j.type_name();
}

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ConfigError(origin_ + ": " + path + ": " + what);
  }

  const json& object(const json& parent, const std::string& key, const std::string& path,
                     const std::set<std::string>& allowed) const {
    const json& j = parent.at(key);
    if (!j.is_object()) fail(path, "expected object, got " + type_name(j));
    for (const auto& [k, _] : j.items()) {
      if (!allowed.count(k)) fail(path + "." + k, "unknown key");
    }
    return j;
  }

  void require(const json& parent, const std::string& key, const std::string& path) const {
    if (!parent.contains(key)) fail(path.empty() ? key : path + "." + key, "missing key");
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected number, got " + type_name(j));
    return j.get<double>();
  }

  long long integer(const json& j, const std::string& path) const {
    if (j.is_number_integer()) return j.get<long long>();
    if (j.is_number_float()) {
      const double d = j.get<double>();
      if (std::floor(d) == d && std::fabs(d) < 9e15) return static_cast<long long>(d);
    }
    fail(path, "expected integer, got " + (j.is_number() ? std::string("non-integer number")
                                                         : type_name(j)));
  }

  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected string, got " + type_name(j));
    return j.get<std::string>();
  }

  const json& array(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected array, got " + type_name(j));
    return j;
  }

  template <class T, class Fn>
  void optional(const json& parent, const std::string& key, const std::string& path, T& out,
                Fn&& convert) const {
    if (parent.contains(key)) out = convert(parent.at(key), path + "." + key);
  }

 private:
  std::string origin_;
};

int to_int(const Reader& r, const json& j, const std::string& path) {
  const long long v = r.integer(j, path);
  if (v < -2147483647LL || v > 2147483647LL) r.fail(path, "integer out of range");
  return static_cast<int>(v);
}

std::vector<PronyTerm> read_kernel(const Reader& r, const json& j, const std::string& path) {
  std::vector<PronyTerm> terms;
  const json& arr = r.array(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const json& t = arr[i];
    if (!t.is_object()) r.fail(p, "expected object, got " + type_name(t));
    for (const auto& [k, _] : t.items())
      if (k != "a" && k != "b") r.fail(p + "." + k, "unknown key");
    r.require(t, "a", p);
    r.require(t, "b", p);
    terms.push_back(PronyTerm{r.number(t["a"], p + ".a"), r.number(t["b"], p + ".b")});
  }
  return terms;
}

std::vector<SineMode> read_modes(const Reader& r, const json& j, const std::string& path,
                                 int dim) {
  std::vector<SineMode> modes;
  const json& arr = r.array(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const json& m = arr[i];
    if (!m.is_object()) r.fail(p, "expected object, got " + type_name(m));
    for (const auto& [k, _] : m.items())
      if (k != "index" && k != "amplitude") r.fail(p + "." + k, "unknown key");
    r.require(m, "index", p);
    r.require(m, "amplitude", p);
    const json& idx = r.array(m["index"], p + ".index");
    if (static_cast<int>(idx.size()) != dim)
      r.fail(p + ".index", "expected " + std::to_string(dim) + " entries (one per axis)");
    SineMode mode;
    for (int a = 0; a < dim; ++a) {
      mode.index[a] = to_int(r, idx[a], p + ".index[" + std::to_string(a) + "]");
      if (mode.index[a] < 1) r.fail(p + ".index[" + std::to_string(a) + "]", "must be >= 1");
    }
    mode.amplitude = r.number(m["amplitude"], p + ".amplitude");
    modes.push_back(mode);
  }
  return modes;
}

std::string line_column(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

const char* kind_name(LinearSolverConfig::Kind k) {
  switch (k) {
    case LinearSolverConfig::Kind::tridiagonal:
      return "tridiagonal";
    case LinearSolverConfig::Kind::conjugate_gradient:
      return "cg";
    default:
      return "auto";
  }
}

}  // namespace

ProblemSpec spec_from_json(const json& root, const std::string& origin) {
  const Reader r(origin);
  if (!root.is_object()) r.fail("<root>", "expected object, got " + type_name(root));
  const std::set<std::string> top{"domain",  "material", "kernels", "coupling", "initial",
                                  "numerics", "outputs",  "certify", "seed"};
  for (const auto& [k, _] : root.items())
    if (!top.count(k)) r.fail(k, "unknown key");
  for (const char* k : {"domain", "material", "coupling", "initial"}) r.require(root, k, "");

  ProblemSpec spec;

  const json& dom = r.object(root, "domain", "domain", {"dim", "lengths", "n_cells"});
  for (const char* k : {"dim", "lengths", "n_cells"}) r.require(dom, k, "domain");
  spec.domain.dim = to_int(r, dom["dim"], "domain.dim");
  const int dim = spec.domain.dim;
  if (dim != 1 && dim != 2) r.fail("domain.dim", "must be 1 or 2");
  const json& lengths = r.array(dom["lengths"], "domain.lengths");
  const json& cells = r.array(dom["n_cells"], "domain.n_cells");
  if (static_cast<int>(lengths.size()) != dim)
    r.fail("domain.lengths", "expected " + std::to_string(dim) + " entries");
  if (static_cast<int>(cells.size()) != dim)
    r.fail("domain.n_cells", "expected " + std::to_string(dim) + " entries");
  spec.domain.n_cells = {99, 1};
  if (dim == 1) spec.domain.n_cells[1] = 1;
  for (int a = 0; a < dim; ++a) {
    spec.domain.lengths[a] =
        r.number(lengths[a], "domain.lengths[" + std::to_string(a) + "]");
    spec.domain.n_cells[a] = to_int(r, cells[a], "domain.n_cells[" + std::to_string(a) + "]");
  }
  if (dim == 1) spec.domain.lengths[1] = 1.0;

  const json& mat = r.object(root, "material", "material", {"m0", "m1", "gamma"});
  r.require(mat, "m0", "material");
  spec.material.m0 = r.number(mat["m0"], "material.m0");
  auto num = [&](const json& j, const std::string& p) { return r.number(j, p); };
  auto integer = [&](const json& j, const std::string& p) { return to_int(r, j, p); };
  r.optional(mat, "m1", "material", spec.material.m1, num);
  r.optional(mat, "gamma", "material", spec.material.gamma, num);

  if (root.contains("kernels")) {
    const json& ker = r.object(root, "kernels", "kernels", {"g1", "g2"});
    try {
      if (ker.contains("g1")) spec.g1 = PronyKernel(read_kernel(r, ker["g1"], "kernels.g1"));
      if (ker.contains("g2")) spec.g2 = PronyKernel(read_kernel(r, ker["g2"], "kernels.g2"));
    } catch (const std::invalid_argument& e) {
      r.fail("kernels", e.what());
    }
  }

  const json& cpl = r.object(root, "coupling", "coupling", {"a", "b", "p"});
  r.require(cpl, "p", "coupling");
  spec.coupling.p = r.number(cpl["p"], "coupling.p");
  r.optional(cpl, "a", "coupling", spec.coupling.a, num);
  r.optional(cpl, "b", "coupling", spec.coupling.b, num);
  spec.coupling.n = dim;

  const json& ini =
      r.object(root, "initial", "initial", {"u0_modes", "u1_modes", "v0_modes", "v1_modes"});
  auto modes = [&](const char* key, std::vector<SineMode>& out) {
    if (ini.contains(key)) out = read_modes(r, ini[key], std::string("initial.") + key, dim);
  };
  modes("u0_modes", spec.initial.u0);
  modes("u1_modes", spec.initial.u1);
  modes("v0_modes", spec.initial.v0);
  modes("v1_modes", spec.initial.v1);

  if (root.contains("numerics")) {
    const json& nm =
        r.object(root, "numerics", "numerics",
                 {"dt", "t_end", "memory_mode", "linear_solver", "divergence_threshold",
                  "cfl_safety"});
    auto& n = spec.numerics;
    r.optional(nm, "dt", "numerics", n.dt, num);
    r.optional(nm, "t_end", "numerics", n.t_end, num);
    r.optional(nm, "divergence_threshold", "numerics", n.divergence_threshold, num);
    r.optional(nm, "cfl_safety", "numerics", n.cfl_safety, num);
    if (nm.contains("memory_mode")) {
      const std::string m = r.string(nm["memory_mode"], "numerics.memory_mode");
      if (m == "auto") {
        n.memory_mode.reset();
      } else if (m == "direct" || m == "prony") {
        n.memory_mode = memory_mode_from_string(m);
      } else {
        r.fail("numerics.memory_mode", "expected \"direct\", \"prony\" or \"auto\", got \"" + m + "\"");
      }
    }
    if (nm.contains("linear_solver")) {
      const json& ls = r.object(nm, "linear_solver", "numerics.linear_solver",
                                {"kind", "tolerance", "max_iterations"});
      auto& c = n.linear_solver;
      if (ls.contains("kind")) {
        const std::string k = r.string(ls["kind"], "numerics.linear_solver.kind");
        if (k == "auto") {
          c.kind = LinearSolverConfig::Kind::automatic;
        } else if (k == "tridiagonal") {
          c.kind = LinearSolverConfig::Kind::tridiagonal;
        } else if (k == "cg") {
          c.kind = LinearSolverConfig::Kind::conjugate_gradient;
        } else {
          r.fail("numerics.linear_solver.kind",
                 "expected \"auto\", \"tridiagonal\" or \"cg\", got \"" + k + "\"");
        }
      }
      r.optional(ls, "tolerance", "numerics.linear_solver", c.tolerance, num);
      r.optional(ls, "max_iterations", "numerics.linear_solver", c.max_iterations, integer);
    }
  }

  if (root.contains("outputs")) {
    const json& out =
        r.object(root, "outputs", "outputs", {"series_path", "report_path", "stride"});
    auto str = [&](const json& j, const std::string& p) { return r.string(j, p); };
    r.optional(out, "series_path", "outputs", spec.outputs.series_path, str);
    r.optional(out, "report_path", "outputs", spec.outputs.report_path, str);
    r.optional(out, "stride", "outputs", spec.outputs.stride, integer);
  }

  if (root.contains("certify")) {
    const json& c = r.object(root, "certify", "certify",
                             {"eta_trials", "refine_steps", "modes_per_axis", "audit_samples"});
    r.optional(c, "eta_trials", "certify", spec.certify.eta_trials, integer);
    r.optional(c, "refine_steps", "certify", spec.certify.refine_steps, integer);
    r.optional(c, "modes_per_axis", "certify", spec.certify.modes_per_axis, integer);
    r.optional(c, "audit_samples", "certify", spec.certify.audit_samples, integer);
  }

  if (root.contains("seed")) {
    const json& s = root["seed"];
    if (!s.is_number_unsigned()) r.fail("seed", "expected nonnegative integer, got " + type_name(s));
    spec.seed = s.get<std::uint64_t>();
  }

  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return spec;
}

ProblemSpec parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    const auto pos = what.find("syntax error");
    if (pos != std::string::npos) what = what.substr(pos);
    throw ConfigError(origin + ":" + line_column(text, e.byte) + ": " + what);
  }
  return spec_from_json(root, origin);
}

ProblemSpec parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

json spec_to_json(const ProblemSpec& spec) {
  const int dim = spec.domain.dim;
  json j;
  json lengths = json::array(), cells = json::array();
  for (int a = 0; a < dim; ++a) {
    lengths.push_back(spec.domain.lengths[a]);
    cells.push_back(spec.domain.n_cells[a]);
  }
  j["domain"] = {{"dim", dim}, {"lengths", lengths}, {"n_cells", cells}};
  j["material"] = {{"m0", spec.material.m0}, {"m1", spec.material.m1},
                   {"gamma", spec.material.gamma}};
  auto kernel = [](const PronyKernel& k) {
    json arr = json::array();
    for (const auto& t : k.terms()) arr.push_back({{"a", t.a}, {"b", t.b}});
    return arr;
  };
  j["kernels"] = {{"g1", kernel(spec.g1)}, {"g2", kernel(spec.g2)}};
  j["coupling"] = {{"a", spec.coupling.a}, {"b", spec.coupling.b}, {"p", spec.coupling.p}};
  auto modes = [dim](const std::vector<SineMode>& ms) {
    json arr = json::array();
    for (const auto& m : ms) {
      json idx = json::array();
      for (int a = 0; a < dim; ++a) idx.push_back(m.index[a]);
      arr.push_back({{"index", idx}, {"amplitude", m.amplitude}});
    }
    return arr;
  };
  j["initial"] = {{"u0_modes", modes(spec.initial.u0)},
                  {"u1_modes", modes(spec.initial.u1)},
                  {"v0_modes", modes(spec.initial.v0)},
                  {"v1_modes", modes(spec.initial.v1)}};
  const auto& n = spec.numerics;
  j["numerics"] = {
      {"dt", n.dt},
      {"t_end", n.t_end},
      {"memory_mode", n.memory_mode ? to_string(*n.memory_mode) : std::string("auto")},
      {"linear_solver",
       {{"kind", kind_name(n.linear_solver.kind)},
        {"tolerance", n.linear_solver.tolerance},
        {"max_iterations", n.linear_solver.max_iterations}}},
      {"divergence_threshold", n.divergence_threshold},
      {"cfl_safety", n.cfl_safety}};
  j["outputs"] = {{"series_path", spec.outputs.series_path},
                  {"report_path", spec.outputs.report_path},
                  {"stride", spec.outputs.stride}};
  j["certify"] = {{"eta_trials", spec.certify.eta_trials},
                  {"refine_steps", spec.certify.refine_steps},
                  {"modes_per_axis", spec.certify.modes_per_axis},
                  {"audit_samples", spec.certify.audit_samples}};
  j["seed"] = spec.seed;
  return j;
}

}  // namespace kvwave
