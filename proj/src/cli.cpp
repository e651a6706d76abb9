#include "rpinn/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rpinn/mesh.hpp"
#include "rpinn/network.hpp"
#include "rpinn/problems.hpp"
#include "rpinn/recovery.hpp"
#include "rpinn/training.hpp"

namespace rpinn {
namespace {

using nlohmann::json;

// Raised for anything wrong with the configuration itself; maps to exit 1.
// Every other exception escaping a command maps to exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config schema

struct RunSpec {
  std::string problem;
  std::string data_dir = "data";
  TrainConfig cfg;
  json sweep;  // null unless the config carries sweep axes
};

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
}

[[noreturn]] void field_error(const std::string& scope, const char* key,
                              const std::string& why) {
  throw ConfigError("config field '" + scope + key + "': " + why);
}

void take_int(json& obj, const std::string& scope, const char* key, int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) field_error(scope, key, "expected an integer");
  out = v.get<int>();
  obj.erase(key);
}

void take_double(json& obj, const std::string& scope, const char* key,
                 double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) field_error(scope, key, "expected a number");
  out = v.get<double>();
  obj.erase(key);
}

void take_string(json& obj, const std::string& scope, const char* key,
                 std::string& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) field_error(scope, key, "expected a string");
  out = v.get<std::string>();
  obj.erase(key);
}

void take_seed(json& obj, const char* key, std::uint64_t& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    field_error("", key, "expected a non-negative integer");
  out = v.get<std::uint64_t>();
  obj.erase(key);
}

void reject_leftovers(const json& obj, const std::string& scope) {
  if (obj.empty()) return;
  std::string names;
  for (const auto& item : obj.items()) {
    if (!names.empty()) names += ", ";
    names += "'" + scope + item.key() + "'";
  }
  throw ConfigError("unknown config field " + names);
}

std::string valid_problem_list() {
  std::string out;
  for (const std::string& n : problem_names()) {
    if (!out.empty()) out += ' ';
    out += n;
  }
  return out;
}

// Defaults come from the per-problem training budget; every field in the
// file (plus any --override patches already applied to `j`) lands on top.
RunSpec resolve_config(json j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  RunSpec spec;
  take_string(j, "", "problem", spec.problem);
  if (spec.problem.empty())
    throw ConfigError("config needs a 'problem' name; valid names: " +
                      valid_problem_list());
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), spec.problem) == names.end())
    throw ConfigError("unknown problem '" + spec.problem +
                      "'; valid names: " + valid_problem_list());
  spec.cfg = default_config(spec.problem);
  take_string(j, "", "data_dir", spec.data_dir);

  TrainConfig& c = spec.cfg;
  take_int(j, "", "n1", c.n1);
  take_int(j, "", "n2", c.n2);
  take_int(j, "", "adaptive_iterations", c.adaptive_iterations);
  take_int(j, "", "pretrain_epochs", c.pretrain_epochs);
  take_int(j, "", "adaptive_epochs", c.adaptive_epochs);
  take_int(j, "", "boundary_count", c.boundary_count);
  take_double(j, "", "w_f", c.w_f);
  take_double(j, "", "w_b", c.w_b);
  take_double(j, "", "w_i", c.w_i);
  take_int(j, "", "mesh_nx", c.mesh_nx);
  take_int(j, "", "mesh_ny", c.mesh_ny);
  take_double(j, "", "epsilon", c.epsilon);
  take_seed(j, "seed", c.seed);
  take_int(j, "", "eval_nx", c.eval_nx);
  take_int(j, "", "eval_ny", c.eval_ny);
  take_string(j, "", "out_dir", c.out_dir);

  std::string method = to_string(c.recovery_method);
  take_string(j, "", "recovery_method", method);
  try {
    c.recovery_method = recovery_method_from_string(method);
  } catch (const std::invalid_argument& e) {
    field_error("", "recovery_method", e.what());
  }

  if (j.contains("net")) {
    json sub = j.at("net");
    if (!sub.is_object()) field_error("", "net", "expected an object");
    take_int(sub, "net.", "hidden_layers", c.net.hidden_layers);
    take_int(sub, "net.", "hidden_width", c.net.hidden_width);
    reject_leftovers(sub, "net.");
    j.erase("net");
  }
  if (j.contains("optimizer")) {
    json sub = j.at("optimizer");
    if (!sub.is_object()) field_error("", "optimizer", "expected an object");
    take_int(sub, "optimizer.", "history", c.optimizer.history);
    take_double(sub, "optimizer.", "c1", c.optimizer.c1);
    take_double(sub, "optimizer.", "c2", c.optimizer.c2);
    take_double(sub, "optimizer.", "learning_rate", c.optimizer.learning_rate);
    take_int(sub, "optimizer.", "max_line_search", c.optimizer.max_line_search);
    take_double(sub, "optimizer.", "grad_tolerance",
                c.optimizer.grad_tolerance);
    reject_leftovers(sub, "optimizer.");
    j.erase("optimizer");
  }
  if (j.contains("sweep")) {
    if (!j.at("sweep").is_object())
      field_error("", "sweep", "expected an object");
    spec.sweep = j.at("sweep");
    j.erase("sweep");
  }
  reject_leftovers(j, "");

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return spec;
}

// `key=value` patch; dotted keys reach nested objects, the value is parsed
// as JSON where possible and falls back to a plain string.
void apply_override(json& j, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key=value, got '" + kv + "'");
  std::string ptr = "/" + kv.substr(0, eq);
  std::replace(ptr.begin(), ptr.end(), '.', '/');
  json value = json::parse(kv.substr(eq + 1), nullptr, false);
  if (value.is_discarded()) value = kv.substr(eq + 1);
  try {
    j[json::json_pointer(ptr)] = std::move(value);
  } catch (const json::exception& e) {
    throw ConfigError("cannot apply override '" + kv + "': " + e.what());
  }
}

// Fully-resolved echo; feeding this back through resolve_config reproduces
// the same RunSpec, so a run can be replayed from its output directory.
json resolved_json(const RunSpec& spec) {
  const TrainConfig& c = spec.cfg;
  json j;
  j["problem"] = spec.problem;
  j["data_dir"] = spec.data_dir;
  j["n1"] = c.n1;
  j["n2"] = c.n2;
  j["adaptive_iterations"] = c.adaptive_iterations;
  j["pretrain_epochs"] = c.pretrain_epochs;
  j["adaptive_epochs"] = c.adaptive_epochs;
  j["boundary_count"] = c.boundary_count;
  j["w_f"] = c.w_f;
  j["w_b"] = c.w_b;
  j["w_i"] = c.w_i;
  j["mesh_nx"] = c.mesh_nx;
  j["mesh_ny"] = c.mesh_ny;
  j["epsilon"] = c.epsilon;
  j["recovery_method"] = to_string(c.recovery_method);
  j["seed"] = c.seed;
  j["eval_nx"] = c.eval_nx;
  j["eval_ny"] = c.eval_ny;
  j["out_dir"] = c.out_dir;
  j["net"] = {{"hidden_layers", c.net.hidden_layers},
              {"hidden_width", c.net.hidden_width}};
  j["optimizer"] = {{"history", c.optimizer.history},
                    {"c1", c.optimizer.c1},
                    {"c2", c.optimizer.c2},
                    {"learning_rate", c.optimizer.learning_rate},
                    {"max_line_search", c.optimizer.max_line_search},
                    {"grad_tolerance", c.optimizer.grad_tolerance}};
  if (!spec.sweep.is_null()) j["sweep"] = spec.sweep;
  return j;
}

void write_resolved(const RunSpec& spec, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/config_resolved.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << resolved_json(spec).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Commands

void print_run_summary(const std::string& tag, const RunSpec& spec,
                       const std::vector<IterationReport>& reports) {
  const IterationReport& fin = reports.back();
  double seconds = 0.0;
  for (const IterationReport& r : reports) seconds += r.seconds;
  std::printf(
      "%s %s seed=%llu phases=%zu: rel_l2=%.6g l_inf=%.6g loss=%.6g "
      "time=%.1fs out=%s\n",
      tag.c_str(), spec.problem.c_str(),
      static_cast<unsigned long long>(spec.cfg.seed), reports.size(),
      fin.rel_l2, fin.l_inf, fin.loss, seconds,
      spec.cfg.out_dir.empty() ? "-" : spec.cfg.out_dir.c_str());
  std::fflush(stdout);
}

int do_run(const RunSpec& spec) {
  const PdeProblem problem = make_problem(spec.problem, spec.data_dir);
  if (!spec.cfg.out_dir.empty()) write_resolved(spec, spec.cfg.out_dir);
  const std::vector<IterationReport> reports = run_rpinn(problem, spec.cfg);
  print_run_summary("run", spec, reports);
  return 0;
}

struct SweepAxes {
  std::vector<int> n1, n2, mesh;
};

SweepAxes parse_sweep_axes(const json& sweep) {
  if (!sweep.is_object() || sweep.empty())
    throw ConfigError(
        "sweep needs a 'sweep' object with at least one axis over n1, n2, or "
        "mesh");
  SweepAxes axes;
  json j = sweep;
  auto take_axis = [&](const char* key, std::vector<int>& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_array() || v.empty())
      field_error("sweep.", key, "expected a non-empty array of integers");
    for (const json& e : v) {
      if (!e.is_number_integer())
        field_error("sweep.", key, "expected a non-empty array of integers");
      out.push_back(e.get<int>());
    }
    j.erase(key);
  };
  take_axis("n1", axes.n1);
  take_axis("n2", axes.n2);
  take_axis("mesh", axes.mesh);
  reject_leftovers(j, "sweep.");
  return axes;
}

int do_sweep(const RunSpec& spec) {
  if (spec.cfg.out_dir.empty())
    throw ConfigError("sweep needs an out_dir for its per-run artifacts");
  const SweepAxes axes = parse_sweep_axes(spec.sweep);

  // materialize the full grid up front so any invalid cell fails before a
  // single (possibly expensive) run starts
  struct Cell {
    RunSpec spec;
    std::string dir_name;
    int n1, n2, mesh_nx, mesh_ny;
  };
  const std::vector<int> one{-1};  // marker: axis absent, keep base value
  const auto& n1s = axes.n1.empty() ? one : axes.n1;
  const auto& n2s = axes.n2.empty() ? one : axes.n2;
  const auto& meshes = axes.mesh.empty() ? one : axes.mesh;

  std::vector<Cell> cells;
  for (int n1 : n1s)
    for (int n2 : n2s)
      for (int mesh : meshes) {
        Cell cell;
        cell.spec = spec;
        cell.spec.sweep = nullptr;  // per-run echoes carry no sweep axes
        TrainConfig& c = cell.spec.cfg;
        std::string label;
        if (n1 >= 0) {
          c.n1 = n1;
          label += "_n1_" + std::to_string(n1);
        }
        if (n2 >= 0) {
          c.n2 = n2;
          label += "_n2_" + std::to_string(n2);
        }
        if (mesh >= 0) {
          c.mesh_nx = c.mesh_ny = mesh;
          label += "_mesh_" + std::to_string(mesh);
        }
        char head[16];
        std::snprintf(head, sizeof head, "run%02zu", cells.size());
        cell.dir_name = head + label;
        c.out_dir = spec.cfg.out_dir + "/" + cell.dir_name;
        try {
          c.validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError("invalid sweep cell " + cell.dir_name + ": " +
                            e.what());
        }
        cell.n1 = c.n1;
        cell.n2 = c.n2;
        cell.mesh_nx = c.mesh_nx;
        cell.mesh_ny = c.mesh_ny;
        cells.push_back(std::move(cell));
      }

  write_resolved(spec, spec.cfg.out_dir);
  const PdeProblem problem = make_problem(spec.problem, spec.data_dir);

  std::string summary = "run,dir,n1,n2,mesh_nx,mesh_ny,rel_l2,l_inf,loss,seconds\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& cell = cells[i];
    std::printf("[%zu/%zu] ", i + 1, cells.size());
    write_resolved(cell.spec, cell.spec.cfg.out_dir);
    const std::vector<IterationReport> reports =
        run_rpinn(problem, cell.spec.cfg);
    print_run_summary("sweep", cell.spec, reports);

    const IterationReport& fin = reports.back();
    double seconds = 0.0;
    for (const IterationReport& r : reports) seconds += r.seconds;
    char row[512];
    std::snprintf(row, sizeof row, "%zu,%s,%d,%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                  i, cell.dir_name.c_str(), cell.n1, cell.n2, cell.mesh_nx,
                  cell.mesh_ny, fin.rel_l2, fin.l_inf, fin.loss, seconds);
    summary += row;
  }

  const std::string summary_path = spec.cfg.out_dir + "/sweep_summary.csv";
  std::ofstream out(summary_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + summary_path);
  out << summary;
  out.close();
  std::printf("sweep %s: %zu runs, summary %s\n", spec.problem.c_str(),
              cells.size(), summary_path.c_str());
  return 0;
}

int do_estimate(const RunSpec& spec) {
  if (spec.cfg.out_dir.empty())
    throw ConfigError("estimate needs an out_dir holding params.ckpt");
  const std::string ckpt_path = spec.cfg.out_dir + "/params.ckpt";
  const auto [net, params] = load_checkpoint(ckpt_path);

  const PdeProblem problem = make_problem(spec.problem, spec.data_dir);
  const TriMesh mesh(problem.domain, spec.cfg.mesh_nx, spec.cfg.mesh_ny);
  const NodalScalarField u_h = interpolate_nodal(
      mesh, [&](Vec2 p) { return forward(net, params, p); });
  const ErrorIndicator ind =
      estimate(mesh, u_h, spec.cfg.recovery_method);

  const std::string eta_path = spec.cfg.out_dir + "/eta.csv";
  std::string csv = "element,eta\n";
  for (std::size_t i = 0; i < ind.eta.size(); ++i) {
    char row[48];
    std::snprintf(row, sizeof row, "%zu,%.17g\n", i, ind.eta[i]);
    csv += row;
  }
  std::ofstream out(eta_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + eta_path);
  out << csv;
  out.close();

  std::size_t worst = 0;
  for (std::size_t i = 1; i < ind.eta.size(); ++i)
    if (ind.eta[i] > ind.eta[worst]) worst = i;
  std::printf(
      "estimate %s: elements=%zu total=%.6g max=%.6g at element %zu -> %s\n",
      spec.problem.c_str(), ind.eta.size(), std::sqrt(ind.total_squared()),
      ind.eta.empty() ? 0.0 : ind.eta[worst], worst, eta_path.c_str());
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{
      "Adaptive collocation trainer for PDE-constrained neural networks,\n"
      "driven by a recovery-based a-posteriori error indicator."};
  app.require_subcommand(1);

  struct SubArgs {
    CLI::App* cmd = nullptr;
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::vector<std::string> overrides;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
  };
  auto make_sub = [&app](const char* name, const char* desc) {
    SubArgs s;
    s.cmd = app.add_subcommand(name, desc);
    s.cmd->add_option("config", s.config, "JSON configuration file")
        ->required();
    s.seed_opt = s.cmd->add_option("--seed", s.seed, "override the RNG seed");
    s.out_opt =
        s.cmd->add_option("--out", s.out, "override the output directory");
    s.cmd->add_option("--override", s.overrides,
                      "patch a config field, key=value (repeatable)");
    return s;
  };
  SubArgs run_args = make_sub("run", "train per the config, write artifacts");
  SubArgs sweep_args =
      make_sub("sweep", "grid of runs over the config's sweep axes");
  SubArgs estimate_args = make_sub(
      "estimate", "per-element error indicator of a stored checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const SubArgs* sub = nullptr;
  if (run_args.cmd->parsed()) sub = &run_args;
  if (sweep_args.cmd->parsed()) sub = &sweep_args;
  if (estimate_args.cmd->parsed()) sub = &estimate_args;

  try {
    json j = load_json_file(sub->config);
    for (const std::string& kv : sub->overrides) apply_override(j, kv);
    RunSpec spec = resolve_config(std::move(j));
    if (sub->seed_opt->count() > 0) spec.cfg.seed = sub->seed;
    if (sub->out_opt->count() > 0) spec.cfg.out_dir = sub->out;

    if (sub == &run_args) return do_run(spec);
    if (sub == &sweep_args) return do_sweep(spec);
    return do_estimate(spec);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace rpinn
