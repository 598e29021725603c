// Command-line front end: sample, explore, encode, curve, validate.
//
// Exit status: 0 when every check passes, 1 when a check fails, 2 on bad
// input (config errors, unmet hypotheses). Internal invariant failures exit 1.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "hitfield/io.hpp"
#include "hitfield/validation.hpp"

namespace fs = std::filesystem;
using namespace hitfield;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 0;
  std::string mode = "field";
  std::string suite;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InputError("cannot write " + p.string());
  os << text;
}

void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

fs::path output_dir(const Options& o, const std::string& name, std::uint64_t seed) {
  if (!o.out.empty()) return o.out;
  const char* root = std::getenv("HITFIELD_OUT_ROOT");
  return fs::path(root && *root ? root : "runs") / (name + "-" + std::to_string(seed));
}

// Prints the checks and returns the exit status they imply.
int report(const std::string& name, const std::vector<Check>& checks, const fs::path& dir) {
  SuiteReport r{name, checks};
  write_json(dir / "report.json", suite_to_json(r));
  for (const Check& c : checks) {
    std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name << ": " << c.detail << "\n";
  }
  return r.pass() ? 0 : 1;
}

ClockSet clocks_for(const RunConfig& cfg, std::uint64_t seed) {
  if (cfg.clocks) return *cfg.clocks;
  Rng rng(seed);
  return sample_clocks(cfg.model, rng);
}

int cmd_sample(const RunConfig& cfg, std::uint64_t seed, const fs::path& dir) {
  Graph g = sample_graph(cfg.model, seed);
  std::ostringstream csv;
  write_edge_csv(csv, g, cfg.model);
  write_text(dir / "graph.csv", csv.str());
  auto comps = connected_components(g, cfg.model);
  write_json(dir / "components.json",
             {{"vertices", cfg.model.vertex_count()},
              {"edges", g.edges.size()},
              {"components", components_to_json(comps, cfg.model, cfg.rho)}});
  std::cout << g.edges.size() << " edges, " << comps.size() << " components\n";
  return 0;
}

int cmd_explore(const RunConfig& cfg, std::uint64_t seed, const std::string& mode,
                const fs::path& dir) {
  ExplorationTrace tr;
  if (mode == "field") {
    ClockSet clocks = clocks_for(cfg, seed);
    write_json(dir / "field.json", field_to_json(build_field(cfg.model, clocks)));
    tr = field_exploration(cfg.model, clocks, cfg.rho);
  } else {
    Graph g = sample_graph(cfg.model, seed);
    std::ostringstream csv;
    write_edge_csv(csv, g, cfg.model);
    write_text(dir / "graph.csv", csv.str());
    Rng rng(derive_seed(seed, 1));
    tr = graph_exploration(g, cfg.model, cfg.rho, rng);
  }
  write_json(dir / "trace.json", trace_to_json(tr, cfg.model));
  std::cout << tr.steps.size() << " steps, " << tr.zeta_inf() << " components\n";
  return 0;
}

int cmd_encode(const RunConfig& cfg, std::uint64_t seed, const fs::path& dir) {
  ClockSet clocks = clocks_for(cfg, seed);
  HittingProcess hp = hitting_process(cfg.model, clocks, cfg.rho);
  write_json(dir / "hitting_process.json", hitting_process_to_json(hp));
  std::cout << hp.levels.size() << " jumps\n";
  return report("encode", check_encoding(cfg.model, clocks, cfg.rho), dir);
}

int cmd_curve(const RunConfig& cfg, std::uint64_t seed, const fs::path& dir) {
  std::vector<double> rho = cfg.rho;
  if (!cfg.rho_given) {
    Factorization fk = factor_kernel(cfg.model.Q());
    if (!fk.ok) throw InputError("curve: kernel does not factor: " + fk.witness);
    rho = fk.rho;
  }
  SymmetryReport sym = check_symmetry(cfg.model, rho);
  if (!sym.ok) throw InputError("curve: field is not symmetric for this rho: " + sym.describe());

  ClockSet clocks = clocks_for(cfg, seed);
  Field f = build_field(cfg.model, clocks);
  CurveBundle b = build_curve(f, rho);
  LevelMaps lm(b, f);
  std::ostringstream csv;
  write_curve_csv(csv, b, lm.composed(0), curve_grid(b, lm.composed(0)));
  write_text(dir / "curve.csv", csv.str());
  auto enc = encode_components(b, f);
  write_json(dir / "excursions.json", excursions_to_json(enc));
  std::cout << enc.size() << " excursions\n";
  return report("curve", check_curve(cfg.model, clocks, rho), dir);
}

int cmd_validate(const std::optional<RunConfig>& cfg, std::uint64_t seed,
                 const Options& o, const fs::path& dir) {
  SuiteOptions opt;
  opt.seed = seed;
  opt.jobs = o.jobs;
  if (cfg) {
    opt.replications = cfg->experiment.replications;
    opt.alpha = cfg->experiment.alpha;
    opt.calibration_runs = cfg->experiment.calibration_runs;
    opt.test = cfg->experiment.test;
  }
  SuiteReport r = run_suite(o.suite, opt);
  return report(o.suite, r.checks, dir);
}

void add_common(CLI::App* sub, Options& o, bool config_required) {
  auto* c = sub->add_option("--config", o.config, "Run configuration (JSON)");
  if (config_required) c->required();
  sub->add_option("--seed", o.seed, "Seed, overriding the config");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--jobs", o.jobs, "Threads for Monte Carlo replications")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Component encodings of degree-corrected block models"};
  app.require_subcommand(1);
  Options o;
  auto* sample = app.add_subcommand("sample", "Sample a graph and its components");
  auto* explore = app.add_subcommand("explore", "Run a field or graph exploration");
  auto* encode = app.add_subcommand("encode", "Hitting-time jumps with pathwise checks");
  auto* curve = app.add_subcommand("curve", "Curve, composed process and excursions");
  auto* validate = app.add_subcommand("validate", "Run a validation suite");
  for (auto* s : {sample, explore, encode, curve}) add_common(s, o, true);
  add_common(validate, o, false);
  explore->add_option("--mode", o.mode, "field or graph")
      ->check(CLI::IsMember({"field", "graph"}));
  validate->add_option("--suite", o.suite, "functions, pathwise or distributional")
      ->required()
      ->check(CLI::IsMember({"functions", "pathwise", "distributional"}));
  CLI11_PARSE(app, argc, argv);

  const auto start = std::chrono::steady_clock::now();
  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  try {
    std::optional<RunConfig> cfg;
    if (!o.config.empty()) {
      cfg = load_config(o.config);
      for (const std::string& w : cfg->model.warnings()) std::cerr << "warning: " << w << "\n";
    }
    const std::uint64_t seed = o.seed ? *o.seed : cfg ? cfg->seed : 1;
    const fs::path dir =
        output_dir(o, name == "validate" ? name + "-" + o.suite : name, seed);
    fs::create_directories(dir);

    int status = 0;
    if (name == "sample") status = cmd_sample(*cfg, seed, dir);
    if (name == "explore") status = cmd_explore(*cfg, seed, o.mode, dir);
    if (name == "encode") status = cmd_encode(*cfg, seed, dir);
    if (name == "curve") status = cmd_curve(*cfg, seed, dir);
    if (name == "validate") status = cmd_validate(cfg, seed, o, dir);

    std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    Json manifest;
    manifest["command"] = name == "explore" ? name + " " + o.mode
                          : name == "validate" ? name + " " + o.suite
                                               : name;
    manifest["config"] = o.config.empty() ? Json() : Json(o.config);
    manifest["seed"] = seed;
    manifest["out"] = dir.string();
    manifest["version"] = kArtifactVersion;
    manifest["wall_clock_seconds"] = wall.count();
    write_json(dir / "manifest.json", manifest);
    std::cout << "wrote " << dir.string() << "\n";
    return status;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const InputError& e) {
    std::cerr << e.what() << "\n";
  } catch (const PreconditionError& e) {
    std::cerr << name << ": " << e.what() << "\n";
  } catch (const ModelError& e) {
    std::cerr << name << ": " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    std::cerr << e.what() << "\n";
  } catch (const InvariantViolation& e) {
    std::cerr << name << ": invariant violated: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 1;
  }
  return 2;
}
