#include "hitfield/io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace hitfield {

ConfigError::ConfigError(const std::string& source, int line,
                         const std::string& field, const std::string& problem)
    : PreconditionError(source + ":" + std::to_string(line) + ": " +
                        (field.empty() ? std::string("(root)") : field) + ": " +
                        problem),
      line_(line),
      field_(field) {}

namespace {

// Forward iterator over a buffer that counts newlines as it advances, so the
// parser callback can tell on which line a key or value starts.
struct LineIter {
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  int* line = nullptr;

  reference operator*() const { return *p; }
  LineIter& operator++() {
    if (*p == '\n') ++*line;
    ++p;
    return *this;
  }
  LineIter operator++(int) {
    LineIter old = *this;
    ++*this;
    return old;
  }
  bool operator==(const LineIter& o) const { return p == o.p; }
  bool operator!=(const LineIter& o) const { return p != o.p; }
};

struct Frame {
  bool array = false;
  int index = -1;
  std::string key;
};

std::string pointer_of(const std::vector<Frame>& stack) {
  std::string out;
  for (const Frame& f : stack) {
    out += "/";
    out += f.array ? std::to_string(f.index) : f.key;
  }
  return out;
}

class Reader {
 public:
  Reader(std::string source, std::map<std::string, int> lines)
      : source_(std::move(source)), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& problem) const {
    throw ConfigError(source_, line_of(field), field, problem);
  }

  int line_of(const std::string& field) const {
    std::string f = field;
    while (true) {
      auto it = lines_.find(f);
      if (it != lines_.end()) return it->second;
      if (f.empty()) return 1;
      f.erase(f.rfind('/'));
    }
  }

  double number(const Json& j, const std::string& field) const {
    if (!j.is_number()) fail(field, "expected a number");
    double x = j.get<double>();
    if (!std::isfinite(x)) fail(field, "expected a finite number");
    return x;
  }

  std::vector<double> vector(const Json& j, const std::string& field,
                             std::optional<std::size_t> len) const {
    if (!j.is_array()) fail(field, "expected an array of numbers");
    if (len && j.size() != *len) {
      fail(field, "expected " + std::to_string(*len) + " entries, got " +
                      std::to_string(j.size()));
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
      out.push_back(number(j[k], field + "/" + std::to_string(k)));
    }
    return out;
  }

  void only(const Json& obj, const std::string& field,
            const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(field, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.count(key)) fail(field + "/" + key, "unknown field");
    }
  }

 private:
  std::string source_;
  std::map<std::string, int> lines_;
};

Json parse_with_lines(std::string_view text, const std::string& source,
                      std::map<std::string, int>& lines) {
  int line = 1;
  std::vector<Frame> stack;
  auto element = [&]() {
    if (!stack.empty() && stack.back().array) {
      ++stack.back().index;
      lines.emplace(pointer_of(stack), line);
    }
  };
  Json::parser_callback_t cb = [&](int, Json::parse_event_t ev, Json& parsed) {
    switch (ev) {
      case Json::parse_event_t::object_start:
      case Json::parse_event_t::array_start:
        element();
        if (stack.empty()) lines.emplace("", line);
        stack.push_back({ev == Json::parse_event_t::array_start, -1, {}});
        break;
      case Json::parse_event_t::key:
        stack.back().key = parsed.get<std::string>();
        lines.emplace(pointer_of(stack), line);
        break;
      case Json::parse_event_t::value:
        element();
        break;
      case Json::parse_event_t::object_end:
      case Json::parse_event_t::array_end:
        stack.pop_back();
        break;
    }
    return true;
  };
  LineIter first{text.data(), &line};
  LineIter last{text.data() + text.size(), &line};
  try {
    return Json::parse(first, last, cb);
  } catch (const Json::parse_error& e) {
    int at = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') ++at;
    }
    throw ConfigError(source, at, "", "malformed JSON");
  }
}

std::uint64_t read_seed(const Reader& rd, const Json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  rd.fail("/seed", "expected a nonnegative integer");
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& source) {
  std::map<std::string, int> lines;
  Json root = parse_with_lines(text, source, lines);
  Reader rd(source, lines);
  rd.only(root, "", {"version", "m", "weights", "Q", "rho", "seed", "clocks",
                     "experiment"});

  if (!root.contains("version")) rd.fail("/version", "missing");
  if (!root["version"].is_number_integer() || root["version"].get<int>() != kConfigVersion) {
    rd.fail("/version", "unsupported schema version (expected " +
                            std::to_string(kConfigVersion) + ")");
  }
  for (const char* key : {"m", "weights", "Q"}) {
    if (!root.contains(key)) rd.fail(std::string("/") + key, "missing");
  }
  if (!root["m"].is_number_integer() || root["m"].get<long>() < 1) {
    rd.fail("/m", "expected a positive integer");
  }
  const std::size_t m = root["m"].get<std::size_t>();

  const Json& jw = root["weights"];
  if (!jw.is_array() || jw.size() != m) {
    rd.fail("/weights", "expected an array of m = " + std::to_string(m) + " weight arrays");
  }
  std::vector<std::vector<double>> weights;
  for (std::size_t i = 0; i < m; ++i) {
    std::string field = "/weights/" + std::to_string(i);
    weights.push_back(rd.vector(jw[i], field, std::nullopt));
    for (std::size_t l = 0; l < weights.back().size(); ++l) {
      if (weights.back()[l] <= 0.0) {
        rd.fail(field + "/" + std::to_string(l), "weights must be positive");
      }
    }
  }

  const Json& jq = root["Q"];
  if (!jq.is_array() || jq.size() != m) rd.fail("/Q", "expected an m x m array");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < m; ++i) {
    rows.push_back(rd.vector(jq[i], "/Q/" + std::to_string(i), m));
  }

  std::optional<BlockModel> model;
  try {
    model.emplace(weights, SquareMatrix::from_rows(rows));
  } catch (const ModelError& e) {
    rd.fail(std::string(e.what()).rfind("weights", 0) == 0 ? "/weights" : "/Q",
            e.what());
  }

  std::vector<double> rho(m, 1.0);
  if (root.contains("rho")) {
    rho = rd.vector(root["rho"], "/rho", m);
    try {
      validate_rho(rho, static_cast<int>(m));
    } catch (const ModelError& e) {
      rd.fail("/rho", e.what());
    }
  }

  std::uint64_t seed = 1;
  if (root.contains("seed")) seed = read_seed(rd, root["seed"]);

  std::optional<ClockSet> clocks;
  if (root.contains("clocks")) {
    if (!model->warnings().empty()) {
      rd.fail("/clocks", "clocks need weights listed in nonincreasing order");
    }
    const Json& jc = root["clocks"];
    if (!jc.is_array() || jc.size() != m) rd.fail("/clocks", "expected m clock arrays");
    ClockSet cs;
    for (std::size_t i = 0; i < m; ++i) {
      cs.xi.push_back(rd.vector(jc[i], "/clocks/" + std::to_string(i),
                                weights[i].size()));
    }
    try {
      cs.validate(*model);
    } catch (const ModelError& e) {
      rd.fail("/clocks", e.what());
    }
    clocks = std::move(cs);
  }

  ExperimentSettings exp;
  if (root.contains("experiment")) {
    const Json& je = root["experiment"];
    rd.only(je, "/experiment", {"replications", "alpha", "test", "calibration_runs"});
    if (je.contains("replications")) {
      if (!je["replications"].is_number_integer() ||
          je["replications"].get<long>() < 1000) {
        rd.fail("/experiment/replications", "expected an integer >= 1000");
      }
      exp.replications = je["replications"].get<long>();
    }
    if (je.contains("alpha")) {
      exp.alpha = rd.number(je["alpha"], "/experiment/alpha");
      if (exp.alpha <= 0.0 || exp.alpha >= 1.0) {
        rd.fail("/experiment/alpha", "expected a level in (0, 1)");
      }
    }
    if (je.contains("test")) {
      if (!je["test"].is_string() ||
          (je["test"] != "all" && je["test"] != "chi-square" && je["test"] != "ks")) {
        rd.fail("/experiment/test", "expected \"chi-square\" or \"ks\"");
      }
      exp.test = je["test"].get<std::string>();
    }
    if (je.contains("calibration_runs")) {
      if (!je["calibration_runs"].is_number_integer() ||
          je["calibration_runs"].get<int>() < 0) {
        rd.fail("/experiment/calibration_runs", "expected a nonnegative integer");
      }
      exp.calibration_runs = je["calibration_runs"].get<int>();
    }
  }

  return RunConfig{std::move(*model), std::move(rho), root.contains("rho"), seed,
                   std::move(clocks), exp};
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "", "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

Json config_to_json(const RunConfig& cfg) {
  const BlockModel& m = cfg.model;
  Json j;
  j["version"] = kConfigVersion;
  j["m"] = m.m();
  j["weights"] = m.all_weights();
  j["Q"] = m.Q().rows();
  if (cfg.rho_given) j["rho"] = cfg.rho;
  j["seed"] = cfg.seed;
  if (cfg.clocks) j["clocks"] = cfg.clocks->xi;
  j["experiment"] = {{"replications", cfg.experiment.replications},
                     {"alpha", cfg.experiment.alpha},
                     {"test", cfg.experiment.test},
                     {"calibration_runs", cfg.experiment.calibration_runs}};
  return j;
}

Json number_to_json(double x) {
  if (std::isnan(x)) throw DomainError("NaN has no JSON form");
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from_json(const Json& j) {
  if (j.is_string()) {
    if (j == "inf") return std::numeric_limits<double>::infinity();
    if (j == "-inf") return -std::numeric_limits<double>::infinity();
  }
  if (!j.is_number()) throw PreconditionError("expected a number, got " + j.dump());
  return j.get<double>();
}

Json path_to_json(const PiecewisePath& p) {
  Json bps = Json::array();
  auto knots = p.knots();
  for (std::size_t k = 1; k < knots.size(); ++k) {
    bps.push_back({{"t", knots[k].t},
                   {"left", knots[k].left},
                   {"right", knots[k].right},
                   {"slope", p.segment_slope(k - 1)}});
  }
  Json j;
  j["initial"] = p.initial();
  j["terminal_slope"] = p.terminal_slope();
  j["breakpoints"] = std::move(bps);
  return j;
}

PiecewisePath path_from_json(const Json& j) {
  for (const char* key : {"initial", "terminal_slope", "breakpoints"}) {
    if (!j.contains(key)) throw PreconditionError(std::string("path lacks ") + key);
  }
  std::vector<Knot> knots{{0.0, j["initial"].get<double>(), j["initial"].get<double>()}};
  for (const Json& b : j["breakpoints"]) {
    Knot k{b.at("t").get<double>(), b.at("left").get<double>(),
           b.at("right").get<double>()};
    const Knot& prev = knots.back();
    if (b.contains("slope") && k.t > prev.t) {
      double implied = (k.left - prev.right) / (k.t - prev.t);
      double slope = b["slope"].get<double>();
      if (std::abs(implied - slope) > 1e-9 * (1.0 + std::abs(slope))) {
        throw PreconditionError("breakpoint at t = " + std::to_string(k.t) +
                                " has slope inconsistent with its values");
      }
    }
    knots.push_back(k);
  }
  return PiecewisePath::from_knots(std::move(knots), j["terminal_slope"].get<double>());
}

Json field_to_json(const Field& f) {
  Json cols = Json::array();
  for (int j = 0; j < f.m(); ++j) {
    Json jumps = Json::array();
    for (double t : f.column_jump_times(j)) {
      std::vector<double> sizes;
      for (int i = 0; i < f.m(); ++i) sizes.push_back(f(i, j).jump_at(t));
      jumps.push_back({{"t", t}, {"sizes", sizes}});
    }
    cols.push_back({{"type", j + 1},
                    {"drift", f(j, j).segment_slope(0)},
                    {"jumps", std::move(jumps)}});
  }
  return {{"m", f.m()}, {"columns", std::move(cols)}};
}

Json trace_to_json(const ExplorationTrace& trace, const BlockModel& model) {
  Json out = Json::array();
  for (const ExplorationStep& s : trace.steps) {
    Json r;
    r["k"] = s.k;
    r["kind"] = s.root ? "root" : "child";
    r["vertex"] = model.vertex(s.vertex).label();
    r["zeta"] = s.zeta;
    if (s.root) r["y"] = s.y;
    if (!s.s_left.empty()) {
      r["S_L"] = s.s_left;
      r["S_R"] = s.s_right;
    }
    out.push_back(std::move(r));
  }
  return out;
}

Json hit_vector_to_json(const HitVector& h) {
  Json t = Json::array();
  for (const ExtTime& x : h.t) t.push_back(number_to_json(x.as_double()));
  Json flags = Json::array();
  for (bool z : h.rho_zero) flags.push_back(z);
  return {{"T", std::move(t)}, {"rho_zero", std::move(flags)}};
}

Json hitting_process_to_json(const HittingProcess& hp) {
  Json jumps = Json::array();
  for (std::size_t r = 0; r < hp.levels.size(); ++r) {
    jumps.push_back({{"Y", hp.levels[r]}, {"delta", hp.jumps[r]}});
  }
  return {{"rho", hp.rho}, {"jumps", std::move(jumps)}};
}

Json components_to_json(const std::vector<ComponentRecord>& comps,
                        const BlockModel& model, const std::vector<double>& rho) {
  Json out = Json::array();
  for (const ComponentRecord& c : comps) {
    Json labels = Json::array();
    for (std::size_t v : c.vertices) labels.push_back(model.vertex(v).label());
    out.push_back({{"vertices", std::move(labels)},
                   {"mass", c.mass},
                   {"scaled_mass", scaled_mass(c, rho, model.Q())}});
  }
  return out;
}

Json excursions_to_json(const std::vector<EncodedComponent>& enc) {
  Json out = Json::array();
  for (const EncodedComponent& e : enc) {
    out.push_back({{"l", number_to_json(e.excursion.l)},
                   {"r", number_to_json(e.excursion.r)},
                   {"length", number_to_json(e.excursion.length())},
                   {"increment", e.increment}});
  }
  return out;
}

Json test_result_to_json(const TestResult& r) {
  Json j;
  j["statistic"] = number_to_json(r.statistic);
  j["p_value"] = r.p_value;
  j["dof"] = r.dof;
  j["cells"] = r.cells;
  j["support_mismatch"] = r.support_mismatch;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json experiment_to_json(const Json& config, const Counts& counts,
                        const Law& expected, const TestResult& r, double alpha) {
  Json c = Json::object();
  for (const auto& [k, n] : counts) c[k] = n;
  Json e = Json::object();
  for (const auto& [k, p] : expected) e[k] = p;
  Json j;
  j["config"] = config;
  j["counts"] = std::move(c);
  j["expected"] = std::move(e);
  j["statistic"] = number_to_json(r.statistic);
  j["p_value"] = r.p_value;
  j["pass"] = !r.support_mismatch && r.p_value > alpha;
  return j;
}

}  // namespace hitfield
