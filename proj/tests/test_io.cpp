#include <cmath>
#include <string>

#include "doctest.h"
#include "generators.hpp"
#include "hitfield/io.hpp"

using namespace hitfield;

namespace {

const char* kWorked = R"({
  "version": 1,
  "m": 2,
  "weights": [[1.0], []],
  "Q": [[1.0, 0.3], [0.3, 1.0]],
  "rho": [1.0, 1.0],
  "seed": 7,
  "clocks": [[0.5], []]
})";

// Line and field of the diagnostic for a config text.
std::pair<int, std::string> diagnose(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return {e.line(), e.field()};
  }
  return {-1, ""};
}

}  // namespace

TEST_CASE("config parses") {
  RunConfig cfg = parse_config(kWorked, "worked.json");
  CHECK(cfg.model.m() == 2);
  CHECK(cfg.model.vertex_count() == 1);
  CHECK(cfg.model.R(1, 0) == doctest::Approx(0.3));
  CHECK(cfg.seed == 7);
  REQUIRE(cfg.clocks.has_value());
  CHECK(cfg.clocks->xi[0] == std::vector<double>{0.5});
  CHECK(cfg.experiment.replications == 100000);
  CHECK(cfg.experiment.test == "all");

  RunConfig again = parse_config(config_to_json(cfg).dump(2), "roundtrip");
  CHECK(again.model.all_weights() == cfg.model.all_weights());
  CHECK(again.model.Q() == cfg.model.Q());
  CHECK(again.rho == cfg.rho);
  CHECK(again.seed == cfg.seed);
  CHECK(config_to_json(again) == config_to_json(cfg));

  RunConfig minimal = parse_config(
      R"({"version": 1, "m": 1, "weights": [[2, 1]], "Q": [[0.5]]})", "min");
  CHECK(minimal.rho == std::vector<double>{1.0});
  CHECK(minimal.seed == 1);
  CHECK(!minimal.clocks);
}

TEST_CASE("config diagnostics carry line and field") {
  std::string base = "{\n  \"version\": 1,\n  \"m\": 1,\n  \"weights\": [[1.0]],\n";
  auto [line, field] = diagnose(base + "  \"Q\": [[1.0]],\n  \"colour\": 3\n}");
  CHECK(line == 6);
  CHECK(field == "/colour");

  std::tie(line, field) =
      diagnose(base + "  \"Q\": [[1.0]],\n  \"experiment\": {\n    \"reps\": 5\n  }\n}");
  CHECK(line == 7);
  CHECK(field == "/experiment/reps");

  std::tie(line, field) = diagnose(base + "  \"Q\": [[1.0]],\n  \"rho\": [0.0]\n}");
  CHECK(line == 6);
  CHECK(field == "/rho");

  std::tie(line, field) = diagnose(
      "{\n  \"version\": 1,\n  \"m\": 1,\n  \"weights\": [[1.0,\n   -2]],\n  \"Q\": [[1]]\n}");
  CHECK(line == 5);
  CHECK(field == "/weights/0/1");

  std::tie(line, field) = diagnose(base + "  \"Q\": [[-1.0]]\n}");
  CHECK(field == "/Q");

  std::tie(line, field) = diagnose("{\n  \"version\": 2,\n  \"m\": 1\n}");
  CHECK(line == 2);
  CHECK(field == "/version");

  std::tie(line, field) = diagnose("{\n  \"version\": 1,\n  \"m\": 1,,\n}");
  CHECK(line == 3);

  std::tie(line, field) = diagnose(
      base + "  \"Q\": [[1.0]],\n  \"experiment\": {\"replications\": 10}\n}");
  CHECK(field == "/experiment/replications");

  std::tie(line, field) = diagnose(base + "  \"Q\": [[1.0]],\n  \"clocks\": [[1, 2]]\n}");
  CHECK(field == "/clocks/0");

  try {
    parse_config(base + "  \"Q\": [[1.0]],\n  \"colour\": 3\n}", "cfg.json");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()) == "cfg.json:6: /colour: unknown field");
  }
}

TEST_CASE("path JSON round trip") {
  PiecewisePath p = PiecewisePath::from_knots(
      {{0.0, 0.0, 0.0}, {0.5, -0.5, 0.5}, {2.0, 2.0, 2.0}}, -1.0);
  Json j = path_to_json(p);
  CHECK(j.dump() ==
        R"({"initial":0.0,"terminal_slope":-1.0,"breakpoints":[{"t":0.5,"left":-0.5,"right":0.5,"slope":-1.0},{"t":2.0,"left":2.0,"right":2.0,"slope":1.0}]})");
  CHECK(path_from_json(j) == p);

  testgen::Rng rng(5);
  for (int it = 0; it < 200; ++it) {
    PiecewisePath q = testgen::random_no_negative_jumps(rng);
    CHECK(path_from_json(Json::parse(path_to_json(q).dump())) == q);
  }

  Json bad = j;
  bad["breakpoints"][1]["slope"] = 3.0;
  CHECK_THROWS_AS(path_from_json(bad), PreconditionError);
}

TEST_CASE("exports") {
  RunConfig cfg = parse_config(kWorked, "worked.json");
  Field f = build_field(cfg.model, *cfg.clocks);
  CHECK(field_to_json(f).dump() ==
        R"({"m":2,"columns":[{"type":1,"drift":-1.0,"jumps":[{"t":0.5,"sizes":[1.0,0.3]}]},{"type":2,"drift":-1.0,"jumps":[]}]})");

  HittingProcess hp = hitting_process(cfg.model, *cfg.clocks, cfg.rho);
  Json jh = hitting_process_to_json(hp);
  REQUIRE(jh["jumps"].size() == 1);
  CHECK(jh["jumps"][0]["Y"] == 0.5);
  // S^R - S^L in floating point: 0.8 - 0.5 is one ulp above 0.3.
  CHECK(jh["jumps"][0]["delta"][0].get<double>() == 1.0);
  CHECK(std::abs(jh["jumps"][0]["delta"][1].get<double>() - 0.3) <= 1e-15);

  ExplorationTrace tr = field_exploration(cfg.model, *cfg.clocks, cfg.rho);
  Json jt = trace_to_json(tr, cfg.model);
  REQUIRE(jt.size() == 1);
  CHECK(jt[0]["kind"] == "root");
  CHECK(jt[0]["vertex"] == "1:1");
  CHECK(jt[0]["zeta"] == 1);
  CHECK(jt[0].contains("S_L"));

  HitVector h;
  h.t = {ExtTime::finite(1.5), ExtTime::infinite()};
  h.rho_zero = {false, true};
  CHECK(hit_vector_to_json(h).dump() == R"({"T":[1.5,"inf"],"rho_zero":[false,true]})");
  CHECK(number_from_json("inf") == std::numeric_limits<double>::infinity());

  std::vector<EncodedComponent> enc{{{1.0, 2.3}, {1.0, 0.3}}};
  Json je = excursions_to_json(enc);
  CHECK(je[0]["l"] == 1.0);
  CHECK(je[0]["increment"] == Json::array({1.0, 0.3}));

  TestResult r;
  r.statistic = 0.5;
  r.p_value = 0.48;
  Json jx = experiment_to_json(config_to_json(cfg), {{"a", 3}}, {{"a", 1.0}}, r, 0.001);
  CHECK(jx["pass"] == true);
  CHECK(jx["counts"]["a"] == 3);
  CHECK(jx.contains("config"));
}
