// Runs the hitfield_cli binary on the fixtures and inspects what it writes.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "hitfield/io.hpp"

namespace fs = std::filesystem;
using hitfield::Json;

namespace {

const fs::path kWork = fs::path(HITFIELD_TEST_WORK) / "cli";

int run(const std::string& args) {
  std::string cmd = std::string(HITFIELD_CLI) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string fixture(const char* name) {
  return (fs::path(HITFIELD_FIXTURES) / name).string();
}

}  // namespace

TEST_CASE("encode on the worked instance") {
  fs::remove_all(kWork / "encode");
  const std::string cfg = fixture("worked_instance.json");
  for (const char* r : {"a", "b"}) {
    REQUIRE(run("encode --config " + cfg + " --out " + (kWork / "encode" / r).string()) == 0);
  }
  for (const char* name : {"hitting_process.json", "report.json"}) {
    CHECK(slurp(kWork / "encode" / "a" / name) == slurp(kWork / "encode" / "b" / name));
  }
  Json hp = Json::parse(slurp(kWork / "encode" / "a" / "hitting_process.json"));
  REQUIRE(hp["jumps"].size() == 1);
  CHECK(std::abs(hp["jumps"][0]["Y"].get<double>() - 0.5) <= 1e-12);
  CHECK(std::abs(hp["jumps"][0]["delta"][0].get<double>() - 1.0) <= 1e-12);
  CHECK(std::abs(hp["jumps"][0]["delta"][1].get<double>() - 0.3) <= 1e-12);
  Json manifest = Json::parse(slurp(kWork / "encode" / "a" / "manifest.json"));
  CHECK(manifest["command"] == "encode");
  CHECK(manifest["seed"] == 1);
}

TEST_CASE("reruns are byte-identical") {
  const std::string cfg = fixture("two_types.json");
  const char* cmds[][2] = {{"sample", "graph.csv"},
                           {"sample", "components.json"},
                           {"explore --mode graph", "trace.json"},
                           {"explore --mode field", "trace.json"},
                           {"curve", "excursions.json"},
                           {"curve", "curve.csv"}};
  int k = 0;
  for (auto& [cmd, file] : cmds) {
    fs::path a = kWork / "rerun" / (std::to_string(k) + "a");
    fs::path b = kWork / "rerun" / (std::to_string(k++) + "b");
    fs::remove_all(a);
    fs::remove_all(b);
    REQUIRE(run(std::string(cmd) + " --config " + cfg + " --seed 5 --out " + a.string()) == 0);
    REQUIRE(run(std::string(cmd) + " --config " + cfg + " --seed 5 --out " + b.string()) == 0);
    CHECK_MESSAGE(slurp(a / file) == slurp(b / file), cmd);
  }
}

TEST_CASE("exit codes") {
  fs::create_directories(kWork);
  fs::path bad = kWork / "bad.json";
  std::ofstream(bad) << R"({"version": 1, "m": 1, "weights": [[1]], "Q": [[1]], "colour": 2})";
  CHECK(run("encode --config " + bad.string() + " --out " + (kWork / "bad").string()) == 2);
  CHECK(run("encode --config " + (kWork / "missing.json").string()) == 2);
  CHECK(run("validate --suite functions --out " + (kWork / "functions").string()) == 0);
  Json rep = Json::parse(slurp(kWork / "functions" / "report.json"));
  CHECK(rep["pass"] == true);
  CHECK(run("curve --config " + fixture("three_types.json") + " --out " +
            (kWork / "curve3").string()) == 0);
  // Same model with rho = (1, 1, 1): the field is not symmetric.
  Json three = Json::parse(slurp(fixture("three_types.json")));
  three["rho"] = {1.0, 1.0, 1.0};
  fs::path asym = kWork / "asym.json";
  std::ofstream(asym) << three.dump(2);
  CHECK(run("curve --config " + asym.string() + " --out " + (kWork / "asym").string()) == 2);
}
