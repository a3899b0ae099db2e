#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bext/error.hpp"
#include "bext/generators.hpp"
#include "bext/io.hpp"
#include "bext/pipeline.hpp"

using namespace bext;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("bext-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

// Runs the CLI, capturing stdout and stderr into files under `dir`.
int run(const std::string& args, const std::string& dir) {
  const std::string cmd = std::string(BEXT_CLI) + " " + args + " > " + dir + "/stdout.txt 2> " + dir + "/stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) { return read_text_file(path); }

RunConfig small(const std::string& domain) {
  RunConfig c;
  c.domain = domain;
  c.eps = "1/32";
  return c;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config validation") {
    CHECK_NOTHROW(validate_config(RunConfig{}));
    auto c = small("square");
    c.whitney.a = 3.0;
    CHECK_THROWS_WITH_AS(validate_config(c), doctest::Contains("bad-parameter"), Error);
    c = small("hexagon");
    CHECK_THROWS_WITH_AS(validate_config(c), doctest::Contains("unknown-generator"), Error);
    c = small("square");
    c.map = "z-cubed";
    CHECK_THROWS_WITH_AS(validate_config(c), doctest::Contains("unknown-map"), Error);
    c = small("square");
    c.sigma = 2.0;
    CHECK_THROWS_WITH_AS(validate_config(c), doctest::Contains("bad-parameter"), Error);
    c = small("square");
    c.eps = "2";
    CHECK_THROWS_WITH_AS(validate_config(c), doctest::Contains("bad-parameter"), Error);
    CHECK(small("square").epsilon() == 1.0 / 32.0);
  }

  TEST_CASE("JSON config keys") {
    RunConfig c;
    apply_config_json(c, nlohmann::json::parse(R"({"domain": "disc", "eps": "1/64", "a": 5, "seed": 9, "map": "square-z"})"));
    CHECK(c.domain == "disc");
    CHECK(c.epsilon() == 1.0 / 64.0);
    CHECK(c.whitney.a == 5.0);
    CHECK(c.seed == 9);
    CHECK(c.map == "square-z");
    CHECK_THROWS_WITH_AS(apply_config_json(c, nlohmann::json::parse(R"({"colour": 1})")), doctest::Contains("bad-config"),
                         Error);
    CHECK_THROWS_WITH_AS(apply_config_json(c, nlohmann::json::parse("[1, 2]")), doctest::Contains("bad-config"), Error);
    // Serialized configs read back to the same values.
    RunConfig back;
    const auto j = config_to_json(c);
    apply_config_json(back, nlohmann::json::parse(j.dump()));
    CHECK(config_to_json(back).dump() == j.dump());
  }

  TEST_CASE("pipeline reports are deterministic") {
    auto c = small("disc");
    c.out = temp_dir("det");
    Pipeline a(c), b(c);
    const auto ra = a.full_report().dump(2);
    const auto rb = b.full_report().dump(2);
    CHECK(ra == rb);
    CHECK(a.ok());
    const auto j = nlohmann::ordered_json::parse(ra);
    for (const char* key : {"config", "domain", "decomposition", "curves", "shadows", "trace", "gauges", "content",
                            "quasihyperbolic", "constants", "invariants", "ok"})
      CHECK(j.contains(key));
    CHECK(j["constants"].dump().find("formula") != std::string::npos);
  }

  TEST_CASE("domain export round trip reproduces the invariant report") {
    const auto c = small("square");
    Pipeline p(c);
    const auto original = p.section_decomposition().dump();
    const auto inv = invariants_to_json(p.invariants()).dump();
    const auto dir = temp_dir("roundtrip");
    std::ostringstream s;
    write_domain_json(s, p.domain());
    write_text_file(dir + "/domain.json", s.str());
    auto c2 = c;
    c2.domain_file = dir + "/domain.json";
    Pipeline q(c2);
    CHECK(q.section_decomposition().dump() == original);
    CHECK(invariants_to_json(q.invariants()).dump() == inv);
    std::istringstream in(s.str());
    const auto d = read_domain_json(in);
    std::ostringstream s2;
    write_domain_json(s2, d);
    CHECK(s2.str() == s.str());
  }

  TEST_CASE("generate") {
    const auto dir = temp_dir("generate");
    REQUIRE(run("generate --domain disc --eps 1/32 --out " + dir, dir) == 0);
    const auto dom = nlohmann::json::parse(slurp(dir + "/domain.json"));
    CHECK(dom["q"] == 2.0);
    CHECK(dom["name"] == "disc");
    REQUIRE(run("generate --domain cusp --s 2 --eps 1/64 --out " + dir, dir) == 0);
    const auto map = nlohmann::json::parse(slurp(dir + "/map.json"));
    CHECK(map["john"]["length_john"] == true);
    CHECK(map["john"]["exponent"] == 0.5);
    // Same seed, same files.
    const auto first = slurp(dir + "/domain.json");
    REQUIRE(run("generate --domain cusp --s 2 --eps 1/64 --out " + dir, dir) == 0);
    CHECK(slurp(dir + "/domain.json") == first);
  }

  TEST_CASE("unknown names and bad parameters exit nonzero with a message") {
    const auto dir = temp_dir("errors");
    CHECK(run("generate --domain hexagon --out " + dir, dir) == 2);
    CHECK(slurp(dir + "/stderr.txt").find("unknown-generator") != std::string::npos);
    CHECK(run("trace --map z-cubed --eps 1/32 --out " + dir, dir) == 2);
    CHECK(slurp(dir + "/stderr.txt").find("unknown-map") != std::string::npos);
    CHECK(run("decompose --a 3 --eps 1/32 --out " + dir, dir) == 2);
    CHECK(slurp(dir + "/stderr.txt").find("bad-parameter") != std::string::npos);
    write_text_file(dir + "/cfg.json", R"({"colour": 1})");
    CHECK(run("decompose --config " + dir + "/cfg.json --out " + dir, dir) == 2);
    CHECK(slurp(dir + "/stderr.txt").find("bad-config") != std::string::npos);
    CHECK(run("frobnicate", dir) != 0);
  }

  TEST_CASE("config file overrides flags and the output root comes from the environment") {
    const auto dir = temp_dir("override");
    write_text_file(dir + "/cfg.json", R"({"eps": "1/32", "domain": "square"})");
    REQUIRE(run("gauges --eps 1/7 --domain disc --config " + dir + "/cfg.json --out " + dir, dir) == 0);
    const auto j = nlohmann::json::parse(slurp(dir + "/gauges.json"));
    CHECK(j["config"]["domain"] == "square");
    CHECK(j["config"]["eps"] == "1/32");
    const auto env_dir = temp_dir("env");
    const std::string cmd = "BEXT_OUTPUT_ROOT=" + env_dir + " " + std::string(BEXT_CLI) + " gauges --eps 1/32 > /dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(env_dir + "/gauges.json"));
  }

  TEST_CASE("subcommands and csv output") {
    const auto dir = temp_dir("subcommands");
    for (const char* cmd : {"decompose", "curves", "shadows", "trace", "gauges"}) {
      CAPTURE(cmd);
      CHECK(run(std::string(cmd) + " --domain square --eps 1/32 --out " + dir, dir) == 0);
      CHECK(fs::exists(dir + "/" + cmd + ".json"));
    }
    CHECK(run("gauges --eps 1/32 --gauge A1:log:4 --gauge uniqueness:power:1:3 --out " + dir, dir) == 0);
    const auto g = nlohmann::json::parse(slurp(dir + "/gauges.json"));
    CHECK(g["gauges"].size() == 2);
    CHECK(run("gauges --eps 1/32 --gauge A1:power --out " + dir, dir) == 2);
    CHECK(run("trace --domain square --eps 1/32 --format csv --out " + dir, dir) == 0);
    CHECK(slurp(dir + "/stdout.txt").rfind("level,", 0) == 0);
    CHECK(run("decompose --eps 1/32 --format xml --out " + dir, dir) != 0);
  }

  TEST_CASE("slit disc with the angle map records non-uniqueness and exits 0") {
    const auto dir = temp_dir("slit");
    REQUIRE(run("uniqueness --domain slit-disc --map angle --eps 1/32 --john-c 8 --out " + dir, dir) == 0);
    const auto j = nlohmann::json::parse(slurp(dir + "/uniqueness.json"));
    CHECK(j["uniqueness"]["verdict"] == "non-unique");
    CHECK(j["uniqueness"]["gap"].get<double>() >= 0.9);
    CHECK(j["uniqueness"]["uniform"]["hypothesis_holds"] == false);
    CHECK(j["ok"] == true);
  }

  TEST_CASE("render is byte-stable and rejects non-planar input") {
    const auto dir = temp_dir("render");
    REQUIRE(run("report --domain disc --eps 1/32 --out " + dir, dir) == 0);
    for (const char* f : {"report.json", "domain.json", "cubes.jsonl", "whitney.jsonl", "curves.jsonl", "shadows.jsonl",
                          "levels.csv", "whitney.svg", "curves.svg", "shadows.svg"})
      CHECK(fs::exists(dir + "/" + f));
    const auto out1 = temp_dir("render-1"), out2 = temp_dir("render-2");
    REQUIRE(run("render " + dir + " --out " + out1, out1) == 0);
    REQUIRE(run("render " + dir + " --out " + out2, out2) == 0);
    for (const char* f : {"whitney.svg", "curves.svg", "shadows.svg"}) {
      CAPTURE(f);
      const auto a = slurp(out1 + "/" + f);
      CHECK(a == slurp(out2 + "/" + f));
      CHECK(a.find("<svg") != std::string::npos);
    }

    const auto seg = temp_dir("segment");
    std::ostringstream s;
    write_domain_json(s, make_segment(1.0 / 32.0));
    write_text_file(seg + "/domain.json", s.str());
    CHECK(run("render " + seg + " --out " + seg, seg) == 2);
    CHECK(slurp(seg + "/stderr.txt").find("no-coordinates") != std::string::npos);
  }
}
