#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "scengen/config.hpp"

#include <cstdlib>
#include <fstream>
#include <string>

using namespace scengen;

namespace {

// scoped environment variable; unsets on destruction
struct EnvVar {
  std::string name;
  EnvVar(const std::string& n, const std::string& v) : name(n) {
    setenv(name.c_str(), v.c_str(), 1);
  }
  ~EnvVar() { unsetenv(name.c_str()); }
};

}  // namespace

TEST_CASE("defaults cover every field") {
  const config::Config c = config::load("");
  CHECK(c.str("run.track") == "load");
  CHECK(c.str("run.model") == "nf");
  CHECK(c.integer("run.seed") == 1);
  CHECK(c.number("nf.lr") == doctest::Approx(1e-4));
  CHECK(c.integer("gan.latent_dim") == 64);
  CHECK(c.flag("quality.c2st"));
  CHECK_FALSE(c.flag("nf.affine"));
  CHECK(c.int_list("nf.conditioner_hidden") == std::vector<int>{300, 300, 300, 300});
  CHECK(c.str_list("quality.models") == std::vector<std::string>{"nf", "vae", "gan", "rand"});
  CHECK(c.str_list("value.pv_zones").empty());
  CHECK(c.hash.size() == 16);
  for (const auto& [key, def] : config::schema_defaults()) CHECK(c.values.at(key) == def);
}

TEST_CASE("file values override defaults") {
  const std::string text =
      "# commented out = ignored\n"
      "[run]\n"
      "model = gan\n"
      "seed = 7\n"
      "\n"
      "; alternative comment marker\n"
      "[gan]\n"
      "epochs = 12\n"
      "generator_hidden = 8, 8\n";
  const config::Config c = config::parse(text);
  CHECK(c.str("run.model") == "gan");
  CHECK(c.integer("run.seed") == 7);
  CHECK(c.integer("gan.epochs") == 12);
  CHECK(c.int_list("gan.generator_hidden") == std::vector<int>{8, 8});
  CHECK(c.str("run.track") == "load");  // untouched default

  const std::string path = "config_roundtrip_test.ini";
  {
    std::ofstream f(path);
    f << text;
  }
  const config::Config c2 = config::load(path);
  CHECK(c2.hash == c.hash);
  std::remove(path.c_str());
}

TEST_CASE("environment beats file, explicit overrides beat both") {
  const std::string text = "[run]\nseed = 7\n";
  {
    EnvVar env("SCENGEN_RUN_SEED", "55");
    CHECK(config::parse(text).integer("run.seed") == 55);
    CHECK(config::parse(text, {{"run.seed", "99"}}).integer("run.seed") == 99);
  }
  CHECK(config::parse(text).integer("run.seed") == 7);
}

TEST_CASE("hash tracks the effective settings") {
  const config::Config base = config::load("");
  CHECK(config::load("").hash == base.hash);
  CHECK(config::parse("[run]\nseed = 1\n").hash == base.hash);  // same effective value
  CHECK(config::parse("[run]\nseed = 2\n").hash != base.hash);
  // line order in the file does not matter, only the effective settings
  CHECK(config::parse("[run]\nseed = 3\nout = x\n").hash ==
        config::parse("[run]\nout = x\nseed = 3\n").hash);
}

TEST_CASE("unknown fields and malformed lines are rejected with a line number") {
  CHECK_THROWS_WITH_AS(config::parse("[run]\nmodle = nf\n"),
                       doctest::Contains("line 2: unknown field run.modle"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(config::parse("[typo]\nx = 1\n"), doctest::Contains("unknown field typo.x"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(config::parse("[run\n"), doctest::Contains("line 1"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(config::parse("[run]\njust words\n"),
                       doctest::Contains("expected key = value"), std::invalid_argument);
  CHECK_THROWS_AS(config::parse("", {{"run.bogus", "1"}}), std::invalid_argument);
  CHECK_THROWS_AS(config::load("no_such_config_file.ini"), std::invalid_argument);
}

TEST_CASE("choice and range constraints") {
  CHECK_THROWS_WITH_AS(config::parse("[run]\ntrack = solar\n"),
                       doctest::Contains("run.track must be one of"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config::parse("[run]\nsolver = milp\n"),
                       doctest::Contains("run.solver"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config::parse("[scenarios]\ncount = 0\n"),
                       doctest::Contains("scenarios.count"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config::parse("[nf]\nepochs = 0\n"), doctest::Contains("nf.epochs"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(config::parse("[vae]\nlr = -1\n"), doctest::Contains("vae.lr"),
                       std::invalid_argument);
}

TEST_CASE("typed accessors reject junk") {
  const config::Config c = config::parse("[run]\nout = results\n");
  CHECK(c.str("run.out") == "results");
  CHECK_THROWS_AS(c.str("run.nope"), std::invalid_argument);
  const config::Config bad = config::parse("[data]\nwind = not_a_number\n");
  CHECK_THROWS_AS(bad.integer("data.wind"), std::invalid_argument);
  CHECK_THROWS_AS(bad.number("data.wind"), std::invalid_argument);
  CHECK_THROWS_AS(bad.flag("data.wind"), std::invalid_argument);
  CHECK_THROWS_AS(bad.int_list("data.wind"), std::invalid_argument);
}
