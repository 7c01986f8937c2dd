#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <stdexcept>
#include <string>

#include "levylab/config.hpp"

using namespace levylab;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("config parse keeps order and survives a round trip") {
  const std::string text =
      "# experiment header\n"
      "\n"
      "subcommand = leader\n"
      "d=300\n"
      "  eps =  1/20  \n"
      "label = run with spaces\n";
  const ExperimentConfig c = ExperimentConfig::parse(text);

  REQUIRE(c.entries().size() == 4);
  CHECK(c.entries()[0].first == "subcommand");
  CHECK(c.entries()[1].first == "d");
  CHECK(c.entries()[2].first == "eps");
  CHECK(c.entries()[3].first == "label");
  CHECK(c.at("eps") == "1/20");
  CHECK(c.at("label") == "run with spaces");

  // Rendering normalizes whitespace but parses back to an equal object, and
  // the normalized form is a fixed point of render -> parse -> render.
  const std::string rendered = c.to_string();
  const ExperimentConfig again = ExperimentConfig::parse(rendered);
  CHECK(again == c);
  CHECK(again.to_string() == rendered);
  CHECK(rendered ==
        "subcommand = leader\nd = 300\neps = 1/20\nlabel = run with spaces\n");
}

TEST_CASE("config parse skips comments and blank lines only") {
  const ExperimentConfig c = ExperimentConfig::parse("\n\n# a\n   # b\n\t\nkey = v\n");
  REQUIRE(c.entries().size() == 1);
  CHECK(c.at("key") == "v");
  CHECK(ExperimentConfig::parse("").empty());
  CHECK(ExperimentConfig::parse("# only comments\n").empty());
}

TEST_CASE("config parse rejects malformed lines with line numbers") {
  CHECK_THROWS_MATCHES(ExperimentConfig::parse("a = 1\nno separator here\n"),
                       std::invalid_argument, Catch::Matchers::MessageMatches(ContainsSubstring(
                                                  "line 2")));
  CHECK_THROWS_MATCHES(ExperimentConfig::parse("a = 1\nb = 2\n = orphan\n"),
                       std::invalid_argument,
                       Catch::Matchers::MessageMatches(ContainsSubstring("line 3")));
  CHECK_THROWS_MATCHES(ExperimentConfig::parse("a = 1\na = 2\n"), std::invalid_argument,
                       Catch::Matchers::MessageMatches(ContainsSubstring("duplicate key 'a'")));
}

TEST_CASE("config typed accessors parse integers, counters, and reals") {
  const ExperimentConfig c = ExperimentConfig::parse(
      "n = -17\n"
      "m = 100000\n"
      "seed = 18446744073709551615\n"
      "eps = 0.05\n"
      "frac = 3/4\n"
      "nested = 1/2/2\n"
      "word = hello\n");

  CHECK(c.get_int("n") == -17);
  CHECK(c.get_int("m") == 100000);
  CHECK(c.get_int("absent", 42) == 42);
  CHECK(c.get_uint64("seed", 0) == 18446744073709551615ull);
  CHECK(c.get_uint64("absent", 7) == 7);
  CHECK(c.get_real("eps") == 0.05);
  CHECK(c.get_real("frac") == 0.75);
  // Fractions nest left to right: 1/2/2 reads as 1 / (2/2) because the split
  // happens at the first slash and the tail re-parses as a fraction.
  CHECK(c.get_real("nested") == 1.0);
  CHECK(c.get_real("absent", 2.5) == 2.5);

  CHECK_THROWS_AS(c.get_int("word"), std::invalid_argument);
  CHECK_THROWS_AS(c.get_real("word"), std::invalid_argument);
  CHECK_THROWS_AS(c.get_uint64("n", 0), std::invalid_argument);
  CHECK_THROWS_AS(c.get_int("missing"), std::invalid_argument);
  CHECK_THROWS_MATCHES(ExperimentConfig::parse("x = 1/0\n").get_real("x"), std::invalid_argument,
                       Catch::Matchers::MessageMatches(ContainsSubstring("zero")));
}

TEST_CASE("config set replaces in place and appends new keys at the end") {
  ExperimentConfig c = ExperimentConfig::parse("a = 1\nb = 2\n");
  c.set("a", "10");
  c.set("z", "26");
  REQUIRE(c.entries().size() == 3);
  CHECK(c.entries()[0] == ExperimentConfig::Entry{"a", "10"});
  CHECK(c.entries()[1] == ExperimentConfig::Entry{"b", "2"});
  CHECK(c.entries()[2] == ExperimentConfig::Entry{"z", "26"});
  CHECK(c.has("z"));
  CHECK_FALSE(c.has("q"));
  CHECK(c.get("q", "dflt") == "dflt");
}

TEST_CASE("config save and load round trip through a file") {
  ExperimentConfig c;
  c.set("subcommand", "f2");
  c.set("eps", "1/12");
  c.set("k", "4");

  const std::string path = "config_roundtrip_test.cfg";
  c.save(path);
  const ExperimentConfig loaded = ExperimentConfig::load(path);
  std::remove(path.c_str());

  CHECK(loaded == c);
  CHECK(loaded.get_real("eps") == 1.0 / 12.0);
  CHECK_THROWS_AS(ExperimentConfig::load("definitely_not_here.cfg"), std::invalid_argument);
}
