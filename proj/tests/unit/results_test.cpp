#include <doctest.h>

#include <cmath>
#include <limits>

#include "hybridq/error.hpp"
#include "hybridq/results.hpp"

using namespace hybridq;

TEST_CASE("CSV layout") {
  ResultTable t("demo", {{"time", "1/g_c"}, {"label", ""}, {"count", "1"}});
  t.add_row({0.1, std::string("a,b"), 3LL});
  t.add_row({1e-20, std::string("say \"hi\""), -2LL});
  CHECK(t.to_csv() ==
        "time[1/g_c],label,count[1]\n"
        "0.1,\"a,b\",3\n"
        "1e-20,\"say \"\"hi\"\"\",-2\n");
  CHECK(t.number(1, "time") == 1e-20);
  CHECK_THROWS_AS(t.add_row({1.0}), PreconditionError);
  CHECK_THROWS_AS(t.add_row({std::numeric_limits<double>::quiet_NaN(), std::string(), 1LL}), NumericalError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 44.87736071510888}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.1) == "0.1");
}

TEST_CASE("JSON round trip and agreement with CSV") {
  ResultTable a("summary", {{"F_G", "1"}, {"T", "1/g_c"}, {"note", ""}});
  a.add_row({0.9998906, 44.87736071510888, std::string("calibrated")});
  a.add_row({1.0 / 3.0, 1e-17, std::string("x")});
  ResultTable b("steps", {{"accepted", "1"}});
  b.add_row({12345LL});
  const RunMetadata meta{"gate", "0.3.0", 42LL, fnv1a_hex("abc"), {"w1"}};

  const std::string js = results_to_json(meta, {a, b});
  const auto [m2, tables] = results_from_json(js);
  CHECK(m2.command == "gate");
  CHECK(m2.seed == 42LL);
  CHECK(m2.scenario_hash == meta.scenario_hash);
  CHECK(m2.warnings == meta.warnings);
  REQUIRE(tables.size() == 2);
  CHECK(tables[0].to_csv() == a.to_csv());
  CHECK(tables[1].to_csv() == b.to_csv());
  CHECK(results_to_json(m2, tables) == js);

  CHECK_THROWS_AS(results_from_json("{\"metadata\": 3}"), ParseError);
}

TEST_CASE("scenario hash") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
