#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fmean/runner.hpp"

using namespace fmean;

namespace {

const char* kMinimal = R"json({
  "experiments": [
    {
      "id": "a",
      "space": {"kind": "ball2", "R": 2},
      "functional": "int(x^2;0,1)",
      "n_list": [64],
      "N": 500,
      "seed": 9,
      "checks": ["mean"]
    }
  ]
})json";

std::string with(const char* patch) {
  // splice replacement text over the "id" line of the minimal config
  std::string s = kMinimal;
  auto pos = s.find("\"id\": \"a\",");
  return s.substr(0, pos) + patch + s.substr(pos + 10);
}

}  // namespace

TEST_CASE("minimal config parses") {
  auto plans = parse_config_text(kMinimal);
  REQUIRE(plans.size() == 1);
  CHECK(plans[0].id == "a");
  CHECK(plans[0].N == 500);
  CHECK(plans[0].n_list == std::vector<int>{64});
  CHECK(plans[0].checks == std::vector<std::string>{"mean"});
}

TEST_CASE("mean rows carry analytic and sampled columns") {
  auto rows = run_plan(parse_config_text(kMinimal));
  REQUIRE(rows.size() == 1);
  const ReportRow& row = rows[0];
  CHECK(row.experiment_id == "a");
  CHECK(row.n == 64);
  CHECK(row.status == "OK");
  REQUIRE(row.analytic_mean.has_value());
  CHECK(*row.analytic_mean == doctest::Approx(4.0));
  REQUIRE(row.mc_mean.has_value());
  REQUIRE(row.abs_error.has_value());
  CHECK(*row.abs_error ==
        doctest::Approx(std::abs(*row.mc_mean - *row.analytic_mean)));
}

TEST_CASE("schema violations name the offending path") {
  auto text = [](const char* body) { return std::string(body); };
  CHECK_THROWS_AS(parse_config_text(text("[]")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(text(R"json({"experiments": []})json")),
                  ConfigError);
  // unknown space kind
  std::string bad = kMinimal;
  bad.replace(bad.find("ball2"), 5, "blob9");
  try {
    parse_config_text(bad);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("blob9") != std::string::npos);
  }
  // unknown key, with its path in the message
  try {
    parse_config_text(with(R"("id": "a", "flavor": 3,)"));
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.path.find("experiments[0]") != std::string::npos);
  }
  // sample budget floor
  std::string small = kMinimal;
  small.replace(small.find("\"N\": 500"), 8, "\"N\": 50");
  CHECK_THROWS_AS(parse_config_text(small), ConfigError);
  // duplicate ids
  std::string dup = kMinimal;
  auto arr = nlohmann::json::parse(dup);
  arr["experiments"].push_back(arr["experiments"][0]);
  CHECK_THROWS_AS(parse_config_text(arr.dump()), ConfigError);
  // events check without bounds
  std::string ev = kMinimal;
  ev.replace(ev.find("\"mean\""), 6, "\"events\"");
  CHECK_THROWS_AS(parse_config_text(ev), ConfigError);
  // broken functional expression
  std::string fn = kMinimal;
  fn.replace(fn.find("int(x^2;0,1)"), 12, "int(x^2;0,1");
  CHECK_THROWS_AS(parse_config_text(fn), ParseError);
}

TEST_CASE("nonconcentrating spaces flag exchange rows") {
  const char* cfg = R"json({
    "experiments": [
      {
        "id": "w",
        "space": {"kind": "wiener"},
        "functional": {"h": "sin(y1)", "atoms": ["int(x^2;0,1)"]},
        "n_list": [64],
        "N": 500,
        "seed": 3,
        "checks": ["exchange_gap"]
      }
    ]
  })json";
  auto rows = run_plan(parse_config_text(cfg));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].status == "NONCONCENTRATING");
  CHECK(rows[0].mc_mean.has_value());
}

TEST_CASE("reports are identical across worker counts") {
  const char* cfg = R"json({
    "experiments": [
      {
        "id": "det",
        "space": {"kind": "iid", "dist": "gaussian", "mu": 0.1, "sigma": 1.5},
        "functional": "int(x;0,1)",
        "n_list": [16, 64],
        "N": 2000,
        "seed": 5,
        "checks": ["mean", "variance_decay"]
      }
    ]
  })json";
  auto plans = parse_config_text(cfg);
  std::string one = emit_report(run_plan(plans, 1), ReportFormat::Csv);
  std::string eight = emit_report(run_plan(plans, 8), ReportFormat::Csv);
  CHECK(one == eight);
}

TEST_CASE("csv layout") {
  auto rows = run_plan(parse_config_text(kMinimal));
  std::string csv = emit_report(rows, ReportFormat::Csv);
  CHECK(csv == emit_report(rows, ReportFormat::Csv));  // stable bytes
  std::istringstream in(csv);
  std::string header, line, extra;
  REQUIRE(std::getline(in, header));
  CHECK(header ==
        "experiment_id,space,functional,n,N,seed,analytic_mean,analytic_var,"
        "mc_mean,mc_var,mc_stderr,abs_error,z_score,status");
  REQUIRE(std::getline(in, line));
  CHECK_FALSE(std::getline(in, extra));
  CHECK(line.substr(0, 2) == "a,");
}

TEST_CASE("unsupported closed forms leave analytic cells blank") {
  std::string cfg = kMinimal;
  const std::string ball = "\"kind\": \"ball2\", \"R\": 2";
  cfg.replace(cfg.find(ball), ball.size(), "\"kind\": \"wiener\"");
  cfg.replace(cfg.find("int(x^2;0,1)"), 12, "int(sin(x);0,1)");
  auto rows = run_plan(parse_config_text(cfg));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].status == "UNSUPPORTED");
  CHECK_FALSE(rows[0].analytic_mean.has_value());
  CHECK(rows[0].mc_mean.has_value());
  CHECK(rows[0].mc_stderr.has_value());
}

TEST_CASE("json lines mirror the csv fields") {
  auto rows = run_plan(parse_config_text(kMinimal));
  std::string jsonl = emit_report(rows, ReportFormat::JsonLines);
  std::istringstream in(jsonl);
  std::string line;
  REQUIRE(std::getline(in, line));
  auto obj = nlohmann::json::parse(line);
  for (const char* key :
       {"experiment_id", "space", "functional", "n", "N", "seed",
        "analytic_mean", "analytic_var", "mc_mean", "mc_var", "mc_stderr",
        "abs_error", "z_score", "status"})
    CHECK(obj.contains(key));
  CHECK(obj["status"] == "OK");
  CHECK(obj["n"] == 64);
  CHECK(obj["analytic_mean"].get<double>() == doctest::Approx(4.0));
}

TEST_CASE("space kind listing") {
  auto kinds = list_space_kinds();
  CHECK(kinds.size() == 9);
  bool has_wiener = false;
  for (const auto& k : kinds)
    has_wiener = has_wiener || k.rfind("wiener", 0) == 0;
  CHECK(has_wiener);
}
