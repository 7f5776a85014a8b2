#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "beliefclt/io.hpp"
#include "doctest.h"
#include "random_models.hpp"

using namespace beliefclt;

namespace {

const std::filesystem::path kSource = BELIEFCLT_SOURCE_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ParseError parse_error_of(std::string_view text) {
  try {
    parse_model(text, "t.model");
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError("", 0, 0, "");
}

}  // namespace

TEST_CASE("load the sample Bernoulli model") {
  const auto model = load_model(kSource / "models" / "bernoulli.model");
  CHECK(model.bound() == 1.0);
  REQUIRE(model.size() == 3);
  CHECK(std::abs(moments_by_enumeration(model).lower_mean - 0.3) <= 1e-12);
  CHECK(model == beliefclt::testing::bernoulli_type());
}

TEST_CASE("model files that fail validation") {
  const std::string short_mass = "M = 1\nfocal = { parts = [[0, 0]], mass = 0.5 }\nfocal = { parts = [[1, 1]], mass = 0.4 }\n";
  try {
    parse_model(short_mass);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(!e.violations().empty());
    CHECK(e.violations().front().code == ViolationCode::kMassSumViolation);
  }
  CHECK_THROWS_AS(parse_model("M = 1\nfocal = { parts = [[0, 2]], mass = 1 }\n"), ValidationError);
  CHECK_THROWS_AS(parse_model("M = 1\nfocal = { parts = [[0, 1]], mass = -1 }\nfocal = { parts = [[0, 1]], mass = 2 }\n"),
                  ValidationError);
}

TEST_CASE("overlapping parts are merged") {
  const auto model = parse_model("M = 2\nfocal = { mass = 1, parts = [[0.5, 1], [0, 0.5], [0.75, 1.5], [2, 2]] }\n");
  const auto& parts = model.focal().front().element.parts();
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].lo == 0.0);
  CHECK(parts[0].hi == 1.5);
  CHECK(parts[1].lo == 2.0);
}

TEST_CASE("parse errors carry positions") {
  auto e = parse_error_of("M = 1\nfocal = { parts = [[0, 1]], mass = 1 }\nbogus = 3\n");
  CHECK(e.line() == 3);
  CHECK(e.column() == 1);
  CHECK(e.source() == "t.model");

  e = parse_error_of("M = 1\nfocal = { parts = [[0, 1]] mass = 1 }\n");
  CHECK(e.line() == 2);
  CHECK(e.column() == 28);

  e = parse_error_of("# bound\nM = one\n");
  CHECK(e.line() == 2);
  CHECK(e.column() == 5);

  CHECK(parse_error_of("M = 1\nM = 2\n").line() == 2);
  CHECK(parse_error_of("focal = { parts = [[0, 1]], mass = 1 }\n").line() == 1);
  CHECK(parse_error_of("M = 1\nfocal = { parts = [[1, 0]], mass = 1 }\n").line() == 2);
  CHECK(parse_error_of("M = 1\nfocal = { parts = [], mass = 1 }\n").line() == 2);
  CHECK(parse_error_of("M = 1\nfocal = { parts = [[0, 1]], mass = 1, colour = 2 }\n").line() == 2);
  CHECK(parse_error_of("M = 1 2\n").line() == 1);
}

TEST_CASE("model round trip") {
  std::mt19937_64 rng(21);
  beliefclt::testing::ModelShape shape;
  for (int i = 0; i < 50; ++i) {
    shape.lattice = i % 2 == 0 ? 0.0 : 0.25;
    const auto model = beliefclt::testing::random_model(rng, shape);
    const auto text = format_model(model);
    const auto again = parse_model(text);
    CHECK(again == model);
    CHECK(format_model(again) == text);
  }
}

TEST_CASE("plan files") {
  const auto plan = load_plan(kSource / "plans" / "bernoulli.plan");
  CHECK(plan.model == beliefclt::testing::bernoulli_type());
  CHECK(plan.reps == 1000000);
  CHECK(plan.seed == 20240601);
  CHECK(plan.n_values == default_n_schedule());
  CHECK(plan.alpha_one_sided == default_alpha_grid());
  CHECK(plan.alpha_pairs.size() == 28);
  CHECK(plan.slack == 1.0);

  const auto per_n = load_plan(kSource / "plans" / "shrinking_pairs.plan");
  CHECK(per_n.pairs_for(16).size() == 1);
  CHECK(per_n.pairs_for(256).size() == 2);
  CHECK(per_n.pairs_for(256)[1] == AlphaPair{-0.5, 0.5});

  const std::string inline_plan =
      "M = 1\nfocal = { parts = [[0, 0]], mass = 0.5 }\nfocal = { parts = [[1, 1]], mass = 0.5 }\n"
      "n_values = [4, 8]\nreps = 100\nseed = 18446744073709551615\nslack = 0.5\n";
  const auto p = parse_plan(inline_plan, ".");
  CHECK(p.seed == 18446744073709551615ULL);
  CHECK(p.n_values == std::vector<std::int64_t>{4, 8});

  CHECK_THROWS_AS(parse_plan("reps = 10\n", "."), ParseError);
  CHECK_THROWS_AS(parse_plan(inline_plan + "reps = 5\n", "."), ParseError);
  CHECK_THROWS_AS(parse_plan(inline_plan + "colour = 5\n", "."), ParseError);
  CHECK_THROWS_AS(parse_plan("model = \"nope.model\"\n", kSource), IoError);
  CHECK_THROWS_AS(parse_plan("model = \"models/bernoulli.model\"\nM = 1\n", kSource), ParseError);
  CHECK_THROWS_AS(parse_plan("model = \"models/bernoulli.model\"\nn_values = [8, 4]\n", kSource), ParseError);
  CHECK_THROWS_AS(parse_plan("model = \"models/bernoulli.model\"\nreps = 1.5\n", kSource), ParseError);
}

TEST_CASE("plan round trip") {
  for (const char* name : {"bernoulli.plan", "two_interval.plan", "quick.plan", "shrinking_pairs.plan"}) {
    const auto plan = load_plan(kSource / "plans" / name);
    const auto text = format_plan(plan);
    const auto again = parse_plan(text, ".");
    CHECK(again == plan);
    CHECK(format_plan(again) == text);
    CHECK(plan_run_id(again) == plan_run_id(plan));
  }
  auto a = load_plan(kSource / "plans" / "quick.plan");
  auto b = a;
  b.seed += 1;
  CHECK(plan_run_id(a) != plan_run_id(b));
  CHECK(plan_run_id(a).size() == 16);
}

TEST_CASE("number formatting round trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(3.0) == "3");
  CHECK(format_double(-0.5) == "-0.5");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("csv output") {
  const CsvTable empty{simulation_schema(), {}};
  CHECK(to_csv(empty) == "run_id,n,event_kind,alpha1,alpha2,frequency,reps,se,seed\n");

  SimResult result;
  result.seed = 42;
  result.events.push_back({16, EventKind::kOneSidedLower, -0.5, INFINITY, 333, 1000});
  const auto text = to_csv(simulation_table(result, "abc"));
  const auto rows = parse_csv(text);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "abc");
  CHECK(rows[1][1] == "16");
  CHECK(rows[1][2] == "one_sided_lower");
  CHECK(std::stod(rows[1][3]) == -0.5);
  CHECK(rows[1][4] == "inf");
  CHECK(std::stod(rows[1][5]) == result.events[0].frequency());
  CHECK(std::stod(rows[1][7]) == result.events[0].standard_error());
  CHECK(rows[1][8] == "42");

  VerificationReport report;
  report.rows.push_back({"one_sided_lower", 16, 0.0, INFINITY, 0.5, 0.51, 0.01, 0.005, true});
  report.rows.push_back({"one_sided_upper", 64, -INFINITY, 1.0, 0.84, 0.8, 0.04, 0.004, false});
  report.rows.push_back({"bernoulli_rho, \"quoted\"", 0, NAN, NAN, 3.0 / 7.0, 3.0 / 7.0, 0.0, 0.0, true});
  const auto csv = to_csv(report_table(report));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.starts_with("experiment,n,alpha1,alpha2,theory,empirical,deviation,se,pass\n"));

  const auto back = parse_report_csv(csv);
  REQUIRE(back.rows.size() == 3);
  CHECK(back.rows[2].experiment == report.rows[2].experiment);
  CHECK(back.rows[2].theory == 3.0 / 7.0);
  CHECK(std::isnan(back.rows[2].alpha1));
  CHECK(back.rows[1].pass == false);
  CHECK(back.rows[0].alpha2 == INFINITY);
  CHECK(to_csv(report_table(back)) == csv);

  CHECK_THROWS_AS(parse_csv("a,\"b\n"), ParseError);
  CHECK_THROWS_AS(parse_report_csv("x,y\n"), ParseError);

  CsvTable ragged{{"a", "b"}, {{std::int64_t{1}}}};
  CHECK_THROWS_AS(emit_csv(ragged, "/tmp/ragged.csv"), std::invalid_argument);
  CHECK_THROWS_AS(emit_csv(empty, "/nonexistent-dir/x.csv"), IoError);

  const auto path = std::filesystem::temp_directory_path() / "beliefclt_test_io.csv";
  emit_csv(report_table(report), path);
  CHECK(slurp(path) == csv);
  std::filesystem::remove(path);
}
