// beliefclt: command-line front end.
//
// Every run writes one JSON line with the fully resolved configuration to
// stderr before doing any work. Exit status: 0 when every check passes, 1
// when a check fails, 2 on usage, parse or I/O errors.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "beliefclt/errors.hpp"
#include "beliefclt/gauss.hpp"
#include "beliefclt/harness.hpp"
#include "beliefclt/io.hpp"
#include "beliefclt/moments.hpp"
#include "beliefclt/montecarlo.hpp"

using namespace beliefclt;
using json = nlohmann::ordered_json;

namespace {

constexpr double kSlopeLow = -0.75;
constexpr double kSlopeHigh = -0.25;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> reps;
  std::filesystem::path out_dir = ".";
  std::string format = "text";
  unsigned workers = 0;
  int verbosity = 0;
};

// JSON numbers cannot hold inf or nan; those go out as strings.
json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

json model_json(const BeliefModel& model) {
  json focal = json::array();
  for (const auto& f : model.focal()) {
    json parts = json::array();
    for (const auto& p : f.element.parts()) parts.push_back({number(p.lo), number(p.hi)});
    focal.push_back({{"parts", parts}, {"mass", f.mass}});
  }
  return {{"M", model.bound()}, {"focal", focal}};
}

json plan_json(const SimPlan& plan) {
  auto pairs = [](const std::vector<AlphaPair>& ps) {
    json out = json::array();
    for (const auto& p : ps) out.push_back({number(p.lower), number(p.upper)});
    return out;
  };
  json by_n = json::object();
  for (const auto& [n, ps] : plan.alpha_pairs_by_n) by_n[std::to_string(n)] = pairs(ps);
  json alphas = json::array();
  for (const double a : plan.alpha_one_sided) alphas.push_back(number(a));
  return {{"model", model_json(plan.model)},
          {"n_values", plan.n_values},
          {"reps", plan.reps},
          {"seed", plan.seed},
          {"slack", plan.slack},
          {"alpha_one_sided", alphas},
          {"alpha_pairs", pairs(plan.alpha_pairs)},
          {"alpha_pairs_by_n", by_n},
          {"run_id", plan_run_id(plan)}};
}

void log_config(const std::string& command, const GlobalOptions& g, json details) {
  json line = {{"event", "config"},
               {"command", command},
               {"out_dir", g.out_dir.string()},
               {"format", g.format},
               {"workers", g.workers},
               {"verbosity", g.verbosity}};
  for (auto& [k, v] : details.items()) line[k] = v;
  std::cerr << line.dump() << std::endl;
}

void info(const GlobalOptions& g, const std::string& msg) {
  if (g.verbosity > 0) std::cerr << msg << "\n";
}

SimPlan resolve_plan(const std::filesystem::path& path, const GlobalOptions& g) {
  SimPlan plan = load_plan(path);
  if (g.seed) plan.seed = *g.seed;
  if (g.reps) plan.reps = *g.reps;
  validate_plan(plan);
  return plan;
}

std::filesystem::path output_path(const GlobalOptions& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return g.out_dir / name;
}

void print_fit(const RateFit& fit) {
  std::cout << "rate fit: ";
  if (fit.status == FitStatus::kInsufficientSignal) {
    std::cout << "insufficient signal (" << fit.used_points << " of " << fit.points.size()
              << " points above the noise floor)\n";
    return;
  }
  std::cout << "slope " << std::setprecision(4) << fit.slope << ", K_hat " << fit.k_hat << " from "
            << fit.used_points << " points\n";
  std::cout << std::setprecision(6);
}

// Writes the report CSV, then prints the CSV or a summary. Returns the exit code.
int finish_report(const VerificationReport& report, const std::string& file, const GlobalOptions& g) {
  const auto table = report_table(report);
  const auto path = output_path(g, file);
  emit_csv(table, path);
  if (g.format == "csv") {
    std::cout << to_csv(table);
    return report.all_passed() ? 0 : 1;
  }
  std::size_t failed = 0;
  for (const auto& row : report.rows) {
    if (row.pass) continue;
    ++failed;
    std::cout << "FAIL " << row.experiment << " n=" << row.n << " alpha=(" << format_double(row.alpha1) << ", "
              << format_double(row.alpha2) << ") theory=" << row.theory << " empirical=" << row.empirical
              << " deviation=" << row.deviation << "\n";
  }
  std::cout << report.rows.size() - failed << " of " << report.rows.size() << " checks passed\n";
  if (std::any_of(report.rows.begin(), report.rows.end(), [](const ReportRow& r) { return r.n > 0; })) {
    print_fit(report.rate);
  }
  std::cout << "report: " << path.string() << "\n";
  return failed == 0 ? 0 : 1;
}

int run_moments(const std::filesystem::path& model_path, const std::string& route, const GlobalOptions& g) {
  const auto model = load_model(model_path);
  log_config("moments", g, {{"model_path", model_path.string()}, {"route", route}, {"model", model_json(model)}});

  const auto policy = OnDegenerate::kReportNaN;
  std::optional<ChoquetMoments> by_enum, by_quad;
  if (route != "integration") by_enum = moments_by_enumeration(model, policy);
  if (route != "enumeration") {
    by_quad = moments_by_integration(model, 1e-10, QuadratureMethod::kPiecewiseExact, policy);
  }
  const ChoquetMoments& m = by_quad ? *by_quad : *by_enum;
  const bool degenerate = std::isnan(m.rho);

  const std::vector<std::pair<std::string, double>> fields{
      {"lower_mean", m.lower_mean},     {"upper_mean", m.upper_mean}, {"lower_sd", m.lower_sd},
      {"upper_sd", m.upper_sd},         {"cross_moment", m.cross_moment}, {"rho_prime", m.rho_prime},
      {"rho", m.rho}};
  if (g.format == "csv") {
    CsvTable table;
    table.header.push_back("route");
    std::vector<CsvCell> row{route == "enumeration" ? std::string("enumeration") : std::string("integration")};
    for (const auto& [name, value] : fields) {
      table.header.push_back(name);
      row.emplace_back(value);
    }
    if (by_enum && by_quad) {
      table.header.push_back("route_delta");
      row.emplace_back(max_field_delta(*by_enum, *by_quad));
    }
    table.rows.push_back(std::move(row));
    std::cout << to_csv(table);
  } else {
    for (const auto& [name, value] : fields) std::cout << std::left << std::setw(14) << name << format_double(value) << "\n";
    if (by_enum && by_quad) {
      std::cout << std::left << std::setw(14) << "route_delta" << format_double(max_field_delta(*by_enum, *by_quad))
                << "\n";
    }
  }
  if (degenerate) {
    std::cerr << "degenerate variance: rho is undefined for this model\n";
    return 1;
  }
  return 0;
}

int run_bvn(double a, double b, double rho, const GlobalOptions& g) {
  log_config("bvn", g, {{"a", number(a)}, {"b", number(b)}, {"rho", number(rho)}});
  const double v = bvn_cdf({a, b, rho});
  if (g.format == "csv") {
    std::cout << to_csv({{"a", "b", "rho", "value"}, {{a, b, rho, v}}});
  } else {
    std::cout << format_double(v) << "\n";
  }
  return 0;
}

int run_simulate(const std::filesystem::path& plan_path, const GlobalOptions& g) {
  const SimPlan plan = resolve_plan(plan_path, g);
  const std::string run_id = plan_run_id(plan);
  log_config("simulate", g, {{"plan_path", plan_path.string()}, {"plan", plan_json(plan)}});
  for (const auto& w : plan_warnings(plan)) std::cerr << "warning: " << w << "\n";

  const auto moments = moments_by_enumeration(plan.model);
  const auto start = std::chrono::steady_clock::now();
  const auto result = estimate_events(plan, moments, g.workers);
  info(g, "simulated " + std::to_string(plan.reps) + " replications in " +
              std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) + " s");

  const auto table = simulation_table(result, run_id);
  const auto path = output_path(g, "simulation_" + run_id + ".csv");
  emit_csv(table, path);
  if (g.format == "csv") {
    std::cout << to_csv(table);
  } else {
    std::cout << result.events.size() << " event frequencies from " << plan.reps << " replications\n";
    std::cout << "csv: " << path.string() << "\n";
  }
  return 0;
}

int run_verify(const std::filesystem::path& plan_path, bool two_sided, const GlobalOptions& g) {
  const SimPlan plan = resolve_plan(plan_path, g);
  const std::string command = two_sided ? "verify-two-sided" : "verify-one-sided";
  log_config(command, g, {{"plan_path", plan_path.string()}, {"plan", plan_json(plan)}});
  for (const auto& w : plan_warnings(plan)) std::cerr << "warning: " << w << "\n";

  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  if (two_sided) {
    const auto moments = moments_by_enumeration(plan.model);
    info(g, "rho = " + format_double(moments.rho));
    report = verify_two_sided(plan, moments, g.workers);
  } else {
    report = verify_one_sided(plan, g.workers);
  }
  info(g, "finished in " +
              std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) + " s");
  return finish_report(report, (two_sided ? "two_sided_" : "one_sided_") + plan_run_id(plan) + ".csv", g);
}

int run_special_cases(const GlobalOptions& g) {
  log_config("special-cases", g, json::object());
  return finish_report(special_cases(), "special_cases.csv", g);
}

int run_rate_fit(const std::filesystem::path& report_path, const GlobalOptions& g) {
  log_config("rate-fit", g, {{"report_path", report_path.string()}});
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + report_path.string());
  std::ostringstream text;
  text << in.rdbuf();
  const auto fit = fit_rate(parse_report_csv(text.str(), report_path.string()));
  const bool ok = fit.status != FitStatus::kOk || (fit.slope >= kSlopeLow && fit.slope <= kSlopeHigh);

  if (g.format == "csv") {
    CsvTable table{{"n", "deviation", "se"}, {}};
    for (const auto& p : fit.points) table.rows.push_back({p.n, p.deviation, p.se});
    std::cout << to_csv(table);
    std::cout << to_csv({{"status", "used_points", "slope", "intercept", "k_hat"},
                         {{std::string(fit.status == FitStatus::kOk ? "ok" : "insufficient_signal"),
                           static_cast<std::uint64_t>(fit.used_points), fit.slope, fit.intercept, fit.k_hat}}});
  } else {
    for (const auto& p : fit.points) {
      std::cout << "n=" << std::left << std::setw(8) << p.n << "max deviation " << std::setw(14) << p.deviation
                << "se " << p.se << "\n";
    }
    print_fit(fit);
    if (!ok) std::cout << "slope outside [" << kSlopeLow << ", " << kSlopeHigh << "]\n";
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Central limit theorems for belief measures: moments, limits and simulation checks"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed = 0;
  std::int64_t reps = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the plan's seed");
  auto* reps_opt = app.add_option("--reps", reps, "Override the plan's replication count")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for CSV output")->capture_default_str();
  app.add_option("--format", g.format, "Standard output format")
      ->check(CLI::IsMember({"text", "csv"}))
      ->capture_default_str();
  app.add_option("-j,--workers", g.workers,
                 "Worker threads (default: $BELIEFCLT_WORKERS, else the number of logical cores)");
  app.add_flag("-v,--verbose", g.verbosity, "Progress messages on stderr (repeatable)");

  std::filesystem::path model_path, plan_path, report_path;
  std::string route = "both";
  auto* moments_cmd = app.add_subcommand("moments", "Limit parameters of a model");
  moments_cmd->add_option("model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  moments_cmd->add_option("--route", route, "enumeration, integration or both")
      ->check(CLI::IsMember({"enumeration", "integration", "both"}))
      ->capture_default_str();

  double a = 0, b = 0, rho = 0;
  auto* bvn_cmd = app.add_subcommand("bvn", "P(X <= a, Y <= b) for a standard bivariate normal");
  bvn_cmd->add_option("a", a)->required();
  bvn_cmd->add_option("b", b)->required();
  bvn_cmd->add_option("rho", rho)->required();

  auto* sim_cmd = app.add_subcommand("simulate", "Estimate event frequencies for a plan");
  sim_cmd->add_option("plan", plan_path, "Plan file")->required()->check(CLI::ExistingFile);
  auto* one_cmd = app.add_subcommand("verify-one-sided", "Compare one-sided frequencies with their limits");
  one_cmd->add_option("plan", plan_path, "Plan file")->required()->check(CLI::ExistingFile);
  auto* two_cmd = app.add_subcommand("verify-two-sided", "Compare two-sided frequencies with their limits");
  two_cmd->add_option("plan", plan_path, "Plan file")->required()->check(CLI::ExistingFile);
  auto* special_cmd = app.add_subcommand("special-cases", "Deterministic identity checks");
  auto* rate_cmd = app.add_subcommand("rate-fit", "Fit the convergence rate from a report CSV");
  rate_cmd->add_option("report", report_path, "Report CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) g.seed = seed;
  if (*reps_opt) g.reps = reps;
  if (g.workers == 0) g.workers = default_worker_count();
  std::cout << std::setprecision(6);

  try {
    if (*moments_cmd) return run_moments(model_path, route, g);
    if (*bvn_cmd) return run_bvn(a, b, rho, g);
    if (*sim_cmd) return run_simulate(plan_path, g);
    if (*one_cmd) return run_verify(plan_path, false, g);
    if (*two_cmd) return run_verify(plan_path, true, g);
    if (*special_cmd) return run_special_cases(g);
    if (*rate_cmd) return run_rate_fit(report_path, g);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v.message << "\n";
    return 2;
  } catch (const DegenerateVariance& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
