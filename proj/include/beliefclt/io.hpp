#pragma once

// Model and plan files, CSV output. The file grammar is documented in
// docs/file-formats.md.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "beliefclt/belief.hpp"
#include "beliefclt/harness.hpp"
#include "beliefclt/montecarlo.hpp"

namespace beliefclt {

// Throws ParseError or ValidationError.
BeliefModel parse_model(std::string_view text, const std::string& source = "<model>");
// Throws IoError, ParseError or ValidationError.
BeliefModel load_model(const std::filesystem::path& path);
std::string format_model(const BeliefModel& model);

// `model = "path"` is resolved relative to base_dir; a plan may instead
// carry the model inline with `M` and `focal` entries.
SimPlan parse_plan(std::string_view text, const std::filesystem::path& base_dir,
                   const std::string& source = "<plan>");
SimPlan load_plan(const std::filesystem::path& path);
// Always writes the model inline.
std::string format_plan(const SimPlan& plan);

// Shortest form for integers, otherwise 17 significant digits.
std::string format_double(double x);

using CsvCell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;
};

std::string to_csv(const CsvTable& table);
// Throws IoError. Throws std::invalid_argument when a row width does not
// match the header.
void emit_csv(const CsvTable& table, const std::filesystem::path& path);

// Splits RFC 4180 text into string cells. Throws ParseError.
std::vector<std::vector<std::string>> parse_csv(std::string_view text, const std::string& source = "<csv>");

std::vector<std::string> simulation_schema();
std::vector<std::string> report_schema();

CsvTable simulation_table(const SimResult& result, const std::string& run_id);
CsvTable report_table(const VerificationReport& report);

// Reads a report CSV back (pass column included). Throws ParseError.
VerificationReport parse_report_csv(std::string_view text, const std::string& source = "<report>");

// Stable identifier of a plan: FNV-1a of format_plan, in hex.
std::string plan_run_id(const SimPlan& plan);

}  // namespace beliefclt
