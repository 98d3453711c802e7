#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "qerisk/error.hpp"
#include "qerisk_tools/scenario.hpp"

namespace qerisk::tools {

namespace {

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

std::string json_number(double v) {
  return std::isfinite(v) ? fmt::format("{:.17g}", v) : "null";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << body;
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace

bool RunReport::all_checks_pass() const {
  for (const auto& r : rows) {
    if (r.pass && !*r.pass) return false;
  }
  return true;
}

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json-lines" || name == "jsonl") return ReportFormat::JsonLines;
  fail(ErrorCode::ParseError, "unknown report format '" + name + "' (csv | json-lines)");
}

std::string format_extension(ReportFormat format) {
  return format == ReportFormat::Csv ? "csv" : "jsonl";
}

std::string render_report(const std::vector<ResultRow>& rows, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Csv) {
    out = "scenario_id,quantity,value,std_error,check,pass\n";
    for (const auto& r : rows) {
      out += fmt::format("{},{},{},{},{},{}\n", csv_field(r.scenario_id), csv_field(r.quantity),
                         csv_number(r.value), r.std_error ? csv_number(*r.std_error) : "",
                         csv_field(r.check), r.pass ? (*r.pass ? "true" : "false") : "");
    }
    return out;
  }
  for (const auto& r : rows) {
    out += fmt::format(
        "{{\"scenario_id\":{},\"quantity\":{},\"value\":{},\"std_error\":{},\"check\":{},"
        "\"pass\":{}}}\n",
        json_string(r.scenario_id), json_string(r.quantity), json_number(r.value),
        r.std_error ? json_number(*r.std_error) : "null", json_string(r.check),
        r.pass ? (*r.pass ? "true" : "false") : "null");
  }
  return out;
}

std::filesystem::path emit_report(const std::vector<ResultRow>& rows, ReportFormat format,
                                  const std::filesystem::path& dir, const std::string& stem) {
  const auto path = dir / (stem + "." + format_extension(format));
  write_file(path, render_report(rows, format));
  return path;
}

std::filesystem::path emit_provenance(const Json& provenance, const std::filesystem::path& dir,
                                      const std::string& stem) {
  const auto path = dir / (stem + ".provenance.json");
  write_file(path, provenance.dump(2) + "\n");
  return path;
}

std::vector<ResultRow> read_report_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot read report " + path.string());
  std::vector<ResultRow> rows;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(n) + ": not a JSON object");
    }
    try {
      ResultRow r;
      r.scenario_id = j.at("scenario_id").get<std::string>();
      r.quantity = j.at("quantity").get<std::string>();
      r.value = j.at("value").is_null() ? std::nan("") : j.at("value").get<double>();
      if (!j.at("std_error").is_null()) r.std_error = j.at("std_error").get<double>();
      r.check = j.at("check").get<std::string>();
      if (!j.at("pass").is_null()) r.pass = j.at("pass").get<bool>();
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return rows;
}

int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError: return 2;
    case ErrorCode::ValidationError: return 3;
    case ErrorCode::SolverFailure: return 4;
    case ErrorCode::EstimatorFailure: return 5;
    case ErrorCode::IoError: return 7;
    default: return 6;
  }
}

}  // namespace qerisk::tools
