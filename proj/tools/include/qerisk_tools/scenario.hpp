#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qerisk/drivers.hpp"
#include "qerisk/market_model.hpp"
#include "qerisk/payoff.hpp"
#include "qerisk/regression.hpp"

namespace qerisk::tools {

using Json = nlohmann::ordered_json;

struct DriverSpec {
  std::string family;  // entropic | qexp | sublinear | zero
  double gamma = 0.0;
  double alpha = 0.0;
  LinearForm ell;
  std::vector<LinearForm> forms;
};

struct MethodOptions {
  double h = 0.0;  // 0 picks the default step
  std::size_t quadrature_nodes = 16;
  std::size_t convex_nodes = 8;
  RegressionConfig regression;
  double z_max = 10.0;
  double upsilon_max = 5.0;
  bool inner_measure = true;
};

/// Defaults mirror the acceptance thresholds.
struct Tolerances {
  double closed_form = 1e-2;
  double oracle = 1e-2;
  double gradient_crosscheck = 2e-2;
  double full_allocation = 1e-2;
  double representation = 2e-2;
  double clark_ocone = 2e-2;
  double gamma_gap = 5e-2;
  double controls_l2 = 3e-2;
  double moment_sigmas = 4.0;
  long long replay_max_flagged = 2;
  double monotonicity = 5e-3;
  double translation = 5e-3;
  double convexity = 5e-3;
  double homogeneity = 1e-2;
  double subadditivity = 1e-2;
};

struct ScenarioConfig {
  Json document;  // echo of the validated input
  std::string scenario_id;
  std::string task;
  LevyModel model;
  double horizon = 1.0;
  long long steps = 50;
  long long paths = 10000;
  std::uint64_t seed = 1;
  DriverSpec driver;
  std::optional<Payoff> payoff;
  std::vector<Payoff> parts;
  std::vector<std::string> part_names;
  MethodOptions method;
  Tolerances tolerances;
  std::vector<std::string> checks;
};

/// Parses a config document; ParseError carries line and column.
Json parse_config_text(const std::string& text, const std::string& origin);
Json load_config(const std::filesystem::path& path);

/// Applies "a.b.c=value". The value is read as JSON when it parses, as a
/// string otherwise. Numeric path segments index arrays.
void apply_override(Json& doc, const std::string& assignment);

/// Checks the document against the schema and builds typed options.
/// ValidationError names the offending field.
ScenarioConfig validate_config(const Json& doc);

/// Driver described by the config, on the model's jump marks.
Driver build_driver(const ScenarioConfig& cfg);

struct ResultRow {
  std::string scenario_id;
  std::string quantity;
  double value = 0.0;
  std::optional<double> std_error;
  std::string check;
  std::optional<bool> pass;
};

struct RunReport {
  std::vector<ResultRow> rows;
  Json provenance;

  bool all_checks_pass() const;
};

/// Runs the config's task (or `task_override` when non-empty).
RunReport run_scenario(const ScenarioConfig& cfg, const std::string& task_override = {});

enum class ReportFormat { Csv, JsonLines };

ReportFormat parse_format(const std::string& name);
std::string format_extension(ReportFormat format);

/// Serialises rows; doubles use 17 significant digits.
std::string render_report(const std::vector<ResultRow>& rows, ReportFormat format);
/// Writes <dir>/<stem>.<ext>; IoError when the directory is not writable.
std::filesystem::path emit_report(const std::vector<ResultRow>& rows, ReportFormat format,
                                  const std::filesystem::path& dir, const std::string& stem);
std::filesystem::path emit_provenance(const Json& provenance, const std::filesystem::path& dir,
                                      const std::string& stem);

/// Reads a json-lines report back into rows.
std::vector<ResultRow> read_report_jsonl(const std::filesystem::path& path);

/// Exit status for a library error code.
int exit_status(ErrorCode code) noexcept;

}  // namespace qerisk::tools
