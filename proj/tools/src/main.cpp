#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qerisk/error.hpp"
#include "qerisk_tools/scenario.hpp"

namespace fs = std::filesystem;
using namespace qerisk;
using namespace qerisk::tools;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::optional<long long> seed;
  std::string format = "csv";
};

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("QERISK_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return fs::current_path();
}

int run_task(const std::string& task, const Common& opts) {
  Json doc = load_config(opts.config);
  for (const auto& o : opts.overrides) apply_override(doc, o);
  if (opts.seed) doc["mc"]["seed"] = *opts.seed;
  const auto cfg = validate_config(doc);
  const auto format = parse_format(opts.format);
  const auto report = run_scenario(cfg, task);
  const auto dir = output_dir(opts.out);
  const auto path = emit_report(report.rows, format, dir, cfg.scenario_id);
  emit_provenance(report.provenance, dir, cfg.scenario_id);

  std::size_t checks = 0, failed = 0;
  for (const auto& r : report.rows) {
    if (!r.pass) continue;
    ++checks;
    if (!*r.pass) {
      ++failed;
      std::cerr << fmt::format("check failed: {} (value {:.6g})\n", r.check, r.value);
    }
  }
  std::cout << fmt::format("{}: {} rows, {} checks, {} failed -> {}\n", cfg.scenario_id,
                           report.rows.size(), checks, failed, path.string());
  return failed == 0 ? 0 : 1;
}

int convert(const std::string& input, const std::string& format_name, const std::string& out) {
  const auto format = parse_format(format_name);
  const auto rows = read_report_jsonl(input);
  const fs::path src(input);
  const auto path = emit_report(rows, format, output_dir(out), src.stem().string());
  std::cout << path.string() << "\n";
  bool ok = true;
  for (const auto& r : rows) ok = ok && (!r.pass || *r.pass);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qerisk: BSDE dynamic risk measures and capital allocation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QERISK_VERSION);

  Common opts;
  const std::vector<std::pair<std::string, std::string>> tasks = {
      {"simulate", "simulate paths and report terminal moments"},
      {"solve", "solve the BSDE with the payoff as terminal value"},
      {"risk", "dynamic risk rho_0 of the payoff"},
      {"allocate", "gradient, measure-change and Aumann-Shapley allocations"},
      {"verify", "run the configured verification checks"}};
  for (const auto& [name, help] : tasks) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "scenario config (JSON)")->required();
    sub->add_option("--set", opts.overrides, "override a config field, e.g. model.sigma=0.3");
    sub->add_option("--out", opts.out, "output directory (default $QERISK_OUT_DIR or cwd)");
    sub->add_option("--seed", opts.seed, "override mc.seed");
    sub->add_option("--format", opts.format, "csv | json-lines")
        ->check(CLI::IsMember({"csv", "json-lines", "jsonl"}));
  }
  std::string input, out, format = "csv";
  auto* report = app.add_subcommand("report", "convert a json-lines report to another format");
  report->add_option("--input", input, "json-lines report")->required();
  report->add_option("--format", format, "csv | json-lines")
      ->check(CLI::IsMember({"csv", "json-lines", "jsonl"}));
  report->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (report->parsed()) return convert(input, format, out);
    for (const auto& [name, _] : tasks) {
      if (app.got_subcommand(name)) return run_task(name, opts);
    }
  } catch (const Error& e) {
    std::cerr << fmt::format("error[{}]: {}\n", error_code_name(e.code()), e.what());
    return exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  }
  return 6;
}
