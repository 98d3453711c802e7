#include <algorithm>
#include <fstream>
#include <sstream>

#include "qerisk/error.hpp"
#include "qerisk_tools/scenario.hpp"

namespace qerisk::tools {

namespace {

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorCode::ValidationError, msg); }

const std::vector<std::string> kTasks = {"simulate", "solve", "risk", "allocate", "verify"};
const std::vector<std::string> kChecks = {
    "axioms",      "replay",           "convex_representation", "coherent_representation",
    "clark_ocone", "gamma_exponential", "growth_bound",         "homogeneity",
    "martingale"};
const std::vector<std::string> kTopLevel = {"scenario_id", "task",   "model",      "grid",
                                            "mc",          "driver", "payoff",     "method",
                                            "tolerances",  "verify"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

const Json* member(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const Json& obj, const char* key, const std::string& path,
              std::optional<double> fallback = std::nullopt) {
  const Json* v = member(obj, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    invalid(path + " is required");
  }
  if (!v->is_number()) invalid(path + " must be a number");
  return v->get<double>();
}

long long integer(const Json& obj, const char* key, const std::string& path,
                  std::optional<long long> fallback = std::nullopt) {
  const Json* v = member(obj, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    invalid(path + " is required");
  }
  if (!v->is_number_integer()) invalid(path + " must be an integer");
  return v->get<long long>();
}

std::string text(const Json& obj, const char* key, const std::string& path,
                 std::optional<std::string> fallback = std::nullopt) {
  const Json* v = member(obj, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    invalid(path + " is required");
  }
  if (!v->is_string()) invalid(path + " must be a string");
  return v->get<std::string>();
}

const Json& object(const Json& obj, const char* key, const std::string& path) {
  const Json* v = member(obj, key);
  if (v == nullptr) invalid(path + " is required");
  if (!v->is_object()) invalid(path + " must be an object");
  return *v;
}

std::vector<double> numbers(const Json& v, const std::string& path) {
  if (!v.is_array()) invalid(path + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) invalid(path + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Payoff parse_payoff(const Json& p, const std::string& path) {
  if (!p.is_object()) invalid(path + " must be an object");
  const std::string family = text(p, "family", path + ".family");
  try {
    if (family == "affine") {
      return Payoff::affine(number(p, "a", path + ".a", 0.0), number(p, "b", path + ".b"));
    }
    if (family == "exp_affine") {
      return Payoff::exp_affine(number(p, "a", path + ".a", 1.0), number(p, "b", path + ".b"));
    }
    if (family == "polynomial") {
      const Json* c = member(p, "coefficients");
      if (c == nullptr) invalid(path + ".coefficients is required");
      return Payoff::polynomial(numbers(*c, path + ".coefficients"));
    }
    if (family == "clip") {
      const Json* inner = member(p, "inner");
      if (inner == nullptr) invalid(path + ".inner is required");
      return Payoff::clipped(parse_payoff(*inner, path + ".inner"), number(p, "lo", path + ".lo"),
                             number(p, "hi", path + ".hi"));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    invalid(path + ": " + e.what());
  }
  invalid(path + ".family must be one of affine, exp_affine, polynomial, clip (got '" + family +
          "')");
}

LinearForm parse_form(const Json& f, const std::string& path, std::size_t marks) {
  if (!f.is_object()) invalid(path + " must be an object");
  LinearForm form;
  form.offset = number(f, "offset", path + ".offset", 0.0);
  form.z_coef = number(f, "a", path + ".a", 0.0);
  if (const Json* b = member(f, "b")) form.jump_coefs = numbers(*b, path + ".b");
  if (form.jump_coefs.empty()) form.jump_coefs.assign(marks, 0.0);
  if (form.jump_coefs.size() != marks) {
    invalid(path + ".b needs one coefficient per jump mark (" + std::to_string(marks) + ")");
  }
  return form;
}

}  // namespace

Json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail(ErrorCode::ParseError, origin + ":" + std::to_string(line) + ":" +
                                    std::to_string(column) + ": " + e.what());
  }
}

Json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorCode::ParseError, "override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  std::string pointer;
  std::stringstream parts(key);
  for (std::string seg; std::getline(parts, seg, '.');) {
    if (seg.empty()) fail(ErrorCode::ParseError, "override key '" + key + "' has an empty segment");
    pointer += "/" + seg;
  }
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  try {
    doc[Json::json_pointer(pointer)] = value;
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, "override '" + assignment + "': " + e.what());
  }
}

ScenarioConfig validate_config(const Json& doc) {
  if (!doc.is_object()) invalid("config root must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (!contains(kTopLevel, key)) invalid("unknown top-level field '" + key + "'");
  }
  ScenarioConfig cfg;
  cfg.document = doc;
  cfg.scenario_id = text(doc, "scenario_id", "scenario_id", "scenario");
  if (cfg.scenario_id.empty() ||
      cfg.scenario_id.find_first_of("/\\ ") != std::string::npos) {
    invalid("scenario_id must be a non-empty name without spaces or slashes");
  }
  cfg.task = text(doc, "task", "task", "risk");
  if (!contains(kTasks, cfg.task)) invalid("task must be one of simulate, solve, risk, allocate, verify");

  const Json& model = object(doc, "model", "model");
  cfg.model.x0 = number(model, "x0", "model.x0", 0.0);
  cfg.model.mu = number(model, "mu", "model.mu");
  cfg.model.sigma = number(model, "sigma", "model.sigma");
  if (const Json* jumps = member(model, "jumps")) {
    if (!jumps->is_array()) invalid("model.jumps must be an array");
    for (std::size_t k = 0; k < jumps->size(); ++k) {
      const std::string path = "model.jumps." + std::to_string(k);
      const Json& j = (*jumps)[k];
      if (!j.is_object()) invalid(path + " must be an object");
      cfg.model.jumps.push_back(
          {number(j, "size", path + ".size"), number(j, "intensity", path + ".intensity")});
    }
  }
  try {
    cfg.model.validate();
  } catch (const Error& e) {
    invalid(std::string("model: ") + e.what());
  }

  const Json& grid = object(doc, "grid", "grid");
  cfg.horizon = number(grid, "T", "grid.T");
  cfg.steps = integer(grid, "N", "grid.N");
  if (!(cfg.horizon > 0.0)) invalid("grid.T must be positive");
  if (cfg.steps < 1) invalid("grid.N must be at least 1");

  const Json& mc = object(doc, "mc", "mc");
  cfg.paths = integer(mc, "paths", "mc.paths");
  if (cfg.paths < 2) invalid("mc.paths must be at least 2");
  const long long seed = integer(mc, "seed", "mc.seed", 1);
  if (seed < 0) invalid("mc.seed must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);

  const std::size_t marks = cfg.model.mark_count();
  const bool needs_driver = cfg.task != "simulate";
  if (needs_driver || member(doc, "driver") != nullptr) {
    const Json& d = object(doc, "driver", "driver");
    cfg.driver.family = text(d, "family", "driver.family");
    if (cfg.driver.family == "entropic") {
      cfg.driver.gamma = number(d, "gamma", "driver.gamma");
      if (!(cfg.driver.gamma > 0.0)) invalid("driver.gamma must be positive");
    } else if (cfg.driver.family == "qexp") {
      cfg.driver.alpha = number(d, "alpha", "driver.alpha");
      if (!(cfg.driver.alpha > 0.0)) invalid("driver.alpha must be positive");
      if (const Json* ell = member(d, "ell")) {
        cfg.driver.ell = parse_form(*ell, "driver.ell", marks);
        if (const Json* z = member(*ell, "z")) {
          if (!z->is_number()) invalid("driver.ell.z must be a number");
          cfg.driver.ell.z_coef = z->get<double>();
        }
        if (const Json* j = member(*ell, "jumps")) {
          cfg.driver.ell.jump_coefs = numbers(*j, "driver.ell.jumps");
          if (cfg.driver.ell.jump_coefs.size() != marks) {
            invalid("driver.ell.jumps needs one coefficient per jump mark");
          }
        }
      } else {
        cfg.driver.ell.jump_coefs.assign(marks, 0.0);
      }
    } else if (cfg.driver.family == "sublinear") {
      const Json* forms = member(d, "forms");
      if (forms == nullptr) invalid("driver.forms is required");
      if (!forms->is_array() || forms->empty()) invalid("driver.forms must be a non-empty array");
      for (std::size_t j = 0; j < forms->size(); ++j) {
        const std::string path = "driver.forms." + std::to_string(j);
        cfg.driver.forms.push_back(parse_form((*forms)[j], path, marks));
        for (double b : cfg.driver.forms.back().jump_coefs) {
          if (!(b > -1.0)) invalid(path + ".b entries must exceed -1");
        }
        if (cfg.driver.forms.back().offset != 0.0) invalid(path + ".offset must be 0");
      }
    } else if (cfg.driver.family != "zero") {
      invalid("driver.family must be one of entropic, qexp, sublinear, zero (got '" +
              cfg.driver.family + "')");
    }
  }

  if (const Json* p = member(doc, "payoff")) {
    cfg.payoff = parse_payoff(*p, "payoff");
    if (const Json* dec = member(*p, "decomposition")) {
      if (!dec->is_array() || dec->empty()) {
        invalid("payoff.decomposition must be a non-empty array");
      }
      for (std::size_t i = 0; i < dec->size(); ++i) {
        const std::string path = "payoff.decomposition." + std::to_string(i);
        cfg.parts.push_back(parse_payoff((*dec)[i], path));
        cfg.part_names.push_back(text((*dec)[i], "name", path + ".name", "part" + std::to_string(i)));
      }
      if (!decomposition_matches(*cfg.payoff, cfg.parts)) {
        invalid("payoff.decomposition does not sum to the payoff");
      }
    }
  } else if (cfg.task != "simulate") {
    invalid("payoff is required for task " + cfg.task);
  }
  if (cfg.task == "allocate" && cfg.parts.empty()) {
    invalid("payoff.decomposition is required for task allocate");
  }

  if (const Json* m = member(doc, "method")) {
    if (!m->is_object()) invalid("method must be an object");
    auto& o = cfg.method;
    o.h = number(*m, "h", "method.h", 0.0);
    if (o.h < 0.0) invalid("method.h must be >= 0");
    const long long qn = integer(*m, "quadrature_nodes", "method.quadrature_nodes", 16);
    const long long cn = integer(*m, "convex_nodes", "method.convex_nodes", 8);
    const long long deg = integer(*m, "regression_degree", "method.regression_degree", 3);
    if (qn < 1 || cn < 1) invalid("method quadrature node counts must be >= 1");
    if (deg < 0 || deg > 8) invalid("method.regression_degree must lie in [0, 8]");
    o.quadrature_nodes = static_cast<std::size_t>(qn);
    o.convex_nodes = static_cast<std::size_t>(cn);
    o.regression.degree = static_cast<unsigned>(deg);
    o.regression.ridge = number(*m, "ridge", "method.ridge", 1e-8);
    if (o.regression.ridge < 0.0) invalid("method.ridge must be >= 0");
    if (const Json* jc = member(*m, "jump_count_features")) {
      if (!jc->is_boolean()) invalid("method.jump_count_features must be a boolean");
      o.regression.jump_count_features = jc->get<bool>();
    }
    o.z_max = number(*m, "z_max", "method.z_max", 10.0);
    o.upsilon_max = number(*m, "upsilon_max", "method.upsilon_max", 5.0);
    const std::string inner = text(*m, "allocation_inner", "method.allocation_inner", "measure");
    if (inner != "measure" && inner != "fd") invalid("method.allocation_inner must be measure or fd");
    o.inner_measure = inner == "measure";
  }

  if (const Json* t = member(doc, "tolerances")) {
    if (!t->is_object()) invalid("tolerances must be an object");
    auto& o = cfg.tolerances;
    o.closed_form = number(*t, "closed_form", "tolerances.closed_form", o.closed_form);
    o.oracle = number(*t, "oracle", "tolerances.oracle", o.oracle);
    o.gradient_crosscheck = number(*t, "gradient_crosscheck", "tolerances.gradient_crosscheck",
                                   o.gradient_crosscheck);
    o.full_allocation = number(*t, "full_allocation", "tolerances.full_allocation", o.full_allocation);
    o.representation = number(*t, "representation", "tolerances.representation", o.representation);
    o.clark_ocone = number(*t, "clark_ocone", "tolerances.clark_ocone", o.clark_ocone);
    o.gamma_gap = number(*t, "gamma_gap", "tolerances.gamma_gap", o.gamma_gap);
    o.controls_l2 = number(*t, "controls_l2", "tolerances.controls_l2", o.controls_l2);
    o.moment_sigmas = number(*t, "moment_sigmas", "tolerances.moment_sigmas", o.moment_sigmas);
    o.replay_max_flagged =
        integer(*t, "replay_max_flagged", "tolerances.replay_max_flagged", o.replay_max_flagged);
    o.monotonicity = number(*t, "monotonicity", "tolerances.monotonicity", o.monotonicity);
    o.translation = number(*t, "translation", "tolerances.translation", o.translation);
    o.convexity = number(*t, "convexity", "tolerances.convexity", o.convexity);
    o.homogeneity = number(*t, "homogeneity", "tolerances.homogeneity", o.homogeneity);
    o.subadditivity = number(*t, "subadditivity", "tolerances.subadditivity", o.subadditivity);
  }

  if (const Json* v = member(doc, "verify")) {
    if (!v->is_object()) invalid("verify must be an object");
    if (const Json* checks = member(*v, "checks")) {
      if (!checks->is_array()) invalid("verify.checks must be an array");
      for (const auto& c : *checks) {
        if (!c.is_string() || !contains(kChecks, c.get<std::string>())) {
          invalid("verify.checks: unknown check " + c.dump());
        }
        cfg.checks.push_back(c.get<std::string>());
      }
    }
  }
  if (cfg.checks.empty()) cfg.checks = {"axioms", "replay"};
  return cfg;
}

}  // namespace qerisk::tools
