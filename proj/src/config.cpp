#include "dshrink/config.hpp"

#include "dshrink/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace dshrink {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(value);
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_double_or(const std::string& text, bool& ok) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto res = std::from_chars(begin, end, v);
  ok = res.ec == std::errc() && res.ptr == end && !text.empty();
  return v;
}

}  // namespace

IniConfig IniConfig::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

IniConfig IniConfig::parse_string(const std::string& text,
                                  const std::string& origin) {
  IniConfig cfg;
  cfg.origin_ = origin;
  std::stringstream ss(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line) +
                          ": malformed section header");
      }
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) {
        throw ConfigError(origin + ":" + std::to_string(line) +
                          ": empty section name");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line) +
                        ": expected key = value");
    }
    Entry e;
    e.section = section;
    e.key = trim(s.substr(0, eq));
    e.value = trim(s.substr(eq + 1));
    e.line = line;
    if (e.key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line) + ": empty key");
    }
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line) + ": key '" +
                        e.key + "' appears before any [section]");
    }
    for (const auto& prev : cfg.entries_) {
      if (prev.section == e.section && prev.key == e.key) {
        throw ConfigError(origin + ":" + std::to_string(line) +
                          ": duplicate key '" + e.key + "' in [" + e.section +
                          "]");
      }
    }
    cfg.entries_.push_back(std::move(e));
  }
  return cfg;
}

const IniConfig::Entry* IniConfig::find(const std::string& section,
                                        const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.section == section && e.key == key) return &e;
  }
  return nullptr;
}

void IniConfig::fail(const Entry& e, const std::string& what) const {
  throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" +
                    e.key + "' in [" + e.section + "]: " + what);
}

bool IniConfig::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string IniConfig::get_string(const std::string& section,
                                  const std::string& key,
                                  const std::string& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  return e->value;
}

double IniConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  bool ok = false;
  const double v = parse_double_or(e->value, ok);
  if (!ok) fail(*e, "expected a number, got '" + e->value + "'");
  return v;
}

int IniConfig::get_int(const std::string& section, const std::string& key,
                       int fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  long long v = 0;
  const char* begin = e->value.data();
  const char* end = begin + e->value.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || e->value.empty()) {
    fail(*e, "expected an integer, got '" + e->value + "'");
  }
  if (v < std::numeric_limits<int>::min() ||
      v > std::numeric_limits<int>::max()) {
    fail(*e, "integer out of range");
  }
  return static_cast<int>(v);
}

std::uint64_t IniConfig::get_u64(const std::string& section,
                                 const std::string& key,
                                 std::uint64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  std::uint64_t v = 0;
  const char* begin = e->value.data();
  const char* end = begin + e->value.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || e->value.empty()) {
    fail(*e, "expected a nonnegative integer, got '" + e->value + "'");
  }
  return v;
}

bool IniConfig::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  const std::string v = lower(e->value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(*e, "expected a boolean, got '" + e->value + "'");
}

std::vector<double> IniConfig::get_double_list(
    const std::string& section, const std::string& key,
    const std::vector<double>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  std::vector<double> out;
  for (const auto& item : split_list(e->value)) {
    bool ok = false;
    const double v = parse_double_or(item, ok);
    if (!ok) fail(*e, "expected a comma-separated number list, got '" + e->value + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(*e, "empty list");
  return out;
}

std::vector<int> IniConfig::get_int_list(const std::string& section,
                                         const std::string& key,
                                         const std::vector<int>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  e->consumed = true;
  std::vector<int> out;
  for (const auto& item : split_list(e->value)) {
    long long v = 0;
    const char* begin = item.data();
    const char* end = begin + item.size();
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end || item.empty()) {
      fail(*e, "expected a comma-separated integer list, got '" + e->value + "'");
    }
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) fail(*e, "empty list");
  return out;
}

void IniConfig::require_consumed() const {
  std::string msg;
  for (const auto& e : entries_) {
    if (e.consumed) continue;
    if (!msg.empty()) msg += "; ";
    msg += "unknown key '" + e.key + "' in [" + e.section + "] (line " +
           std::to_string(e.line) + ")";
  }
  if (!msg.empty()) throw ConfigError(origin_ + ": " + msg);
}

std::vector<double> named_delta_grid(const std::string& name) {
  if (name == "lambda1-grid") return {0.0, 0.2, 0.4, 0.6, 0.8};
  if (name == "lambda2-grid") return {0.0, 0.2, 0.4, 0.8, 1.2, 1.6};
  throw ConfigError("unknown delta grid preset '" + name + "'");
}

namespace {

void apply_solver_section(const IniConfig& ini, SolverOptions& opts) {
  opts.tolerance = ini.get_double("solver", "tolerance", opts.tolerance);
  opts.max_sweeps = ini.get_int("solver", "max_sweeps", opts.max_sweeps);
  opts.kkt_tol = ini.get_double("solver", "kkt_tol", opts.kkt_tol);
  opts.intercept = ini.get_bool("solver", "intercept", opts.intercept);
  opts.standardize = ini.get_bool("solver", "standardize", opts.standardize);
  opts.path_length = ini.get_int("solver", "path_length", opts.path_length);
  opts.path_ratio = ini.get_double("solver", "path_ratio", opts.path_ratio);
}

CvRule parse_rule(const std::string& value, const std::string& key) {
  if (value == "1se") return CvRule::kOneSe;
  if (value == "min") return CvRule::kMin;
  throw ConfigError("invalid cv " + key + " '" + value +
                    "' (expected min or 1se)");
}

const char* rule_str(CvRule rule) {
  return rule == CvRule::kOneSe ? "1se" : "min";
}

void apply_cv_section(const IniConfig& ini, PipelineOptions& opts) {
  opts.cv_folds = ini.get_int("cv", "folds", opts.cv_folds);
  opts.cv_rule =
      parse_rule(ini.get_string("cv", "rule", rule_str(opts.cv_rule)), "rule");
  opts.lasso_rule = parse_rule(
      ini.get_string("cv", "lasso_rule", rule_str(opts.lasso_rule)),
      "lasso_rule");
  opts.gamma = ini.get_double("cv", "gamma", opts.gamma);
  const std::string pilot = ini.get_string(
      "cv", "pilot", opts.pilot == PilotKind::kRidge ? "ridge" : "cv-lasso");
  if (pilot == "cv-lasso") {
    opts.pilot = PilotKind::kCvLasso;
  } else if (pilot == "ridge") {
    opts.pilot = PilotKind::kRidge;
  } else {
    throw ConfigError("invalid pilot '" + pilot + "' (expected cv-lasso or ridge)");
  }
  opts.ridge_pilot_lambda =
      ini.get_double("cv", "ridge_pilot_lambda", opts.ridge_pilot_lambda);
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(values[i]);
  }
  return out;
}

const char* bool_str(bool v) { return v ? "true" : "false"; }

void append_solver_echo(std::string& out, const SolverOptions& opts) {
  out += "[solver]\n";
  out += "tolerance = " + format_double(opts.tolerance) + "\n";
  out += "max_sweeps = " + std::to_string(opts.max_sweeps) + "\n";
  out += "kkt_tol = " + format_double(opts.kkt_tol) + "\n";
  out += std::string("intercept = ") + bool_str(opts.intercept) + "\n";
  out += std::string("standardize = ") + bool_str(opts.standardize) + "\n";
  out += "path_length = " + std::to_string(opts.path_length) + "\n";
  out += "path_ratio = " + format_double(opts.path_ratio) + "\n";
}

void append_cv_echo(std::string& out, const PipelineOptions& opts) {
  out += "[cv]\n";
  out += "folds = " + std::to_string(opts.cv_folds) + "\n";
  out += std::string("rule = ") + rule_str(opts.cv_rule) + "\n";
  out += std::string("lasso_rule = ") + rule_str(opts.lasso_rule) + "\n";
  out += "gamma = " + format_double(opts.gamma) + "\n";
  out += std::string("pilot = ") +
         (opts.pilot == PilotKind::kRidge ? "ridge" : "cv-lasso") + "\n";
  out += "ridge_pilot_lambda = " + format_double(opts.ridge_pilot_lambda) + "\n";
}

}  // namespace

SimulationConfig load_simulation_config(const IniConfig& ini) {
  SimulationConfig cfg;
  cfg.n = ini.get_int("simulation", "n", cfg.n);
  cfg.p1 = ini.get_int("simulation", "p1", cfg.p1);
  cfg.p2 = ini.get_int("simulation", "p2", cfg.p2);
  cfg.p3 = ini.get_int("simulation", "p3", cfg.p3);
  cfg.strong = ini.get_double("simulation", "strong", cfg.strong);
  const std::string grid = ini.get_string("simulation", "delta_grid", "");
  if (!grid.empty()) {
    bool numeric = false;
    parse_double_or(split_list(grid).front(), numeric);
    cfg.delta_grid = numeric ? ini.get_double_list("simulation", "delta_grid",
                                                   cfg.delta_grid)
                             : named_delta_grid(grid);
  }
  cfg.replications = ini.get_int("simulation", "replications", cfg.replications);
  cfg.seed = ini.get_u64("simulation", "seed", cfg.seed);
  cfg.workers = ini.get_int("simulation", "workers", cfg.workers);
  apply_solver_section(ini, cfg.pipeline.solver);
  apply_cv_section(ini, cfg.pipeline);
  return cfg;
}

BootstrapConfig load_bootstrap_config(const IniConfig& ini) {
  BootstrapConfig cfg;
  cfg.draws = ini.get_int("bootstrap", "draws", cfg.draws);
  cfg.folds = ini.get_int("bootstrap", "folds", cfg.folds);
  cfg.seed = ini.get_u64("bootstrap", "seed", cfg.seed);
  cfg.fast = ini.get_bool("bootstrap", "fast", cfg.fast);
  cfg.retain_draws = ini.get_bool("bootstrap", "retain_draws", cfg.retain_draws);
  cfg.workers = ini.get_int("bootstrap", "workers", cfg.workers);
  apply_solver_section(ini, cfg.pipeline.solver);
  apply_cv_section(ini, cfg.pipeline);
  return cfg;
}

TheoryConfig load_theory_config(const IniConfig& ini) {
  TheoryConfig cfg;
  cfg.oracle_instances =
      ini.get_int("theory", "oracle_instances", cfg.oracle_instances);
  cfg.bound_instances =
      ini.get_int("theory", "bound_instances", cfg.bound_instances);
  cfg.bound_lambdas =
      ini.get_double_list("theory", "bound_lambdas", cfg.bound_lambdas);
  cfg.dominance_instances =
      ini.get_int("theory", "dominance_instances", cfg.dominance_instances);
  cfg.risk_instances = ini.get_int("theory", "risk_instances", cfg.risk_instances);
  cfg.trend_ns = ini.get_int_list("theory", "trend_ns", cfg.trend_ns);
  cfg.trend_instances =
      ini.get_int("theory", "trend_instances", cfg.trend_instances);
  cfg.seed = ini.get_u64("theory", "seed", cfg.seed);
  cfg.base.n = ini.get_int("instance", "n", cfg.base.n);
  cfg.base.p = ini.get_int("instance", "p", cfg.base.p);
  cfg.base.p_strong = ini.get_int("instance", "p_strong", cfg.base.p_strong);
  cfg.base.p_weak = ini.get_int("instance", "p_weak", cfg.base.p_weak);
  cfg.base.lambda = ini.get_double("instance", "lambda", cfg.base.lambda);
  cfg.base.strong_lo = ini.get_double("instance", "strong_lo", cfg.base.strong_lo);
  cfg.base.strong_hi = ini.get_double("instance", "strong_hi", cfg.base.strong_hi);
  cfg.base.weak = ini.get_double("instance", "weak", cfg.base.weak);
  cfg.base.noise_sd = ini.get_double("instance", "noise_sd", cfg.base.noise_sd);
  return cfg;
}

std::string render_simulation_echo(const SimulationConfig& config) {
  std::string out = "[simulation]\n";
  out += "n = " + std::to_string(config.n) + "\n";
  out += "p1 = " + std::to_string(config.p1) + "\n";
  out += "p2 = " + std::to_string(config.p2) + "\n";
  out += "p3 = " + std::to_string(config.p3) + "\n";
  out += "strong = " + format_double(config.strong) + "\n";
  out += "delta_grid = " + join_doubles(config.delta_grid) + "\n";
  out += "replications = " + std::to_string(config.replications) + "\n";
  out += "seed = " + std::to_string(config.seed) + "\n";
  out += "\n";
  append_solver_echo(out, config.pipeline.solver);
  out += "\n";
  append_cv_echo(out, config.pipeline);
  return out;
}

std::string render_bootstrap_echo(const BootstrapConfig& config) {
  std::string out = "[bootstrap]\n";
  out += "draws = " + std::to_string(config.draws) + "\n";
  out += "folds = " + std::to_string(config.folds) + "\n";
  out += "seed = " + std::to_string(config.seed) + "\n";
  out += std::string("fast = ") + bool_str(config.fast) + "\n";
  out += std::string("retain_draws = ") + bool_str(config.retain_draws) + "\n";
  out += "\n";
  append_solver_echo(out, config.pipeline.solver);
  out += "\n";
  append_cv_echo(out, config.pipeline);
  return out;
}

std::string render_theory_echo(const TheoryConfig& config) {
  std::string out = "[theory]\n";
  out += "oracle_instances = " + std::to_string(config.oracle_instances) + "\n";
  out += "bound_instances = " + std::to_string(config.bound_instances) + "\n";
  out += "bound_lambdas = " + join_doubles(config.bound_lambdas) + "\n";
  out += "dominance_instances = " + std::to_string(config.dominance_instances) + "\n";
  out += "risk_instances = " + std::to_string(config.risk_instances) + "\n";
  out += "trend_ns = " + join_ints(config.trend_ns) + "\n";
  out += "trend_instances = " + std::to_string(config.trend_instances) + "\n";
  out += "seed = " + std::to_string(config.seed) + "\n";
  out += "\n[instance]\n";
  out += "n = " + std::to_string(config.base.n) + "\n";
  out += "p = " + std::to_string(config.base.p) + "\n";
  out += "p_strong = " + std::to_string(config.base.p_strong) + "\n";
  out += "p_weak = " + std::to_string(config.base.p_weak) + "\n";
  out += "lambda = " + format_double(config.base.lambda) + "\n";
  out += "strong_lo = " + format_double(config.base.strong_lo) + "\n";
  out += "strong_hi = " + format_double(config.base.strong_hi) + "\n";
  out += "weak = " + format_double(config.base.weak) + "\n";
  out += "noise_sd = " + format_double(config.base.noise_sd) + "\n";
  return out;
}

}  // namespace dshrink
