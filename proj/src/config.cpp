#include "plap/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace plap {

namespace {

// Pull a field with a typed getter, rethrowing with the full dotted path so
// config errors point at the offending entry.
template <typename T>
T field(const nlohmann::json& j, const std::string& path, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + key + ": " + e.what());
  }
}

void expect(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path + ": " + what);
}

}  // namespace

void ExperimentConfig::validate() const {
  expect(grid.nx >= 2, "grid.nx", "must be >= 2");
  expect(grid.ny >= 1, "grid.ny", "must be >= 1");
  expect(grid.lx > 0.0 && grid.ly > 0.0, "grid.lx/ly", "side lengths must be positive");
  try {
    flow.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("flow: ") + e.what());
  }
  try {
    weight_model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("weight_model: ") + e.what());
  }
  try {
    init_model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("init_model: ") + e.what());
  }
  expect(!time_grid.empty(), "time_grid", "must be nonempty");
  expect(std::is_sorted(time_grid.begin(), time_grid.end()), "time_grid", "must be increasing");
  expect(time_grid.front() >= 0.0, "time_grid", "times must be >= 0");
  expect(time_grid.back() > 0.0, "time_grid", "needs a positive time");
  expect(steps_per_unit_time >= 1, "steps_per_unit_time", "must be >= 1");
  expect(ensemble_n >= 1, "ensemble_n", "must be >= 1");
  for (double r : bounds.r_list) expect(r >= 1.0, "bounds.r_list", "entries must be >= 1");
  for (double e : bounds.eps_list) expect(e > 0.0, "bounds.eps_list", "entries must be > 0");
  for (double a : bounds.alpha_grid) expect(a > 0.0, "bounds.alpha_grid", "entries must be > 0");
  if (bounds.delta)
    expect(*bounds.delta > 1.0, "bounds.delta", "must be > n - 1 = 1");
  expect(bounds.margin_rel >= 0.0 && bounds.margin_abs >= 0.0, "bounds.margin_rel/abs",
         "margins must be >= 0");
  expect(!output_dir.empty(), "output_dir", "must be nonempty");
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["grid"] = {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}, {"lx", cfg.grid.lx}, {"ly", cfg.grid.ly}};
  j["flow"] = {{"p", cfg.flow.p},
               {"eps_reg", cfg.flow.eps_reg},
               {"solver_tol", cfg.flow.solver_tol},
               {"max_iter", cfg.flow.max_iter}};
  j["weight_model"] = {{"kind", to_string(cfg.weight_model.kind)},
                       {"g1", cfg.weight_model.g1},
                       {"g2", cfg.weight_model.g2},
                       {"correlation_length", cfg.weight_model.correlation_length}};
  j["init_model"] = {{"kind", to_string(cfg.init_model.kind)},
                     {"amplitude", cfg.init_model.amplitude}};
  if (cfg.init_model.k_trunc) j["init_model"]["k_trunc"] = *cfg.init_model.k_trunc;
  j["time_grid"] = cfg.time_grid;
  j["steps_per_unit_time"] = cfg.steps_per_unit_time;
  j["ensemble_n"] = cfg.ensemble_n;
  j["base_seed"] = cfg.base_seed;
  j["bounds"] = {{"r_list", cfg.bounds.r_list},
                 {"eps_list", cfg.bounds.eps_list},
                 {"alpha_grid", cfg.bounds.alpha_grid},
                 {"margin_rel", cfg.bounds.margin_rel},
                 {"margin_abs", cfg.bounds.margin_abs}};
  if (cfg.bounds.delta) j["bounds"]["delta"] = *cfg.bounds.delta;
  j["output_dir"] = cfg.output_dir;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg = default_config();
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    cfg.grid.nx = field(g, "grid.", "nx", cfg.grid.nx);
    cfg.grid.ny = field(g, "grid.", "ny", cfg.grid.ny);
    cfg.grid.lx = field(g, "grid.", "lx", cfg.grid.lx);
    cfg.grid.ly = field(g, "grid.", "ly", cfg.grid.ly);
  }
  if (j.contains("flow")) {
    const auto& f = j.at("flow");
    cfg.flow.p = field(f, "flow.", "p", cfg.flow.p);
    cfg.flow.eps_reg = field(f, "flow.", "eps_reg", cfg.flow.eps_reg);
    cfg.flow.solver_tol = field(f, "flow.", "solver_tol", cfg.flow.solver_tol);
    cfg.flow.max_iter = field(f, "flow.", "max_iter", cfg.flow.max_iter);
  }
  if (j.contains("weight_model")) {
    const auto& w = j.at("weight_model");
    try {
      cfg.weight_model.kind =
          weight_kind_from_string(field<std::string>(w, "weight_model.", "kind",
                                                     to_string(cfg.weight_model.kind)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("weight_model.kind: ") + e.what());
    }
    cfg.weight_model.g1 = field(w, "weight_model.", "g1", cfg.weight_model.g1);
    cfg.weight_model.g2 = field(w, "weight_model.", "g2", cfg.weight_model.g2);
    cfg.weight_model.correlation_length =
        field(w, "weight_model.", "correlation_length", cfg.weight_model.correlation_length);
  }
  if (j.contains("init_model")) {
    const auto& m = j.at("init_model");
    try {
      cfg.init_model.kind = init_kind_from_string(
          field<std::string>(m, "init_model.", "kind", to_string(cfg.init_model.kind)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("init_model.kind: ") + e.what());
    }
    cfg.init_model.amplitude = field(m, "init_model.", "amplitude", cfg.init_model.amplitude);
    if (m.contains("k_trunc") && !m.at("k_trunc").is_null())
      cfg.init_model.k_trunc = field(m, "init_model.", "k_trunc", 1.0);
  }
  cfg.time_grid = field(j, "", "time_grid", cfg.time_grid);
  cfg.steps_per_unit_time = field(j, "", "steps_per_unit_time", cfg.steps_per_unit_time);
  cfg.ensemble_n = field(j, "", "ensemble_n", cfg.ensemble_n);
  cfg.base_seed = field(j, "", "base_seed", cfg.base_seed);
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    cfg.bounds.r_list = field(b, "bounds.", "r_list", cfg.bounds.r_list);
    cfg.bounds.eps_list = field(b, "bounds.", "eps_list", cfg.bounds.eps_list);
    cfg.bounds.alpha_grid = field(b, "bounds.", "alpha_grid", cfg.bounds.alpha_grid);
    cfg.bounds.margin_rel = field(b, "bounds.", "margin_rel", cfg.bounds.margin_rel);
    cfg.bounds.margin_abs = field(b, "bounds.", "margin_abs", cfg.bounds.margin_abs);
    if (b.contains("delta") && !b.at("delta").is_null())
      cfg.bounds.delta = field(b, "bounds.", "delta", 1.5);
  }
  cfg.output_dir = field(j, "", "output_dir", cfg.output_dir);
  cfg.validate();
  return cfg;
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set expects key=value, got: " + assignment);
  std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  std::string pointer = "/";
  for (char c : key) pointer += (c == '.') ? '/' : c;
  nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;  // plain string
  j[nlohmann::json::json_pointer(pointer)] = parsed;
}

ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::vector<std::string>& overrides) {
  nlohmann::json j = nlohmann::json::object();
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config parse error in " + file.string() + ": " + e.what());
    }
  }
  for (const std::string& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

uint64_t fnv1a64(const void* data, size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  const std::string dump = config_to_json(cfg).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(dump.data(), dump.size())));
  return buf;
}

}  // namespace plap
