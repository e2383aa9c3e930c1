#include "plap/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

namespace plap::cli {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string checksum_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return buf;
}

// Data files are rendered to byte buffers first so the manifest can record
// their checksums, then everything is written in one pass.
struct OutputSet {
  std::map<std::string, std::string> files;

  void add(const std::string& name, const std::string& content) { files[name] = content; }

  void write(const std::filesystem::path& dir, const std::string& config_hash, long total_steps,
             double wall_clock_seconds, const nlohmann::json& extra = {}) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["config_hash"] = config_hash;
    manifest["total_steps"] = total_steps;
    manifest["wall_clock_seconds"] = wall_clock_seconds;
    for (auto& [key, value] : extra.items()) manifest[key] = value;
    nlohmann::json files_json = nlohmann::json::object();
    for (const auto& [name, content] : files) files_json[name] = checksum_hex(content);
    manifest["files"] = files_json;
    files["manifest.json"] = manifest.dump(2) + "\n";
    for (const auto& [name, content] : files) {
      std::ofstream out(dir / name, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
      out << content;
    }
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string render_snapshot(const ScalarField& u) {
  std::string out;
  for (int j = 0; j < u.domain.ny; ++j) {
    for (int i = 0; i < u.domain.nx; ++i) {
      if (i) out += ' ';
      out += num(u(i, j));
    }
    out += '\n';
  }
  return out;
}

std::optional<double> constants_delta(const ExperimentConfig& cfg) {
  return cfg.flow.p > 2.0 ? cfg.bounds.delta : std::nullopt;
}

ConstantSet constants_for(const ExperimentConfig& cfg) {
  return estimate_constants(cfg.grid.make(), cfg.flow, cfg.weight_model.g1, constants_delta(cfg));
}

const char* provenance_name(Provenance p) {
  return p == Provenance::Analytic ? "analytic" : "estimated";
}

nlohmann::json tagged_json(const TaggedConstant& c) {
  return {{"value", c.value}, {"provenance", provenance_name(c.provenance)}};
}

}  // namespace

nlohmann::json constants_to_json(const ConstantSet& consts) {
  nlohmann::json j;
  j["p"] = consts.p;
  j["g1"] = consts.g1;
  j["area"] = consts.area;
  if (consts.delta) j["delta"] = *consts.delta;
  j["poincare_l1"] = tagged_json(consts.c_poincare_l1);
  j["poincare_l2"] = tagged_json(consts.c_poincare_l2);
  if (consts.c_poincare_l1pd) j["poincare_l1pd"] = tagged_json(*consts.c_poincare_l1pd);
  j["embed_w1m_l2"] = tagged_json(consts.c_embed_w1m_l2);
  if (consts.c_embed_w11pd_linf) j["embed_w11pd_linf"] = tagged_json(*consts.c_embed_w11pd_linf);
  j["c_star"] = tagged_json(consts.c_star);
  return j;
}

nlohmann::json ensemble_to_json(const EnsembleResult& ens, const std::string& config_hash) {
  nlohmann::json j;
  j["artifact_version"] = kArtifactVersion;
  j["config_hash"] = config_hash;
  j["base_seed"] = ens.base_seed;
  j["n"] = ens.n;
  j["t_grid"] = ens.t_grid;
  nlohmann::json paths = nlohmann::json::array();
  for (const PathStats& ps : ens.paths) {
    paths.push_back({{"seed", ps.seed},
                     {"delta_u", ps.delta_u},
                     {"u0_l1", ps.u0_l1},
                     {"u0_linf", ps.u0_linf},
                     {"mass_drift", ps.mass_drift},
                     {"dev_l1", ps.dev_l1},
                     {"dev_linf", ps.dev_linf},
                     {"sq_dev", ps.sq_dev}});
  }
  j["paths"] = paths;
  return j;
}

EnsembleResult ensemble_from_json(const nlohmann::json& j, std::string* config_hash_out) {
  EnsembleResult ens;
  if (config_hash_out) *config_hash_out = j.at("config_hash").get<std::string>();
  ens.base_seed = j.at("base_seed").get<uint64_t>();
  ens.n = j.at("n").get<int>();
  ens.t_grid = j.at("t_grid").get<std::vector<double>>();
  for (const auto& pj : j.at("paths")) {
    PathStats ps;
    ps.seed = pj.at("seed").get<uint64_t>();
    ps.delta_u = pj.at("delta_u").get<double>();
    ps.u0_l1 = pj.at("u0_l1").get<double>();
    ps.u0_linf = pj.at("u0_linf").get<double>();
    ps.mass_drift = pj.at("mass_drift").get<double>();
    ps.dev_l1 = pj.at("dev_l1").get<std::vector<double>>();
    ps.dev_linf = pj.at("dev_linf").get<std::vector<double>>();
    ps.sq_dev = pj.at("sq_dev").get<std::vector<double>>();
    ens.paths.push_back(std::move(ps));
  }
  return ens;
}

nlohmann::json report_to_json(const BoundReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const BoundRow& r : report.rows) {
    nlohmann::json row = {{"name", r.name},         {"t", r.t},
                          {"bound", r.bound},       {"empirical", r.empirical},
                          {"margin", r.margin},     {"applicable", r.applicable},
                          {"pass", r.pass}};
    if (r.alpha) row["alpha"] = *r.alpha;
    if (r.param) row["param"] = *r.param;
    if (r.ci_halfwidth) row["ci_halfwidth"] = *r.ci_halfwidth;
    rows.push_back(row);
  }
  return {{"artifact_version", kArtifactVersion}, {"all_pass", report.all_pass()}, {"rows", rows}};
}

int cmd_evolve(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  Stopwatch watch;
  const GridDomain grid = cfg.grid.make();
  const WeightField gamma = sample_weight(cfg.weight_model, grid, cfg.base_seed);
  const ScalarField u0 = sample_initial(cfg.init_model, grid, cfg.base_seed);
  const double t_end = cfg.time_grid.back();
  const int m = std::max(1, static_cast<int>(std::ceil(t_end * cfg.steps_per_unit_time)));

  const Trajectory traj = evolve(gamma, u0, t_end, m, cfg.flow, cfg.time_grid);
  const double mean0 = average(u0);

  OutputSet out;
  {
    std::string csv = "time,mass,sq_deviation,dissipation,dev_l1,dev_l2,dev_linf\n";
    for (size_t s = 0; s < traj.snapshots.size(); ++s) {
      const ScalarField& ut = traj.snapshots[s];
      ScalarField dev = ut;
      for (double& v : dev.values) v -= mean0;
      const int k = static_cast<int>(std::llround(traj.snapshot_times[s] / traj.dt));
      csv += num(traj.snapshot_times[s]) + ',' + num(traj.mass_ledger[k]) + ',' +
             num(traj.sq_deviation_ledger[k]) + ',' + num(traj.dissipation_ledger[k]) + ',' +
             num(lq_norm(dev, 1.0)) + ',' + num(lq_norm(dev, 2.0)) + ',' +
             num(lq_norm(dev, std::numeric_limits<double>::infinity())) + '\n';
      out.add("snapshot_" + std::to_string(s) + ".txt", render_snapshot(ut));
    }
    out.add("trajectory.csv", csv);
  }
  {
    std::string csv = "time,mass,sq_deviation,dissipation\n";
    for (size_t k = 0; k < traj.step_times.size(); ++k)
      csv += num(traj.step_times[k]) + ',' + num(traj.mass_ledger[k]) + ',' +
             num(traj.sq_deviation_ledger[k]) + ',' + num(traj.dissipation_ledger[k]) + '\n';
    out.add("ledger.csv", csv);
  }
  const double mismatch = dissipation_identity_check(traj);
  std::cout << "evolve: " << m << " steps, tau = " << traj.dt
            << ", mass drift = " << traj.mass_drift()
            << ", dissipation identity max mismatch = " << mismatch << "\n";
  out.write(out_dir, config_hash_hex(cfg), m, watch.seconds());
  return 0;
}

int cmd_ensemble(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int threads) {
  Stopwatch watch;
  const GridDomain grid = cfg.grid.make();
  const EnsembleResult ens =
      run_ensemble(cfg.weight_model, cfg.init_model, grid, cfg.flow, cfg.time_grid,
                   cfg.steps_per_unit_time, cfg.ensemble_n, cfg.base_seed, threads);

  const std::string hash = config_hash_hex(cfg);
  OutputSet out;
  {
    std::string csv = "path,seed,delta_u,u0_l1,u0_linf,mass_drift\n";
    for (size_t i = 0; i < ens.paths.size(); ++i) {
      const PathStats& ps = ens.paths[i];
      csv += std::to_string(i) + ',' + std::to_string(ps.seed) + ',' + num(ps.delta_u) + ',' +
             num(ps.u0_l1) + ',' + num(ps.u0_linf) + ',' + num(ps.mass_drift) + '\n';
    }
    out.add("paths.csv", csv);
  }
  {
    std::string csv = "path,time,dev_l1,dev_linf,sq_dev\n";
    for (size_t i = 0; i < ens.paths.size(); ++i)
      for (size_t s = 0; s < ens.t_grid.size(); ++s)
        csv += std::to_string(i) + ',' + num(ens.t_grid[s]) + ',' + num(ens.paths[i].dev_l1[s]) +
               ',' + num(ens.paths[i].dev_linf[s]) + ',' + num(ens.paths[i].sq_dev[s]) + '\n';
    out.add("series.csv", csv);
  }
  out.add("ensemble.json", ensemble_to_json(ens, hash).dump(2) + "\n");
  const long total_steps =
      static_cast<long>(std::max(1.0, std::ceil(ens.t_grid.back() * cfg.steps_per_unit_time))) *
      ens.n;
  std::cout << "ensemble: " << ens.n << " paths, " << ens.t_grid.size() << " sample times\n";
  out.write(out_dir, hash, total_steps, watch.seconds());
  return 0;
}

int cmd_constants(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  Stopwatch watch;
  const ConstantSet consts = constants_for(cfg);
  OutputSet out;
  nlohmann::json j = constants_to_json(consts);
  j["artifact_version"] = kArtifactVersion;
  out.add("constants.json", j.dump(2) + "\n");
  std::cout << "constants: C_{S,1} = " << consts.c_poincare_l1.value
            << ", C_{S,2} = " << consts.c_poincare_l2.value << ", C* = " << consts.c_star.value
            << "\n";
  out.write(out_dir, config_hash_hex(cfg), 0, watch.seconds());
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg, const std::filesystem::path& data_dir) {
  const auto ensemble_path = data_dir / "ensemble.json";
  const auto manifest_path = data_dir / "manifest.json";
  std::ifstream ens_in(ensemble_path, std::ios::binary);
  if (!ens_in) throw std::runtime_error("verify: missing " + ensemble_path.string());
  const std::string ens_bytes((std::istreambuf_iterator<char>(ens_in)),
                              std::istreambuf_iterator<char>());
  std::ifstream man_in(manifest_path);
  if (!man_in) throw std::runtime_error("verify: missing " + manifest_path.string());
  nlohmann::json manifest;
  man_in >> manifest;

  const std::string recorded = manifest.at("files").at("ensemble.json").get<std::string>();
  if (recorded != checksum_hex(ens_bytes))
    throw std::runtime_error("verify: checksum mismatch for ensemble.json (tampered or corrupt)");

  std::string data_hash;
  const EnsembleResult ens = ensemble_from_json(nlohmann::json::parse(ens_bytes), &data_hash);
  const std::string cfg_hash = config_hash_hex(cfg);
  if (data_hash != cfg_hash)
    throw std::runtime_error("verify: config hash mismatch (stale ensemble data: have " +
                             data_hash + ", config is " + cfg_hash + ")");

  const ConstantSet consts = constants_for(cfg);
  const BoundReport report =
      verify(ens, consts, cfg.flow, cfg.grid.make(), cfg.weight_model.g1, cfg.bounds);
  std::cout << format_report(report);

  std::ofstream rep(data_dir / "report.json", std::ios::binary);
  rep << report_to_json(report).dump(2) << "\n";
  const bool ok = report.all_pass();
  std::cout << (ok ? "verify: all applicable bounds hold\n" : "verify: BOUND VIOLATION\n");
  return ok ? 0 : 1;
}

}  // namespace plap::cli
