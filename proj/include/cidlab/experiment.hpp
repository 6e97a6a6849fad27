#pragma once

// Batch runner: one experiment config fans out into (replicate x diagnostic)
// cells, each cell writes its own series CSV and verdict JSON, and a single
// manifest ties the artifacts to the config hash and the seed derivation.
// Data files are a pure function of the config, so rerunning a config must
// reproduce them byte for byte; the manifest carries the wall clock and is
// the one file exempt from that guarantee.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "cidlab/config.hpp"
#include "cidlab/diagnostics.hpp"
#include "cidlab/fractal.hpp"
#include "cidlab/models.hpp"
#include "json.hpp"

namespace cidlab {

inline constexpr const char* kToolVersion = "0.1.0";

struct CellOutcome {
  std::size_t replicate = 0;
  std::string diagnostic;
  bool ok = false;
  std::string message;  // error text when not ok
  Verdict verdict = Verdict::inconclusive;
  double final_value = 0.0;
  double trend = 0.0;
  std::string csv_path;
  std::string json_path;
};

struct RunManifest {
  std::string experiment;
  std::uint64_t config_hash = 0;
  std::vector<std::uint64_t> replicate_keys;
  std::vector<std::string> files;
  std::vector<CellOutcome> cells;
  std::vector<std::string> errors;
  Verdict aggregate = Verdict::inconclusive;
  Verdict expected = Verdict::pass;
  bool expected_match = false;
  double wall_ms = 0.0;
  std::string manifest_path;
};

namespace detail {

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_series_csv(const std::string& path,
                             const DiagnosticsSeries& s) {
  std::ofstream out(path);
  if (!out) throw error("cannot write file: " + path);
  out << "n,value,stderr\n";
  for (const auto& p : s.points)
    out << format_real(p.n) << "," << format_real(p.value) << ","
        << format_real(p.se) << "\n";
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double diag_real(const DiagnosticConfig& d, const std::string& key,
                        double fallback) {
  const std::string* v = d.find(key);
  return v ? parse_real(*v, "diagnostic " + d.name + "." + key) : fallback;
}

inline std::size_t diag_size(const DiagnosticConfig& d, const std::string& key,
                             std::size_t fallback) {
  const std::string* v = d.find(key);
  return v ? static_cast<std::size_t>(
                 parse_u64(*v, "diagnostic " + d.name + "." + key))
           : fallback;
}

inline CompactWindow diag_window(const ExperimentConfig& cfg,
                                 const DiagnosticConfig& d,
                                 const Trajectory& traj) {
  if (d.find("center")) {
    const std::string center = *d.find("center");
    if (center != "directing")
      throw error("config field diagnostic " + d.name +
                  ".center has unknown value: " + center);
    const double half = diag_real(d, "half_width", 3.0);
    const auto dir = directing(cfg.model, traj);
    if (dir.measure.atoms().empty())
      throw error("window centering needs a directing atom");
    const Atom* top = &dir.measure.atoms().front();
    for (const auto& a : dir.measure.atoms())
      if (a.mass > top->mass) top = &a;
    return {top->location - half, top->location + half};
  }
  if (!d.find("lo") || !d.find("hi"))
    throw error("diagnostic " + d.name + " needs lo and hi (or center)");
  return {diag_real(d, "lo", 0.0), diag_real(d, "hi", 0.0)};
}

struct CellData {
  DiagnosticsSeries series;
  nlohmann::json extra = nlohmann::json::object();
};

inline CellData run_tv(const ExperimentConfig& cfg, const DiagnosticConfig& d,
                       const Trajectory& traj) {
  return {tv_curve(traj, cfg.checkpoints,
                   diag_real(d, "final_threshold", calib::kTvFinal)),
          {}};
}

inline CellData run_gap(const ExperimentConfig& cfg, const DiagnosticConfig& d,
                        const Trajectory& traj, bool atoms) {
  DiagnosticsSeries s;
  s.label = atoms ? "atom_sup_gap" : "empirical_gap";
  s.threshold_used = diag_real(
      d, "threshold", atoms ? calib::kAtomGap : calib::kEmpiricalGap);
  std::string note;
  for (std::size_t n : cfg.checkpoints) {
    const double v =
        atoms ? atom_sup_gap(traj, n, &note) : empirical_gap(traj, n);
    s.points.push_back({static_cast<double>(n), v, 0.0});
  }
  s.verdict = s.final_value() <= s.threshold_used ? Verdict::pass
                                                  : Verdict::fail;
  s.notes = note;
  return {std::move(s), {}};
}

inline CellData run_lp(const ExperimentConfig& cfg, const DiagnosticConfig& d,
                       const Trajectory& traj) {
  const double p = diag_real(d, "p", 2.0);
  const CompactWindow k = diag_window(cfg, d, traj);
  CellData out{lp_curve(traj, k, p, cfg.checkpoints), {}};
  out.extra["p"] = p;
  out.extra["window"] = {k.lo, k.hi};
  return out;
}

inline CellData run_martingale(const ExperimentConfig& cfg,
                               const DiagnosticConfig& d,
                               const Trajectory& traj, std::size_t replicate) {
  std::vector<MartingaleTarget> targets;
  if (const std::string* t = d.find("targets")) {
    for (double u : parse_reals(*t, "diagnostic martingale.targets"))
      targets.push_back(target_upto(u));
  } else {
    targets.push_back(target_upto(0.0));
    targets.push_back(target_upto(1.0));
  }
  targets.push_back(target_all());
  const std::size_t h = diag_size(d, "history", 0);
  if (h > traj.observations.size())
    throw error("martingale history exceeds the trajectory length");
  const std::vector<double> history(traj.observations.begin(),
                                    traj.observations.begin() +
                                        static_cast<std::ptrdiff_t>(h));
  const std::size_t trials = diag_size(d, "trials", 10000);
  Rng rng = purpose_rng(cfg.master_seed, replicate,
                        StreamPurpose::martingale_mc);
  CellData out{martingale_residual(cfg.model, history, targets, trials, rng),
               {}};
  nlohmann::json names = nlohmann::json::array();
  for (const auto& t : targets) names.push_back(t.label);
  out.extra["targets"] = names;
  return out;
}

inline CellData run_doob(const ExperimentConfig& cfg, const DiagnosticConfig& d,
                         const Trajectory& traj, std::size_t replicate) {
  const double p = diag_real(d, "p", 2.0);
  const CompactWindow k = diag_window(cfg, d, traj);
  ModelSpec spec = cfg.model;
  spec.seed = substream_key(cfg.master_seed, replicate);
  const auto rep = doob_check(spec, k, p,
                              diag_size(d, "n_max", 100),
                              diag_size(d, "trials", 200));
  DiagnosticsSeries s;
  s.label = "doob_check";
  s.threshold_used = rep.constant;
  s.points.push_back({0.0, rep.lhs, rep.lhs_se});
  s.points.push_back({1.0, rep.rhs, rep.rhs_se});
  s.verdict = rep.verdict;
  s.notes = rep.notes;
  CellData out{std::move(s), {}};
  out.extra["constant"] = rep.constant;
  out.extra["worst_n"] = rep.worst_n;
  out.extra["window"] = {k.lo, k.hi};
  return out;
}

inline CellData run_fd_mass(const ExperimentConfig& cfg,
                            const DiagnosticConfig& d, const Trajectory& traj) {
  const double tol = diag_real(d, "tolerance", 1e-3);
  const auto grid = singular::fd_default_grid(cfg.model.singular.depth);
  const auto fd = fd_density_small_n(cfg.model, traj.weights, grid);
  const double integral = fd.density.integral();
  double min_density = fd.density.values().front();
  for (double v : fd.density.values())
    if (v < min_density) min_density = v;
  const double want = 1.0 - fd.atom_at_zero;

  DiagnosticsSeries s;
  s.label = "fd_mass";
  s.threshold_used = tol;
  s.points.push_back({0.0, integral, 0.0});
  s.points.push_back({1.0, fd.atom_at_zero, 0.0});
  const bool ok = std::abs(integral - want) <= tol && min_density >= 0.0 &&
                  fd.atom_at_zero == std::ldexp(1.0, -cfg.model.singular.depth);
  s.verdict = ok ? Verdict::pass : Verdict::fail;
  s.notes = "density integral vs one minus the exact atom";
  CellData out{std::move(s), {}};
  out.extra["atom"] = fd.atom_at_zero;
  out.extra["min_density"] = min_density;
  return out;
}

inline CellData run_identity(const ExperimentConfig& cfg,
                             const DiagnosticConfig& d,
                             std::size_t replicate) {
  std::vector<std::size_t> sizes{1, 2, 3};
  if (const std::string* v = d.find("sizes"))
    sizes = parse_sizes(*v, "diagnostic identity.sizes");
  const std::size_t trials = diag_size(d, "trials", 1000);
  ModelSpec spec = cfg.model;
  spec.seed = substream_key(cfg.master_seed, replicate);

  DiagnosticsSeries s;
  s.label = "identity_pattern_search";
  bool all_pass = true;
  CellData out;
  out.extra["searches"] = nlohmann::json::array();
  for (std::size_t n : sizes) {
    const auto res = identity_pattern_search(spec, static_cast<int>(n), trials);
    s.points.push_back({static_cast<double>(n), res.mean_entries,
                        res.se_entries});
    all_pass &= res.verdict == Verdict::pass;
    out.extra["searches"].push_back({{"size", n},
                                     {"completed", res.completed},
                                     {"mean_entries", res.mean_entries},
                                     {"median_entries", res.median_entries},
                                     {"max_entries", res.max_entries}});
  }
  s.verdict = all_pass ? Verdict::pass : Verdict::inconclusive;
  s.notes = "every search must terminate";
  out.series = std::move(s);
  return out;
}

inline CellData run_fractal(const ExperimentConfig& cfg,
                            const DiagnosticConfig& d, const Trajectory& traj,
                            std::size_t replicate) {
  std::vector<std::size_t> depths{5, 10, 15, 20};
  if (const std::string* v = d.find("depths"))
    depths = parse_sizes(*v, "diagnostic fractal.depths");
  const std::size_t mass_trunc = diag_size(d, "mass_truncation", 13);
  const std::size_t mass_samples = diag_size(d, "mass_samples", 100000);

  CellData out;
  out.series = ratio_curve(traj.weights);
  bool ok = out.series.verdict == Verdict::pass;

  double prev_dim = 0.0;
  out.extra["covers"] = nlohmann::json::array();
  for (std::size_t i = 0; i < depths.size(); ++i) {
    const auto est = cover_at_depth(traj.weights, static_cast<int>(depths[i]));
    out.extra["covers"].push_back({{"depth", est.depth},
                                   {"intervals", est.interval_count},
                                   {"epsilon", est.max_interval_length},
                                   {"dimension", est.dim_estimate}});
    if (i > 0 && !(est.dim_estimate < prev_dim)) ok = false;
    prev_dim = est.dim_estimate;
    if (i + 1 == depths.size() && est.dim_estimate > calib::kBoxDimCeiling)
      ok = false;
  }
  Rng rng = purpose_rng(cfg.master_seed, replicate, StreamPurpose::cover_mass);
  const double mass = cover_mass_check(traj.weights,
                                       static_cast<int>(mass_trunc),
                                       mass_samples, rng);
  out.extra["cover_mass"] = mass;
  if (mass != 1.0) ok = false;
  out.series.verdict = ok ? Verdict::pass : Verdict::fail;
  return out;
}

inline CellData run_cell(const ExperimentConfig& cfg, const DiagnosticConfig& d,
                         const Trajectory& traj, std::size_t replicate) {
  if (d.name == "tv") return run_tv(cfg, d, traj);
  if (d.name == "atom_gap") return run_gap(cfg, d, traj, true);
  if (d.name == "empirical_gap") return run_gap(cfg, d, traj, false);
  if (d.name == "lp") return run_lp(cfg, d, traj);
  if (d.name == "martingale") return run_martingale(cfg, d, traj, replicate);
  if (d.name == "doob") return run_doob(cfg, d, traj, replicate);
  if (d.name == "fd_mass") return run_fd_mass(cfg, d, traj);
  if (d.name == "identity") return run_identity(cfg, d, replicate);
  if (d.name == "fractal") return run_fractal(cfg, d, traj, replicate);
  throw error("unknown diagnostic: " + d.name);
}

}  // namespace detail

inline RunManifest run(const ExperimentConfig& cfg, const std::string& out_dir,
                       std::size_t jobs = 1) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);

  RunManifest man;
  man.experiment = cfg.id;
  man.config_hash = config_hash(cfg);
  man.expected = cfg.expected;
  for (std::size_t r = 0; r < cfg.replicates; ++r)
    man.replicate_keys.push_back(substream_key(cfg.master_seed, r));

  const std::size_t cells = cfg.replicates * cfg.diagnostics.size();
  man.cells.resize(cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells) return;
      const std::size_t rep = i / cfg.diagnostics.size();
      const auto& diag = cfg.diagnostics[i % cfg.diagnostics.size()];
      CellOutcome& cell = man.cells[i];
      cell.replicate = rep;
      cell.diagnostic = diag.name;
      const std::string stem = out_dir + "/" + cfg.id + ".r" +
                               std::to_string(rep) + "." + diag.name;
      try {
        const auto traj = sample_trajectory(cfg.model, cfg.length, rep);
        auto data = detail::run_cell(cfg, diag, traj, rep);
        cell.verdict = data.series.verdict;
        cell.trend = spearman(data.series.points);
        cell.final_value =
            data.series.points.empty() ? 0.0 : data.series.final_value();
        cell.csv_path = stem + ".csv";
        cell.json_path = stem + ".json";
        detail::write_series_csv(cell.csv_path, data.series);

        nlohmann::json j;
        j["experiment"] = cfg.id;
        j["diagnostic"] = diag.name;
        j["replicate"] = rep;
        j["label"] = data.series.label;
        j["verdict"] = verdict_name(data.series.verdict);
        j["threshold"] = data.series.threshold_used;
        j["final"] = cell.final_value;
        j["trend"] = cell.trend;
        j["notes"] = data.series.notes;
        j["expected"] = verdict_name(cfg.expected);
        j["expected_match"] = data.series.verdict == cfg.expected;
        j["extra"] = data.extra;
        std::ofstream out(cell.json_path);
        if (!out) throw error("cannot write file: " + cell.json_path);
        out << j.dump(2) << "\n";
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.message = e.what();
      }
    }
  };
  if (jobs == 0) jobs = 1;
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& cell : man.cells) {
    if (cell.ok) {
      man.files.push_back(cell.csv_path);
      man.files.push_back(cell.json_path);
    } else {
      man.errors.push_back(cfg.id + ".r" + std::to_string(cell.replicate) +
                           "." + cell.diagnostic + ": " + cell.message);
    }
  }

  bool any_error = !man.errors.empty();
  if (any_error) {
    man.aggregate = Verdict::inconclusive;
  } else if (cfg.gate == "median_final") {
    std::vector<double> finals;
    std::size_t negative = 0;
    for (const auto& cell : man.cells) {
      finals.push_back(cell.final_value);
      if (cell.trend < 0.0) ++negative;
    }
    const double med = detail::median_of(finals);
    const double share =
        static_cast<double>(negative) / static_cast<double>(man.cells.size());
    man.aggregate = med <= cfg.gate_threshold &&
                            share >= cfg.gate_trend_share
                        ? Verdict::pass
                        : Verdict::fail;
  } else {
    bool all = true;
    for (const auto& cell : man.cells) all &= cell.verdict == Verdict::pass;
    man.aggregate = all ? Verdict::pass : Verdict::fail;
  }
  man.expected_match = man.aggregate == cfg.expected;

  man.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  man.manifest_path = out_dir + "/" + cfg.id + ".manifest.json";

  nlohmann::json j;
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                static_cast<unsigned long long>(man.config_hash));
  j["experiment"] = cfg.id;
  j["config_hash"] = hash_buf;
  j["tool_version"] = kToolVersion;
  j["rng"] = kRngAlgorithm;
  j["replicate_keys"] = man.replicate_keys;
  j["files"] = man.files;
  j["errors"] = man.errors;
  j["aggregate_verdict"] = verdict_name(man.aggregate);
  j["expected"] = verdict_name(man.expected);
  j["expected_match"] = man.expected_match;
  j["gate"] = cfg.gate;
  j["wall_ms"] = man.wall_ms;
  std::ofstream out(man.manifest_path);
  if (!out) throw error("cannot write file: " + man.manifest_path);
  out << j.dump(2) << "\n";
  return man;
}

// Trajectory export for the simulate subcommand: full latent state in JSON,
// observations alone as CSV.
inline void write_trajectory_json(const std::string& path,
                                  const ExperimentConfig& cfg,
                                  const Trajectory& traj) {
  nlohmann::json j;
  j["experiment"] = cfg.id;
  j["model"] = canonical_config(cfg);
  j["replicate"] = traj.replicate;
  j["rng_key"] = traj.rng_key;
  j["observations"] = traj.observations;
  switch (cfg.model.tag) {
    case ModelTag::gauss_conj:
      j["latent"]["theta"] = traj.theta;
      break;
    case ModelTag::gauss_cid:
      j["latent"]["w_partial"] = traj.w_partial;
      break;
    case ModelTag::polya:
      j["latent"]["color_counts"] = traj.color_counts;
      break;
    case ModelTag::singular: {
      std::vector<double> w;
      for (int m = 1; m <= traj.weights.depth; ++m)
        w.push_back(traj.weights.at(m));
      j["latent"]["weights"] = w;
      j["latent"]["y_masks"] = traj.y_masks;
      break;
    }
  }
  std::ofstream out(path);
  if (!out) throw error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

inline void write_observations_csv(const std::string& path,
                                   const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw error("cannot write file: " + path);
  out << "index,x\n";
  for (std::size_t i = 0; i < traj.observations.size(); ++i)
    out << (i + 1) << "," << detail::format_real(traj.observations[i]) << "\n";
}

}  // namespace cidlab
