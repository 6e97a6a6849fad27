// Command-line front end. Every subcommand is a thin wrapper over the
// library: `simulate` writes trajectories, `diagnose` runs one experiment
// config, `fractal` is `diagnose` preloaded with the shipped cover-analysis
// config, `report` aggregates finished manifests, and `suite` runs the whole
// shipped battery. Exit status is 0 only when every expected verdict matches.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cidlab/report.hpp"
#include "cidlab/suite.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cidlab::error("cannot read config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

cidlab::ExperimentConfig load_config(const std::string& path,
                                     const std::uint64_t* seed) {
  cidlab::ExperimentConfig cfg = cidlab::parse_config(read_file(path));
  if (seed) {
    cfg.master_seed = *seed;
    cfg.model.seed = *seed;
  }
  return cfg;
}

int run_experiment(const cidlab::ExperimentConfig& cfg, const std::string& out,
                   std::size_t jobs) {
  const cidlab::RunManifest man = cidlab::run(cfg, out, jobs);
  std::printf("%s: aggregate %s (expected %s), %zu files, manifest %s\n",
              man.experiment.c_str(), verdict_name(man.aggregate),
              verdict_name(man.expected), man.files.size(),
              man.manifest_path.c_str());
  for (const auto& e : man.errors) std::printf("  error: %s\n", e.c_str());
  return man.expected_match ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation laboratory for exchangeable and c.i.d. sequences"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t jobs = 1;
  std::vector<std::string> manifests;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path,
                                "experiment config file");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "override the master seed")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--jobs", jobs, "worker threads");
  };

  auto* sim = app.add_subcommand("simulate",
                                 "sample trajectories and write them out");
  add_common(sim, true);
  auto* diag = app.add_subcommand("diagnose", "run one experiment config");
  add_common(diag, true);
  auto* frac = app.add_subcommand(
      "fractal", "cover analysis of the singular support (shipped config "
                 "unless --config overrides)");
  add_common(frac, false);
  auto* rep = app.add_subcommand("report", "aggregate finished manifests");
  rep->add_option("manifests", manifests, "manifest JSON paths")->required();
  rep->add_option("--out", out_dir, "output directory");
  auto* suite = app.add_subcommand("suite", "run the shipped battery");
  add_common(suite, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::uint64_t* seed_ptr = seed_set ? &seed : nullptr;

    if (sim->parsed()) {
      const auto cfg = load_config(config_path, seed_ptr);
      std::filesystem::create_directories(out_dir);
      for (std::size_t r = 0; r < cfg.replicates; ++r) {
        const auto traj = cidlab::sample_trajectory(cfg.model, cfg.length, r);
        const std::string stem =
            out_dir + "/" + cfg.id + ".r" + std::to_string(r);
        cidlab::write_trajectory_json(stem + ".trajectory.json", cfg, traj);
        cidlab::write_observations_csv(stem + ".observations.csv", traj);
        std::printf("%s.{trajectory.json,observations.csv}\n", stem.c_str());
      }
      return 0;
    }
    if (diag->parsed())
      return run_experiment(load_config(config_path, seed_ptr), out_dir, jobs);
    if (frac->parsed()) {
      cidlab::ExperimentConfig cfg;
      if (config_path.empty()) {
        for (const auto& entry : cidlab::suite_entries())
          if (std::string(entry.name) == "singular-fractal")
            cfg = cidlab::parse_config(entry.config);
        if (seed_ptr) {
          cfg.master_seed = *seed_ptr;
          cfg.model.seed = *seed_ptr;
        }
      } else {
        cfg = load_config(config_path, seed_ptr);
      }
      return run_experiment(cfg, out_dir, jobs);
    }
    if (rep->parsed()) {
      const auto rows = cidlab::build_report(manifests);
      std::fputs(cidlab::render_table(rows).c_str(), stdout);
      std::filesystem::create_directories(out_dir);
      cidlab::write_report_csv(out_dir + "/report.csv", rows);
      bool ok = true;
      for (const auto& r : rows) ok &= r.complete && r.match;
      return ok ? 0 : 1;
    }
    if (suite->parsed()) {
      const auto result = cidlab::run_suite(out_dir, jobs, seed_ptr);
      std::fputs(result.table.c_str(), stdout);
      std::printf("suite: %s\n",
                  result.all_match ? "all expected verdicts matched"
                                   : "verdict mismatch");
      return result.all_match ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
