#pragma once

// The shipped experiment battery. Each config is an ordinary experiment
// file embedded as text, so `suite` behaves exactly like running `diagnose`
// over these configs one at a time; expectations are declared per experiment
// and the suite as a whole succeeds only when every aggregate verdict lands
// on its declared side, including the two experiments that are supposed to
// fail their diagnostics.

#include <string>
#include <vector>

#include "cidlab/experiment.hpp"
#include "cidlab/report.hpp"

namespace cidlab {

struct SuiteEntry {
  const char* name;
  const char* config;
};

inline const std::vector<SuiteEntry>& suite_entries() {
  static const std::vector<SuiteEntry> entries{
      {"polya-tv", R"(
[experiment]
id = polya-tv
replicates = 2
master_seed = 20260814
length = 10000
expected = pass
[model]
tag = polya
weights = 1 1
[diagnostic tv]
[diagnostic atom_gap]
)"},
      {"polya-martingale", R"(
[experiment]
id = polya-martingale
replicates = 2
master_seed = 20260814
length = 10
expected = pass
[model]
tag = polya
weights = 1 1
[diagnostic martingale]
targets = 0
history = 3
)"},
      {"gauss-conj-tv", R"(
[experiment]
id = gauss-conj-tv
replicates = 100
master_seed = 20260814
length = 1000
expected = pass
gate = median_final
gate_threshold = 0.02
gate_trend_share = 0.95
[model]
tag = gauss-conj
[diagnostic tv]
)"},
      {"gauss-conj-gap", R"(
[experiment]
id = gauss-conj-gap
replicates = 2
master_seed = 20260814
length = 10000
expected = pass
[model]
tag = gauss-conj
[diagnostic empirical_gap]
[diagnostic atom_gap]
)"},
      {"gauss-cid-tv", R"(
[experiment]
id = gauss-cid-tv
replicates = 2
master_seed = 20260814
length = 300
expected = fail
[model]
tag = gauss-cid
rule = geometric
rho = 0.5
[diagnostic tv]
[diagnostic atom_gap]
)"},
      {"gauss-conj-lp", R"(
[experiment]
id = gauss-conj-lp
replicates = 2
master_seed = 20260814
length = 1000
expected = pass
[model]
tag = gauss-conj
[diagnostic lp]
p = 2
lo = -3
hi = 3
)"},
      {"gauss-cid-lp", R"(
[experiment]
id = gauss-cid-lp
replicates = 2
master_seed = 20260814
length = 1000
expected = fail
[model]
tag = gauss-cid
rule = inverse-square
c = 0.5
[diagnostic lp]
p = 2
center = directing
half_width = 3
)"},
      {"martingale-conj", R"(
[experiment]
id = martingale-conj
replicates = 2
master_seed = 20260814
length = 10
expected = pass
[model]
tag = gauss-conj
[diagnostic martingale]
targets = 0 1
trials = 10000
history = 0
)"},
      {"martingale-cid", R"(
[experiment]
id = martingale-cid
replicates = 2
master_seed = 20260814
length = 10
expected = pass
[model]
tag = gauss-cid
rule = geometric
rho = 0.5
[diagnostic martingale]
targets = 0 1
trials = 10000
history = 0
)"},
      {"doob-conj", R"(
[experiment]
id = doob-conj
replicates = 1
master_seed = 20260814
length = 1
expected = pass
[model]
tag = gauss-conj
[diagnostic doob]
p = 2
lo = -3
hi = 3
n_max = 100
trials = 200
)"},
      {"doob-cid", R"(
[experiment]
id = doob-cid
replicates = 1
master_seed = 20260814
length = 1
expected = pass
[model]
tag = gauss-cid
rule = inverse-square
c = 0.5
[diagnostic doob]
p = 2
lo = -6
hi = 6
n_max = 100
trials = 200
)"},
      {"singular-fd", R"(
[experiment]
id = singular-fd
replicates = 2
master_seed = 20260814
length = 1
expected = pass
[model]
tag = singular
depth = 10
[diagnostic fd_mass]
tolerance = 1e-3
)"},
      {"singular-identity", R"(
[experiment]
id = singular-identity
replicates = 1
master_seed = 20260814
length = 1
expected = pass
[model]
tag = singular
depth = 40
[diagnostic identity]
sizes = 1 2 3
trials = 1000
)"},
      {"singular-fractal", R"(
[experiment]
id = singular-fractal
replicates = 2
master_seed = 20260814
length = 1
expected = pass
[model]
tag = singular
depth = 40
[diagnostic fractal]
depths = 5 10 15 20
mass_truncation = 13
mass_samples = 100000
)"},
  };
  return entries;
}

struct SuiteResult {
  std::vector<RunManifest> manifests;
  std::vector<ReportRow> rows;
  std::string table;
  bool all_match = false;
};

inline SuiteResult run_suite(const std::string& out_dir, std::size_t jobs = 1,
                             const std::uint64_t* seed_override = nullptr) {
  SuiteResult result;
  std::vector<std::string> manifest_paths;
  result.all_match = true;
  for (const auto& entry : suite_entries()) {
    ExperimentConfig cfg = parse_config(entry.config);
    if (seed_override) {
      cfg.master_seed = *seed_override;
      cfg.model.seed = *seed_override;
    }
    RunManifest man = run(cfg, out_dir, jobs);
    result.all_match &= man.expected_match;
    manifest_paths.push_back(man.manifest_path);
    result.manifests.push_back(std::move(man));
  }
  result.rows = build_report(manifest_paths);
  result.table = render_table(result.rows);
  write_report_csv(out_dir + "/report.csv", result.rows);
  std::ofstream out(out_dir + "/report.txt");
  if (!out) throw error("cannot write file: " + out_dir + "/report.txt");
  out << result.table;
  return result;
}

}  // namespace cidlab
