#pragma once

// Aggregates finished runs into one row per (experiment, diagnostic). Rows
// carry the claim tag used throughout the suite: T1 for predictive-vs-
// directing total variation (and the underlying martingale identity), T2 for
// the atom and empirical gaps, T3 for density-power boundedness and the
// maximal inequality, Ex3 for the singular construction.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cidlab/experiment.hpp"
#include "json.hpp"

namespace cidlab {

struct ReportRow {
  std::string experiment;
  std::string diagnostic;
  std::string claim;
  std::size_t replicates = 0;
  double final_value = 0.0;
  double trend = 0.0;
  std::string verdict;
  std::string expected;
  bool match = false;
  bool complete = false;
};

inline std::string claim_tag(const std::string& diagnostic) {
  if (diagnostic == "tv" || diagnostic == "martingale") return "T1";
  if (diagnostic == "atom_gap" || diagnostic == "empirical_gap") return "T2";
  if (diagnostic == "lp" || diagnostic == "doob") return "T3";
  return "Ex3";
}

inline std::vector<ReportRow> build_report(
    const std::vector<std::string>& manifest_paths) {
  std::vector<ReportRow> rows;
  for (const auto& mp : manifest_paths) {
    nlohmann::json man;
    {
      std::ifstream in(mp);
      if (!in) {
        ReportRow row;
        row.experiment = mp;
        row.diagnostic = "(manifest missing)";
        rows.push_back(row);
        continue;
      }
      in >> man;
    }
    const std::string experiment = man.value("experiment", "");
    const std::string gate = man.value("gate", "all_pass");
    const std::string aggregate = man.value("aggregate_verdict", "");

    struct Bucket {
      std::vector<double> finals, trends;
      bool all_pass = true;
      bool complete = true;
      std::string expected = "pass";
    };
    std::map<std::string, Bucket> buckets;
    std::vector<std::string> order;
    for (const auto& f : man.value("files", std::vector<std::string>{})) {
      if (f.size() < 5 || f.substr(f.size() - 5) != ".json") continue;
      nlohmann::json cell;
      std::ifstream in(f);
      std::string diag;
      bool readable = static_cast<bool>(in);
      if (readable) {
        in >> cell;
        diag = cell.value("diagnostic", "");
      } else {
        // recover the diagnostic name from <id>.r<rep>.<diag>.json
        const auto b = f.rfind('.', f.size() - 6);
        diag = b == std::string::npos ? f : f.substr(b + 1, f.size() - 6 - b);
      }
      if (buckets.find(diag) == buckets.end()) order.push_back(diag);
      Bucket& bucket = buckets[diag];
      if (!readable) {
        bucket.complete = false;
        continue;
      }
      bucket.finals.push_back(cell.value("final", 0.0));
      bucket.trends.push_back(cell.value("trend", 0.0));
      bucket.all_pass &= cell.value("verdict", "") == "pass";
      bucket.expected = cell.value("expected", "pass");
    }
    if (!man.value("errors", std::vector<std::string>{}).empty())
      for (auto& [diag, bucket] : buckets) bucket.complete = false;

    for (const auto& diag : order) {
      Bucket& bucket = buckets[diag];
      ReportRow row;
      row.experiment = experiment;
      row.diagnostic = diag;
      row.claim = claim_tag(diag);
      row.replicates = bucket.finals.size();
      row.final_value =
          bucket.finals.empty() ? 0.0 : detail::median_of(bucket.finals);
      row.trend =
          bucket.trends.empty() ? 0.0 : detail::median_of(bucket.trends);
      row.verdict = gate == "median_final"
                        ? aggregate
                        : (bucket.all_pass ? "pass" : "fail");
      row.expected = bucket.expected;
      row.match = bucket.complete && row.verdict == row.expected;
      row.complete = bucket.complete;
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::string render_table(const std::vector<ReportRow>& rows) {
  const std::vector<std::string> header{"experiment", "diagnostic", "claim",
                                        "reps",       "final",      "trend",
                                        "verdict",    "expected",   "status"};
  std::vector<std::vector<std::string>> body;
  char buf[64];
  for (const auto& r : rows) {
    std::vector<std::string> line;
    line.push_back(r.experiment);
    line.push_back(r.diagnostic);
    line.push_back(r.claim);
    line.push_back(std::to_string(r.replicates));
    std::snprintf(buf, sizeof buf, "%.6g", r.final_value);
    line.push_back(buf);
    std::snprintf(buf, sizeof buf, "%.3f", r.trend);
    line.push_back(buf);
    line.push_back(r.verdict);
    line.push_back(r.expected);
    line.push_back(r.complete ? (r.match ? "ok" : "MISMATCH") : "incomplete");
    body.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& line : body)
    for (std::size_t c = 0; c < line.size(); ++c)
      if (line[c].size() > width[c]) width[c] = line[c].size();

  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      out << line[c];
      if (c + 1 < line.size())
        out << std::string(width[c] - line[c].size() + 2, ' ');
    }
    out << "\n";
  };
  emit(header);
  for (const auto& line : body) emit(line);
  return out.str();
}

inline void write_report_csv(const std::string& path,
                             const std::vector<ReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw error("cannot write file: " + path);
  out << "experiment,diagnostic,claim,replicates,final,trend,verdict,expected,"
         "match,status\n";
  for (const auto& r : rows)
    out << r.experiment << "," << r.diagnostic << "," << r.claim << ","
        << r.replicates << "," << detail::format_real(r.final_value) << ","
        << detail::format_real(r.trend) << "," << r.verdict << ","
        << r.expected << "," << (r.match ? "true" : "false") << ","
        << (r.complete ? "complete" : "incomplete") << "\n";
}

}  // namespace cidlab
