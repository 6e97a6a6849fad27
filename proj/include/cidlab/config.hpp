#pragma once

// Experiment configs are sectioned key = value text: one [experiment]
// section, one [model] section, and any number of [diagnostic <name>]
// sections. Lines starting with # or ; are comments. The parser resolves
// defaults eagerly so a parsed config is self-contained, and the canonical
// serialization (stable section and key order) is what gets hashed into the
// run manifest: two configs hash alike exactly when every effective field
// agrees.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cidlab/diagnostics.hpp"
#include "cidlab/models.hpp"
#include "cidlab/series.hpp"

namespace cidlab {

struct DiagnosticConfig {
  std::string name;
  std::vector<std::pair<std::string, std::string>> kv;

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : kv)
      if (k == key) return &v;
    return nullptr;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
  }
};

struct ExperimentConfig {
  std::string id;
  std::size_t replicates = 1;
  std::uint64_t master_seed = 1;
  std::size_t length = 1000;
  std::vector<std::size_t> checkpoints;
  Verdict expected = Verdict::pass;
  std::string gate = "all_pass";
  double gate_threshold = calib::kTvMedianFinal;
  double gate_trend_share = calib::kTrendMinShare;
  ModelSpec model;
  std::vector<DiagnosticConfig> diagnostics;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::uint64_t parse_u64(const std::string& text, const std::string& field) {
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(text, &used);
  } catch (...) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text[0] == '-')
    throw error("config field " + field + " must be an unsigned integer");
  return out;
}

inline double parse_real(const std::string& text, const std::string& field) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(text, &used);
  } catch (...) {
    used = 0;
  }
  if (used != text.size() || text.empty())
    throw error("config field " + field + " must be a number");
  return out;
}

inline std::vector<std::string> split_ws(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::vector<double> parse_reals(const std::string& text,
                                       const std::string& field) {
  std::vector<double> out;
  for (const auto& tok : split_ws(text)) out.push_back(parse_real(tok, field));
  if (out.empty()) throw error("config field " + field + " must not be empty");
  return out;
}

inline std::vector<std::size_t> parse_sizes(const std::string& text,
                                            const std::string& field) {
  std::vector<std::size_t> out;
  for (const auto& tok : split_ws(text))
    out.push_back(static_cast<std::size_t>(parse_u64(tok, field)));
  if (out.empty()) throw error("config field " + field + " must not be empty");
  return out;
}

inline const std::vector<std::string>& known_diagnostics() {
  static const std::vector<std::string> names{
      "tv",       "atom_gap", "empirical_gap", "lp",     "martingale",
      "doob",     "fd_mass",  "identity",      "fractal"};
  return names;
}

inline const std::vector<std::string>& known_keys(const std::string& diag) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>>
      table{
          {"tv", {"final_threshold"}},
          {"atom_gap", {"threshold"}},
          {"empirical_gap", {"threshold"}},
          {"lp", {"p", "lo", "hi", "center", "half_width"}},
          {"martingale", {"targets", "trials", "history"}},
          {"doob", {"p", "lo", "hi", "n_max", "trials"}},
          {"fd_mass", {"tolerance"}},
          {"identity", {"sizes", "trials"}},
          {"fractal", {"depths", "mass_truncation", "mass_samples"}},
      };
  for (const auto& [name, keys] : table)
    if (name == diag) return keys;
  throw error("unknown diagnostic: " + diag);
}

inline void apply_model_key(ModelSpec& m, const std::string& key,
                            const std::string& value) {
  const std::string field = "model." + key;
  if (key == "tag") {
    if (value == "polya") m.tag = ModelTag::polya;
    else if (value == "gauss-conj") m.tag = ModelTag::gauss_conj;
    else if (value == "gauss-cid") m.tag = ModelTag::gauss_cid;
    else if (value == "singular") m.tag = ModelTag::singular;
    else throw error("config field model.tag has unknown value: " + value);
  } else if (key == "weights") {
    m.polya.weights = parse_reals(value, field);
  } else if (key == "m0") {
    m.conj.m0 = parse_real(value, field);
  } else if (key == "tau0_sq") {
    m.conj.tau0_sq = parse_real(value, field);
  } else if (key == "sigma_sq") {
    m.conj.sigma_sq = parse_real(value, field);
  } else if (key == "rule") {
    if (value == "geometric") m.cid.rule = BRule::geometric;
    else if (value == "inverse-square") m.cid.rule = BRule::inverse_square;
    else throw error("config field model.rule has unknown value: " + value);
  } else if (key == "rho") {
    m.cid.rho = parse_real(value, field);
  } else if (key == "c") {
    m.cid.c = parse_real(value, field);
  } else if (key == "depth") {
    m.singular.depth = static_cast<int>(parse_u64(value, field));
  } else {
    throw error("unknown config key: model." + key);
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  bool saw_experiment = false, saw_model = false, saw_id = false;
  bool saw_checkpoints = false;
  std::string section;          // "experiment", "model", or "diagnostic"
  DiagnosticConfig* diag = nullptr;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const auto hash = raw.find_first_of("#;");
    std::string line = detail::trim(hash == std::string::npos
                                        ? raw
                                        : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw error("unterminated config section: " + line);
      const std::string name = detail::trim(line.substr(1, line.size() - 2));
      if (name == "experiment") {
        section = "experiment";
        saw_experiment = true;
      } else if (name == "model") {
        section = "model";
        saw_model = true;
      } else if (name.rfind("diagnostic", 0) == 0) {
        const std::string dn = detail::trim(name.substr(10));
        if (dn.empty()) throw error("config diagnostic section needs a name");
        detail::known_keys(dn);  // rejects unknown diagnostics
        for (const auto& d : cfg.diagnostics)
          if (d.name == dn) throw error("duplicate diagnostic: " + dn);
        cfg.diagnostics.push_back({dn, {}});
        diag = &cfg.diagnostics.back();
        section = "diagnostic";
      } else {
        throw error("unknown config section: " + name);
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw error("config line is not key = value: " + line);
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw error("config line is not key = value: " + line);
    if (section.empty())
      throw error("config key outside any section: " + key);

    if (section == "experiment") {
      if (key == "id") {
        cfg.id = value;
        saw_id = !value.empty();
      } else if (key == "replicates") {
        cfg.replicates = static_cast<std::size_t>(
            detail::parse_u64(value, "experiment.replicates"));
      } else if (key == "master_seed") {
        cfg.master_seed = detail::parse_u64(value, "experiment.master_seed");
      } else if (key == "length") {
        cfg.length =
            static_cast<std::size_t>(detail::parse_u64(value, "experiment.length"));
      } else if (key == "checkpoints") {
        cfg.checkpoints = detail::parse_sizes(value, "experiment.checkpoints");
        saw_checkpoints = true;
      } else if (key == "expected") {
        cfg.expected = verdict_from_name(value);
      } else if (key == "gate") {
        if (value != "all_pass" && value != "median_final")
          throw error("config field experiment.gate has unknown value: " + value);
        cfg.gate = value;
      } else if (key == "gate_threshold") {
        cfg.gate_threshold = detail::parse_real(value, "experiment.gate_threshold");
      } else if (key == "gate_trend_share") {
        cfg.gate_trend_share =
            detail::parse_real(value, "experiment.gate_trend_share");
      } else {
        throw error("unknown config key: experiment." + key);
      }
    } else if (section == "model") {
      detail::apply_model_key(cfg.model, key, value);
    } else {
      for (const auto& [k, v] : diag->kv)
        if (k == key)
          throw error("duplicate config key: diagnostic " + diag->name + "." + key);
      bool ok = false;
      for (const auto& k : detail::known_keys(diag->name)) ok |= k == key;
      if (!ok)
        throw error("unknown config key: diagnostic " + diag->name + "." + key);
      diag->kv.emplace_back(key, value);
    }
  }

  if (!saw_experiment) throw error("config section experiment is required");
  if (!saw_id) throw error("config field experiment.id is required");
  if (!saw_model) throw error("config section model is required");
  if (cfg.replicates == 0)
    throw error("config field experiment.replicates must be an unsigned integer");
  if (cfg.length == 0)
    throw error("config field experiment.length must be an unsigned integer");
  if (cfg.diagnostics.empty())
    throw error("config needs at least one diagnostic section");
  if (cfg.gate == "median_final" && cfg.diagnostics.size() != 1)
    throw error("config gate median_final requires a single diagnostic");
  if (!saw_checkpoints) cfg.checkpoints = default_checkpoints(cfg.length);
  for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
    const bool bad = cfg.checkpoints[i] == 0 ||
                     (i > 0 && cfg.checkpoints[i] <= cfg.checkpoints[i - 1]);
    if (bad) throw error("checkpoints must be positive and increasing");
    if (cfg.checkpoints[i] > cfg.length)
      throw error("checkpoint beyond trajectory length");
  }
  cfg.model.seed = cfg.master_seed;
  validate(cfg.model);
  return cfg;
}

// Stable round-trip of the effective fields. This is the hashing input, so
// every field that can change a result must appear here.
inline std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  char buf[64];
  auto real = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "[experiment]\n";
  out << "id = " << cfg.id << "\n";
  out << "replicates = " << cfg.replicates << "\n";
  out << "master_seed = " << cfg.master_seed << "\n";
  out << "length = " << cfg.length << "\n";
  out << "checkpoints =";
  for (auto c : cfg.checkpoints) out << " " << c;
  out << "\n";
  out << "expected = " << verdict_name(cfg.expected) << "\n";
  out << "gate = " << cfg.gate << "\n";
  if (cfg.gate == "median_final") {
    out << "gate_threshold = " << real(cfg.gate_threshold) << "\n";
    out << "gate_trend_share = " << real(cfg.gate_trend_share) << "\n";
  }
  out << "[model]\n";
  switch (cfg.model.tag) {
    case ModelTag::polya:
      out << "tag = polya\nweights =";
      for (double w : cfg.model.polya.weights) out << " " << real(w);
      out << "\n";
      break;
    case ModelTag::gauss_conj:
      out << "tag = gauss-conj\n";
      out << "m0 = " << real(cfg.model.conj.m0) << "\n";
      out << "tau0_sq = " << real(cfg.model.conj.tau0_sq) << "\n";
      out << "sigma_sq = " << real(cfg.model.conj.sigma_sq) << "\n";
      break;
    case ModelTag::gauss_cid:
      out << "tag = gauss-cid\n";
      if (cfg.model.cid.rule == BRule::geometric)
        out << "rule = geometric\nrho = " << real(cfg.model.cid.rho) << "\n";
      else
        out << "rule = inverse-square\nc = " << real(cfg.model.cid.c) << "\n";
      break;
    case ModelTag::singular:
      out << "tag = singular\ndepth = " << cfg.model.singular.depth << "\n";
      break;
  }
  for (const auto& d : cfg.diagnostics) {
    out << "[diagnostic " << d.name << "]\n";
    auto sorted = d.kv;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [k, v] : sorted) out << k << " = " << v << "\n";
  }
  return out.str();
}

// FNV-1a, the manifest's config fingerprint.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cidlab
