#pragma once

#include <json.hpp>

#include "cidlab/common.hpp"
#include "cidlab/grid_density.hpp"
#include "cidlab/mixed_measure.hpp"

// JSON encoding of measures. Doubles go through nlohmann's shortest
// round-trip representation, so parse(dump(m)) reproduces every value
// bit-for-bit; the round-trip tests assert exactly that.

namespace cidlab {

inline nlohmann::json to_json(const GridDensity& d) {
  return nlohmann::json{{"lo", d.lo()},
                        {"hi", d.hi()},
                        {"step", d.step()},
                        {"values", d.values()}};
}

inline GridDensity grid_density_from_json(const nlohmann::json& j) {
  return GridDensity(j.at("lo").get<double>(), j.at("step").get<double>(),
                     j.at("values").get<std::vector<double>>());
}

inline nlohmann::json to_json(const MixedMeasure& m) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const Atom& a : m.atoms())
    atoms.push_back(nlohmann::json::array({a.location, a.mass}));
  nlohmann::json j{
      {"domain",
       m.domain() == DomainKind::real_line ? "real-line" : "finite-set"},
      {"atoms", std::move(atoms)}};
  j["grid"] = m.density() ? to_json(*m.density()) : nlohmann::json();
  return j;
}

inline MixedMeasure measure_from_json(const nlohmann::json& j) {
  const std::string domain = j.at("domain").get<std::string>();
  if (domain != "real-line" && domain != "finite-set")
    throw error("invalid measure json: unknown domain");
  std::vector<Atom> atoms;
  for (const auto& e : j.at("atoms"))
    atoms.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  std::optional<GridDensity> density;
  if (!j.at("grid").is_null()) density = grid_density_from_json(j.at("grid"));
  return MixedMeasure(
      domain == "real-line" ? DomainKind::real_line : DomainKind::finite_set,
      std::move(atoms), std::move(density));
}

}  // namespace cidlab
