#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cidlab/fractal.hpp"
#include "cidlab/models.hpp"
#include "oracle.hpp"

using namespace cidlab;

namespace {

singular::WeightSequence weights_for_seed(std::uint64_t seed, int depth) {
  Rng rng(substream_key(9000 + depth, seed), 0);
  return singular::sample_weights(depth, rng);
}

}  // namespace

TEST_CASE("compensated sums track tiny differences", "[fractal]") {
  // adding and removing a value far below one ulp must round-trip
  dd::Real a{1.0, 0.0};
  const double tiny = 1e-25;
  const auto b = dd::add(a, tiny);
  REQUIRE(b.hi == 1.0);
  REQUIRE(b.lo == tiny);
  const auto diff = dd::sub(b, a);
  REQUIRE(dd::value(diff) == tiny);
  REQUIRE(dd::less(a, b));
  REQUIRE_FALSE(dd::less(b, a));
}

TEST_CASE("tail ratios certify divergence on every draw", "[fractal]") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto w = weights_for_seed(seed, 40);
    const auto series = ratio_curve(w);
    REQUIRE(series.verdict == Verdict::pass);
    REQUIRE(series.points.size() == 39);
    for (const auto& p : series.points) REQUIRE(p.value > p.n);
    // the deepest checked level is the tightest instance of the sure bound
    REQUIRE(series.points.back().n == 39.0);
  }
  Rng rng(1, 0);
  const auto shallow = singular::sample_weights(2, rng);
  REQUIRE_THROWS_WITH(ratio_curve(shallow), "ratio curve needs depth at least 3");
}

TEST_CASE("shallow covers have the expected shape", "[fractal]") {
  const auto w = weights_for_seed(4, 40);

  const auto root = cover_at_depth(w, 0);
  REQUIRE(root.interval_count == 1);
  const double r0 = singular::tail_sum(w, 0).bound_inclusive;
  REQUIRE(root.max_interval_length == Catch::Approx(2.0 * r0).margin(1e-18));
  REQUIRE(root.dim_estimate == 0.0);

  const auto one = cover_at_depth(w, 1);
  REQUIRE(one.interval_count <= 2);
  REQUIRE(one.max_interval_length > 0.0);
  REQUIRE(one.dim_estimate >= 0.0);

  const auto two = cover_at_depth(w, 2);
  REQUIRE(two.interval_count <= 4);
  if (two.max_interval_length < 1.0)
    REQUIRE(two.dim_estimate ==
            Catch::Approx(std::log(static_cast<double>(two.interval_count)) /
                          std::log(1.0 / two.max_interval_length))
                .margin(1e-12));
}

TEST_CASE("interval counts split at most in two per level", "[fractal]") {
  const auto w = weights_for_seed(12, 20);
  auto prev = cover_at_depth(w, 0);
  for (int m = 1; m <= 16; ++m) {
    const auto cur = cover_at_depth(w, m);
    REQUIRE(cur.interval_count <= 2 * prev.interval_count);
    REQUIRE(cur.interval_count <= (std::size_t{1} << m));
    prev = cur;
  }
}

TEST_CASE("dimension estimates shrink with depth", "[fractal]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto w = weights_for_seed(seed, 20);
    const auto d5 = cover_at_depth(w, 5);
    const auto d10 = cover_at_depth(w, 10);
    const auto d15 = cover_at_depth(w, 15);
    const auto d20 = cover_at_depth(w, 20);

    // below the resolution knee every pattern is separated
    REQUIRE(d5.interval_count == 32);
    REQUIRE(d10.interval_count == 1024);
    // past it, patterns sharing the first 13 digits merge, surely
    REQUIRE(d15.interval_count == 8192);
    REQUIRE(d20.interval_count == 8192);

    REQUIRE(d5.dim_estimate > d10.dim_estimate);
    REQUIRE(d10.dim_estimate > d15.dim_estimate);
    REQUIRE(d15.dim_estimate > d20.dim_estimate);
    REQUIRE(d20.max_interval_length < d15.max_interval_length);

    REQUIRE(d20.dim_estimate > 0.2);
    REQUIRE(d20.dim_estimate <= 0.25);
  }
}

TEST_CASE("rescaling covers is a pure arithmetic identity", "[fractal]") {
  const auto w = weights_for_seed(3, 20);
  const auto est = cover_at_depth(w, 15);
  const auto doubled = est.rescaled(2.0);
  REQUIRE(doubled.interval_count == est.interval_count);
  REQUIRE(doubled.max_interval_length == 2.0 * est.max_interval_length);
  const double predicted =
      std::log(static_cast<double>(est.interval_count)) /
      (std::log(1.0 / est.max_interval_length) - std::log(2.0));
  REQUIRE(std::abs(doubled.dim_estimate - predicted) <= 1e-9);
  const auto same = est.rescaled(1.0);
  REQUIRE(same.dim_estimate == est.dim_estimate);
}

TEST_CASE("covers carry the full directing mass", "[fractal]") {
  const auto w = weights_for_seed(7, 40);
  for (int m_prime : {0, 5, 13}) {
    auto rng = purpose_rng(7, 0, StreamPurpose::cover_mass);
    REQUIRE(cover_mass_check(w, m_prime, 100000, rng) == 1.0);
  }
  auto rng = purpose_rng(7, 1, StreamPurpose::cover_mass);
  REQUIRE(cover_mass_check(w, 5, 0, rng) == 1.0);

  // enumerated directing atoms live inside the cover as well
  const auto spec = [] {
    ModelSpec s;
    s.tag = ModelTag::singular;
    s.seed = 7;
    s.singular.depth = 10;
    return s;
  }();
  auto traj = sample_trajectory(spec, 1);
  const auto dir = directing(spec, traj);
  const auto cover = build_cover(traj.weights, 10);
  for (const auto& atom : dir.measure.atoms()) {
    bool inside = false;
    for (std::size_t i = 0; i < cover.lower.size() && !inside; ++i)
      inside = dd::value(cover.lower[i]) <= atom.location &&
               atom.location <= dd::value(cover.upper[i]);
    REQUIRE(inside);
  }
}

TEST_CASE("cover preconditions are enforced", "[fractal]") {
  const auto w = weights_for_seed(2, 10);
  REQUIRE_THROWS_WITH(cover_at_depth(w, 11),
                      "cover truncation depth out of range");
  REQUIRE_THROWS_WITH(cover_at_depth(w, -1),
                      "cover truncation depth out of range");
  const auto deep = weights_for_seed(2, 40);
  REQUIRE_THROWS_WITH(cover_at_depth(deep, 26),
                      "cover truncation depth out of range");
}
