#include <catch2/catch_amalgamated.hpp>

#include "astrolab/env_model.hpp"
#include "astrolab/rng.hpp"

using namespace astrolab;

namespace {

const char* kSite =
    "[ambient]\n"
    "extent = 0 0 20 20\n"
    "co2_ppm = 420\n"
    "humidity_pct = 30\n"
    "[patch bed]\n"
    "region = 2 2 6 6\n"
    "layer = 3 0 1.0 0 12 8.2\n"
    "layer = 6 0 5.0 0 14 8.4\n"
    "[rock r1]\n"
    "position = 10 10\n"
    "color = 140 130 115\n"
    "layered = true\n"
    "alcohol = false\n"
    "formaldehyde_ppm = 1.2\n"
    "fossilized = true\n";

}  // namespace

TEST_CASE("site loads with ambient, patch, and rock", "[env]") {
  const SiteModel site = load_site(kSite);
  CHECK(site.extent.x1 == 20.0);
  CHECK(site.ambient.co2_ppm == 420.0);
  REQUIRE(site.patches.size() == 1);
  CHECK(site.patches[0].name == "bed");
  REQUIRE(site.patches[0].layers.size() == 2);
  REQUIRE(site.rocks.size() == 1);
  CHECK(site.rocks[0].layered);
  CHECK(site.rocks[0].fossilized);
}

TEST_CASE("soil_at picks the deepest layer at or above the query depth",
          "[env]") {
  const SiteModel site = load_site(kSite);
  const Vec2 in{4, 4};
  CHECK(soil_at(site, in, 3.0).carbohydrate_mg_per_g == 1.0);
  CHECK(soil_at(site, in, 5.9).carbohydrate_mg_per_g == 1.0);
  CHECK(soil_at(site, in, 6.0).carbohydrate_mg_per_g == 5.0);
  CHECK(soil_at(site, in, 8.0).carbohydrate_mg_per_g == 5.0);
  // above the shallowest layer: clamps to it
  CHECK(soil_at(site, in, 0.0).carbohydrate_mg_per_g == 1.0);
}

TEST_CASE("soil outside every patch is barren with neutral ph", "[env]") {
  const SiteModel site = load_site(kSite);
  const SoilComposition barren = soil_at(site, {15, 15}, 5.0);
  CHECK(barren.protein_mg_per_g == 0.0);
  CHECK(barren.carbohydrate_mg_per_g == 0.0);
  CHECK(barren.moisture_pct == 0.0);
  CHECK(barren.ph == 7.0);
}

TEST_CASE("queries outside the extent are rejected", "[env]") {
  const SiteModel site = load_site(kSite);
  CHECK_THROWS_AS(soil_at(site, {-1, 5}, 3.0), OutOfExtentError);
  CHECK_THROWS_AS(gas_at(site, {21, 5}), OutOfExtentError);
  CHECK(gas_at(site, {5, 5}).humidity_pct == 30.0);
}

TEST_CASE("rock lookup by id", "[env]") {
  const SiteModel site = load_site(kSite);
  CHECK(rock_at(site, "r1").surface_formaldehyde_ppm == 1.2);
  CHECK_THROWS_AS(rock_at(site, "nope"), UnknownRockError);
}

TEST_CASE("validation failures name the offending key", "[env]") {
  const auto key_of = [](const std::string& text) {
    try {
      load_site(text);
    } catch (const ValidationError& e) {
      return e.key();
    }
    return std::string{};
  };
  const std::string ambient =
      "[ambient]\nextent = 0 0 20 20\n";
  CHECK(key_of(ambient + "[patch p]\nregion = 2 2 6 6\n"
                         "layer = 3 0 0 0 10 7\nlayer = 3 0 0 0 10 7\n") ==
        "layer");  // depths not strictly increasing
  CHECK(key_of(ambient + "[patch p]\nregion = 2 2 6 6\n") == "layer");
  CHECK(key_of(ambient + "[patch p]\nregion = 18 18 25 25\n"
                         "layer = 3 0 0 0 10 7\n") == "region");
  CHECK(key_of(ambient +
               "[patch a]\nregion = 2 2 6 6\nlayer = 3 0 0 0 10 7\n"
               "[patch b]\nregion = 5 5 9 9\nlayer = 3 0 0 0 10 7\n") ==
        "region");  // overlap
  CHECK(key_of(ambient + "[patch p]\nregion = 2 2 6 6\n"
                         "layer = 3 0 0 0 150 7\n") == "moisture_pct");
  CHECK(key_of(ambient + "[patch p]\nregion = 2 2 6 6\n"
                         "layer = 3 0 0 0 10 15\n") == "ph");
  CHECK(key_of(ambient + "[rock x]\nposition = 30 30\n") == "position");
  CHECK(key_of(ambient + "[rock x]\nposition = 5 5\n"
                         "[rock x]\nposition = 6 6\n") == "rock");
  CHECK(key_of("[patch p]\nregion = 2 2 6 6\nlayer = 3 0 0 0 10 7\n") ==
        "extent");  // no ambient section
}

TEST_CASE("adjacent patches sharing an edge do not overlap", "[env]") {
  const SiteModel site = load_site(
      "[ambient]\nextent = 0 0 20 20\n"
      "[patch a]\nregion = 2 2 6 6\nlayer = 3 0 0 0 10 7\n"
      "[patch b]\nregion = 6 2 10 6\nlayer = 3 1 0 0 10 7\n");
  REQUIRE(site.patches.size() == 2);
  // the shared edge x=6 belongs to whichever patch matches first
  CHECK_NOTHROW(soil_at(site, {6, 4}, 3.0));
}

TEST_CASE("serialize then load is identity on the model", "[env]") {
  const SiteModel site = load_site(kSite);
  const SiteModel again = load_site(serialize_site(site));
  CHECK(site == again);
}

TEST_CASE("serialize/load identity over randomized sites", "[env]") {
  NoiseRng rng(20240817);
  for (int trial = 0; trial < 200; ++trial) {
    SiteModel site;
    site.name = "site";
    site.extent = {0, 0, 100, 100};
    site.ambient.co2_ppm = rng.unit() * 1000;
    site.ambient.humidity_pct = rng.unit() * 100;
    const int n_patches = 1 + static_cast<int>(rng.unit() * 3);
    for (int p = 0; p < n_patches; ++p) {
      SoilPatch patch;
      patch.name = "p" + std::to_string(p);
      patch.region = {p * 20.0, 0, p * 20.0 + 10 + rng.unit() * 5,
                      10 + rng.unit() * 5};
      double depth = 0;
      const int n_layers = 1 + static_cast<int>(rng.unit() * 4);
      for (int l = 0; l < n_layers; ++l) {
        depth += 0.5 + rng.unit() * 3;
        SoilLayer layer;
        layer.depth_cm = depth;
        layer.composition = {rng.unit() * 8, rng.unit() * 8, rng.unit() * 8,
                             rng.unit() * 100, rng.unit() * 14};
        patch.layers.push_back(layer);
      }
      site.patches.push_back(patch);
    }
    RockProperties rock;
    rock.id = "r0";
    rock.position = {50 + rng.unit() * 40, 50 + rng.unit() * 40};
    for (int i = 0; i < 3; ++i)
      rock.mean_color[i] = static_cast<int>(rng.unit() * 255);
    rock.layered = rng.unit() < 0.5;
    rock.surface_alcohol = rng.unit() < 0.5;
    rock.surface_formaldehyde_ppm = rng.unit() * 3;
    rock.fossilized = rng.unit() < 0.5;
    site.rocks.push_back(rock);

    const SiteModel again = load_site(serialize_site(site));
    REQUIRE(site == again);
  }
}
