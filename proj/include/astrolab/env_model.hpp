#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "astrolab/geometry.hpp"
#include "astrolab/text_config.hpp"

namespace astrolab {

/// Ground-truth analyte concentrations and soil state at one layer.
struct SoilComposition {
  double protein_mg_per_g = 0.0;
  double carbohydrate_mg_per_g = 0.0;
  double ammonia_mg_per_g = 0.0;
  double moisture_pct = 0.0;
  double ph = 7.0;

  friend bool operator==(const SoilComposition&,
                         const SoilComposition&) = default;
};

struct SoilLayer {
  double depth_cm = 0.0;
  SoilComposition composition;

  friend bool operator==(const SoilLayer&, const SoilLayer&) = default;
};

struct SoilPatch {
  std::string name;
  Rect region;
  std::vector<SoilLayer> layers;  // depths strictly increasing

  friend bool operator==(const SoilPatch&, const SoilPatch&) = default;
};

struct RockProperties {
  std::string id;
  Vec2 position;
  int mean_color[3] = {0, 0, 0};
  bool layered = false;
  bool surface_alcohol = false;
  double surface_formaldehyde_ppm = 0.0;
  // Hidden ground truth: never exposed through sensor captures.
  bool fossilized = false;

  friend bool operator==(const RockProperties&,
                         const RockProperties&) = default;
};

struct AmbientConditions {
  double co2_ppm = 0.0;
  double humidity_pct = 0.0;

  friend bool operator==(const AmbientConditions&,
                         const AmbientConditions&) = default;
};

/// Immutable after load; all queries are pure reads.
struct SiteModel {
  std::string name;
  Rect extent;
  std::vector<SoilPatch> patches;
  std::vector<RockProperties> rocks;
  AmbientConditions ambient;

  friend bool operator==(const SiteModel&, const SiteModel&) = default;
};

class OutOfExtentError : public std::runtime_error {
 public:
  OutOfExtentError(Vec2 p)
      : std::runtime_error("position (" + std::to_string(p.x) + ", " +
                           std::to_string(p.y) + ") outside site extent") {}
};

class UnknownRockError : public std::runtime_error {
 public:
  explicit UnknownRockError(const std::string& id)
      : std::runtime_error("unknown rock id: " + id) {}
};

namespace detail {

inline Rect parse_rect(const ConfigEntry& e) {
  const auto f = split_fields(e.value);
  if (f.size() != 4)
    throw ParseError(e.line, e.key + " wants 4 fields `x0 y0 x1 y1`");
  Rect r{parse_double(f[0], e.line), parse_double(f[1], e.line),
         parse_double(f[2], e.line), parse_double(f[3], e.line)};
  if (r.x1 < r.x0 || r.y1 < r.y0)
    throw ParseError(e.line, e.key + " corners reversed");
  return r;
}

inline void check_range(const std::string& key, double v, double lo,
                        double hi) {
  if (!(v >= lo && v <= hi))
    throw ValidationError(key, "value " + std::to_string(v) +
                                   " outside [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "]");
}

inline void check_nonneg(const std::string& key, double v) {
  if (!(v >= 0.0))
    throw ValidationError(key, "value " + std::to_string(v) + " is negative");
}

}  // namespace detail

/// Loads a site spec (see the site grammar in the README). Throws
/// ParseError with a line number for syntax problems and ValidationError
/// naming the offending key for invariant violations.
inline SiteModel load_site(const std::string& text,
                           const std::string& name = "site") {
  SiteModel site;
  site.name = name;
  bool have_ambient = false;

  for (const auto& sec : parse_sections(text)) {
    if (sec.kind == "ambient") {
      have_ambient = true;
      const auto* extent = sec.find_last("extent");
      if (!extent) throw ParseError(sec.line, "[ambient] needs `extent`");
      site.extent = detail::parse_rect(*extent);
      if (const auto* e = sec.find_last("co2_ppm"))
        site.ambient.co2_ppm = parse_double(e->value, e->line);
      if (const auto* e = sec.find_last("humidity_pct"))
        site.ambient.humidity_pct = parse_double(e->value, e->line);
      detail::check_nonneg("co2_ppm", site.ambient.co2_ppm);
      detail::check_range("humidity_pct", site.ambient.humidity_pct, 0, 100);
    } else if (sec.kind == "patch") {
      if (sec.label.empty()) throw ParseError(sec.line, "[patch] needs a name");
      SoilPatch patch;
      patch.name = sec.label;
      const auto* region = sec.find_last("region");
      if (!region) throw ParseError(sec.line, "[patch] needs `region`");
      patch.region = detail::parse_rect(*region);
      for (const auto& e : sec.entries) {
        if (e.key != "layer") continue;
        const auto f = split_fields(e.value);
        if (f.size() != 6)
          throw ParseError(
              e.line, "layer wants `DEPTH_CM protein carb ammonia moisture ph`");
        SoilLayer layer;
        layer.depth_cm = parse_double(f[0], e.line);
        layer.composition.protein_mg_per_g = parse_double(f[1], e.line);
        layer.composition.carbohydrate_mg_per_g = parse_double(f[2], e.line);
        layer.composition.ammonia_mg_per_g = parse_double(f[3], e.line);
        layer.composition.moisture_pct = parse_double(f[4], e.line);
        layer.composition.ph = parse_double(f[5], e.line);
        detail::check_nonneg("depth_cm", layer.depth_cm);
        detail::check_nonneg("protein_mg_per_g",
                             layer.composition.protein_mg_per_g);
        detail::check_nonneg("carbohydrate_mg_per_g",
                             layer.composition.carbohydrate_mg_per_g);
        detail::check_nonneg("ammonia_mg_per_g",
                             layer.composition.ammonia_mg_per_g);
        detail::check_range("moisture_pct", layer.composition.moisture_pct, 0,
                            100);
        detail::check_range("ph", layer.composition.ph, 0, 14);
        if (!patch.layers.empty() &&
            layer.depth_cm <= patch.layers.back().depth_cm)
          throw ValidationError("layer",
                                "depths must be strictly increasing in patch " +
                                    patch.name);
        patch.layers.push_back(layer);
      }
      if (patch.layers.empty())
        throw ValidationError("layer",
                              "patch " + patch.name + " has no layers");
      site.patches.push_back(std::move(patch));
    } else if (sec.kind == "rock") {
      if (sec.label.empty()) throw ParseError(sec.line, "[rock] needs a name");
      RockProperties rock;
      rock.id = sec.label;
      const auto* pos = sec.find_last("position");
      if (!pos) throw ParseError(sec.line, "[rock] needs `position`");
      {
        const auto f = split_fields(pos->value);
        if (f.size() != 2)
          throw ParseError(pos->line, "position wants `x y`");
        rock.position = {parse_double(f[0], pos->line),
                         parse_double(f[1], pos->line)};
      }
      if (const auto* e = sec.find_last("color")) {
        const auto f = split_fields(e->value);
        if (f.size() != 3) throw ParseError(e->line, "color wants `r g b`");
        for (int i = 0; i < 3; ++i) {
          const long long c = parse_int(f[i], e->line);
          if (c < 0 || c > 255)
            throw ValidationError("color", "channel " + f[i] +
                                               " outside [0, 255]");
          rock.mean_color[i] = static_cast<int>(c);
        }
      }
      if (const auto* e = sec.find_last("layered"))
        rock.layered = parse_bool(e->value, e->line);
      if (const auto* e = sec.find_last("alcohol"))
        rock.surface_alcohol = parse_bool(e->value, e->line);
      if (const auto* e = sec.find_last("formaldehyde_ppm")) {
        rock.surface_formaldehyde_ppm = parse_double(e->value, e->line);
        detail::check_nonneg("formaldehyde_ppm",
                             rock.surface_formaldehyde_ppm);
      }
      if (const auto* e = sec.find_last("fossilized"))
        rock.fossilized = parse_bool(e->value, e->line);
      site.rocks.push_back(std::move(rock));
    } else {
      throw ParseError(sec.line, "unknown section [" + sec.kind + "]");
    }
  }

  if (!have_ambient)
    throw ValidationError("extent", "site spec has no [ambient] section");
  for (const auto& p : site.patches) {
    if (!site.extent.contains(p.region))
      throw ValidationError("region",
                            "patch " + p.name + " lies outside site extent");
  }
  for (std::size_t i = 0; i < site.patches.size(); ++i)
    for (std::size_t j = i + 1; j < site.patches.size(); ++j)
      if (site.patches[i].region.overlaps(site.patches[j].region))
        throw ValidationError("region", "patches " + site.patches[i].name +
                                            " and " + site.patches[j].name +
                                            " overlap");
  for (const auto& r : site.rocks) {
    if (!site.extent.contains(r.position))
      throw ValidationError("position",
                            "rock " + r.id + " lies outside site extent");
    for (const auto& other : site.rocks)
      if (&other != &r && other.id == r.id)
        throw ValidationError("rock", "duplicate rock id " + r.id);
  }
  return site;
}

namespace detail {

inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Inverse of load_site up to formatting: load(serialize(load(text)))
/// equals load(text).
inline std::string serialize_site(const SiteModel& site) {
  using detail::fmt_num;
  std::string out;
  out += "[ambient]\n";
  out += "extent = " + fmt_num(site.extent.x0) + " " + fmt_num(site.extent.y0) +
         " " + fmt_num(site.extent.x1) + " " + fmt_num(site.extent.y1) + "\n";
  out += "co2_ppm = " + fmt_num(site.ambient.co2_ppm) + "\n";
  out += "humidity_pct = " + fmt_num(site.ambient.humidity_pct) + "\n";
  for (const auto& p : site.patches) {
    out += "\n[patch " + p.name + "]\n";
    out += "region = " + fmt_num(p.region.x0) + " " + fmt_num(p.region.y0) +
           " " + fmt_num(p.region.x1) + " " + fmt_num(p.region.y1) + "\n";
    for (const auto& l : p.layers)
      out += "layer = " + fmt_num(l.depth_cm) + " " +
             fmt_num(l.composition.protein_mg_per_g) + " " +
             fmt_num(l.composition.carbohydrate_mg_per_g) + " " +
             fmt_num(l.composition.ammonia_mg_per_g) + " " +
             fmt_num(l.composition.moisture_pct) + " " +
             fmt_num(l.composition.ph) + "\n";
  }
  for (const auto& r : site.rocks) {
    out += "\n[rock " + r.id + "]\n";
    out += "position = " + fmt_num(r.position.x) + " " +
           fmt_num(r.position.y) + "\n";
    out += "color = " + std::to_string(r.mean_color[0]) + " " +
           std::to_string(r.mean_color[1]) + " " +
           std::to_string(r.mean_color[2]) + "\n";
    out += std::string("layered = ") + (r.layered ? "true" : "false") + "\n";
    out += std::string("alcohol = ") +
           (r.surface_alcohol ? "true" : "false") + "\n";
    out += "formaldehyde_ppm = " + fmt_num(r.surface_formaldehyde_ppm) + "\n";
    out += std::string("fossilized = ") +
           (r.fossilized ? "true" : "false") + "\n";
  }
  return out;
}

/// Composition of the deepest layer whose depth <= depth_cm in the patch
/// containing `position`. Queries above the shallowest layer clamp to it.
/// Outside every patch the soil is barren: zero analytes, moisture 0, ph 7.
inline SoilComposition soil_at(const SiteModel& site, Vec2 position,
                               double depth_cm) {
  if (!site.extent.contains(position)) throw OutOfExtentError(position);
  for (const auto& patch : site.patches) {
    if (!patch.region.contains(position)) continue;
    const SoilLayer* pick = &patch.layers.front();
    for (const auto& layer : patch.layers)
      if (layer.depth_cm <= depth_cm) pick = &layer;
    return pick->composition;
  }
  return SoilComposition{};  // barren default, ph 7
}

/// Ambient gases are uniform over the site.
inline AmbientConditions gas_at(const SiteModel& site, Vec2 position) {
  if (!site.extent.contains(position)) throw OutOfExtentError(position);
  return site.ambient;
}

inline const RockProperties& rock_at(const SiteModel& site,
                                     const std::string& rock_id) {
  for (const auto& r : site.rocks)
    if (r.id == rock_id) return r;
  throw UnknownRockError(rock_id);
}

}  // namespace astrolab
