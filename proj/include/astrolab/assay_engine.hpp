#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "astrolab/color.hpp"
#include "astrolab/sampling_mechanism.hpp"
#include "astrolab/text_config.hpp"

namespace astrolab {

enum class AssayKind { Carbohydrate = 0, Protein = 1, Ammonia = 2 };

inline const char* assay_name(AssayKind kind) {
  switch (kind) {
    case AssayKind::Carbohydrate: return "carbohydrate";
    case AssayKind::Protein: return "protein";
    case AssayKind::Ammonia: return "ammonia";
  }
  return "?";
}

/// Reagent line / config section for each assay.
inline const char* reagent_name(AssayKind kind) {
  switch (kind) {
    case AssayKind::Carbohydrate: return "benedict";
    case AssayKind::Protein: return "ninhydrin";
    case AssayKind::Ammonia: return "nessler";
  }
  return "?";
}

class AssayError : public std::runtime_error {
 public:
  explicit AssayError(const std::string& what) : std::runtime_error(what) {}
};

struct AssayParams {
  double nominal_mass_g = 10.0;
  double reagent_ml = 20.0;
  std::int64_t react_time_ms = 300'000;
  std::int64_t small_sample_react_time_ms = 300'000;
  double lod_mg = 1.0;
  double small_sample_lod_factor = 4.0;
};

struct ChartEntry {
  double upper_mg = 0.0;  // bin covers (previous upper, this upper]
  Rgb color;
};

/// Reference chart; entry 0 is the negative color and its upper bound
/// conventionally equals the LOD.
struct AssayChart {
  std::vector<ChartEntry> entries;
};

struct AssayProtocol {
  AssayParams params[3];
  AssayChart charts[3];

  const AssayParams& params_for(AssayKind k) const {
    return params[static_cast<int>(k)];
  }
  const AssayChart& chart_for(AssayKind k) const {
    return charts[static_cast<int>(k)];
  }
};

struct AssayResult {
  AssayKind kind = AssayKind::Carbohydrate;
  bool detected = false;
  int bin_index = 0;  // 0 = negative
  std::int64_t elapsed_ms = 0;
  bool contaminated_input = false;

  friend bool operator==(const AssayResult&, const AssayResult&) = default;
};

inline double analyte_mg_per_g(const SoilComposition& c, AssayKind kind) {
  switch (kind) {
    case AssayKind::Carbohydrate: return c.carbohydrate_mg_per_g;
    case AssayKind::Protein: return c.protein_mg_per_g;
    case AssayKind::Ammonia: return c.ammonia_mg_per_g;
  }
  return 0.0;
}

/// Reaction time the protocol demands for this sample mass. Small samples
/// stretch only the protein assay (slower color development).
inline std::int64_t required_react_ms(AssayKind kind, double mass_g,
                                      const AssayParams& params) {
  if (kind == AssayKind::Protein && mass_g < params.nominal_mass_g)
    return params.small_sample_react_time_ms;
  return params.react_time_ms;
}

/// Color the beaker shows after `elapsed_ms`. Below the effective LOD (or
/// before the required reaction time) the mixture stays at the chart's
/// negative color; small samples raise the LOD by the configured factor.
inline Rgb reaction_color(AssayKind kind, const SoilSample& sample,
                          double reagent_ml, double /*water_ml*/,
                          std::int64_t elapsed_ms, const AssayParams& params,
                          const AssayChart& chart) {
  if (!(reagent_ml > 0.0))
    throw AssayError("reaction needs a positive reagent volume");
  if (!(sample.mass_g > 0.0))
    throw AssayError("reaction needs a positive sample mass");
  const Rgb negative = chart.entries.front().color;
  if (elapsed_ms < required_react_ms(kind, sample.mass_g, params))
    return negative;
  const double analyte_mg =
      analyte_mg_per_g(sample.composition, kind) * sample.mass_g;
  double effective_lod = params.lod_mg;
  if (sample.mass_g < params.nominal_mass_g)
    effective_lod *= params.small_sample_lod_factor;
  if (analyte_mg < effective_lod) return negative;
  for (std::size_t k = 1; k < chart.entries.size(); ++k)
    if (analyte_mg <= chart.entries[k].upper_mg) return chart.entries[k].color;
  return chart.entries.back().color;
}

/// Nearest reference color by Euclidean distance; ties go to the lower bin.
inline std::pair<bool, int> interpret_color(AssayKind /*kind*/,
                                            const Rgb& observed,
                                            const AssayChart& chart) {
  int best = 0;
  long long best_d2 = color_dist2(observed, chart.entries[0].color);
  for (std::size_t k = 1; k < chart.entries.size(); ++k) {
    const long long d2 = color_dist2(observed, chart.entries[k].color);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(k);
    }
  }
  return {best > 0, best};
}

/// Full bench cycle over a prepared beaker: wait the protocol's required
/// time, read the color, interpret it. The caller advances its clock by
/// the result's elapsed_ms.
inline AssayResult run_assay(AssayKind kind, const BeakerSlot& slot,
                             const AssayParams& params,
                             const AssayChart& chart) {
  if (!slot.sample)
    throw AssayError(std::string("no sample in beaker for ") +
                     assay_name(kind) + " assay");
  double reagent_ml = 0.0;
  double water_ml = 0.0;
  for (const auto& prep : slot.preps) {
    if (prep.pump_id == reagent_name(kind)) reagent_ml += prep.volume_ml;
    if (prep.pump_id == "water") water_ml += prep.volume_ml;
  }
  if (reagent_ml <= 0.0)
    throw AssayError(std::string("reagent ") + reagent_name(kind) +
                     " was never dispensed");

  AssayResult result;
  result.kind = kind;
  result.elapsed_ms = required_react_ms(kind, slot.sample->mass_g, params);
  const Rgb observed = reaction_color(kind, *slot.sample, reagent_ml, water_ml,
                                      result.elapsed_ms, params, chart);
  const auto [detected, bin] = interpret_color(kind, observed, chart);
  result.detected = detected;
  result.bin_index = bin;
  result.contaminated_input = slot.contaminated;
  return result;
}

inline AssayProtocol default_protocol() {
  AssayProtocol p;
  auto& carb = p.params[static_cast<int>(AssayKind::Carbohydrate)];
  carb.lod_mg = 2.0;
  carb.react_time_ms = 300'000;
  carb.small_sample_react_time_ms = 300'000;
  auto& prot = p.params[static_cast<int>(AssayKind::Protein)];
  prot.lod_mg = 5.0;
  prot.react_time_ms = 300'000;
  prot.small_sample_react_time_ms = 420'000;
  auto& ammo = p.params[static_cast<int>(AssayKind::Ammonia)];
  ammo.lod_mg = 3.0;
  ammo.react_time_ms = 180'000;
  ammo.small_sample_react_time_ms = 180'000;

  p.charts[static_cast<int>(AssayKind::Carbohydrate)].entries = {
      {2.0, {70, 130, 230}},      // clear blue (negative)
      {10.0, {60, 160, 90}},      // green
      {30.0, {230, 220, 70}},     // yellow
      {80.0, {235, 140, 40}},     // orange
      {100000.0, {165, 42, 42}},  // brick red
  };
  p.charts[static_cast<int>(AssayKind::Protein)].entries = {
      {5.0, {245, 245, 240}},     // colorless (negative)
      {25.0, {180, 150, 200}},    // pale violet
      {100000.0, {85, 26, 139}},  // deep purple
  };
  p.charts[static_cast<int>(AssayKind::Ammonia)].entries = {
      {3.0, {245, 245, 240}},     // colorless (negative)
      {20.0, {250, 235, 140}},    // pale yellow
      {100000.0, {190, 115, 40}},  // orange-brown
  };
  return p;
}

namespace detail {

inline AssayKind kind_for_section(const std::string& section) {
  if (section == "benedict") return AssayKind::Carbohydrate;
  if (section == "ninhydrin") return AssayKind::Protein;
  return AssayKind::Ammonia;
}

inline void validate_protocol(const AssayProtocol& p) {
  for (int i = 0; i < 3; ++i) {
    const auto kind = static_cast<AssayKind>(i);
    const char* name = reagent_name(kind);
    const AssayParams& params = p.params[i];
    for (double v :
         {params.nominal_mass_g, params.reagent_ml, params.lod_mg,
          params.small_sample_lod_factor, double(params.react_time_ms),
          double(params.small_sample_react_time_ms)})
      if (!(v > 0.0))
        throw ValidationError(name, "assay parameters must be positive");
    if (kind == AssayKind::Protein &&
        params.small_sample_react_time_ms < params.react_time_ms)
      throw ValidationError(name,
                            "small-sample reaction time below nominal time");
    const auto& entries = p.charts[i].entries;
    if (entries.size() < 2)
      throw ValidationError(name, "chart needs at least 2 entries");
    for (std::size_t k = 1; k < entries.size(); ++k)
      if (!(entries[k].upper_mg > entries[k - 1].upper_mg))
        throw ValidationError(name, "chart bins must strictly increase");
  }
}

}  // namespace detail

/// Reads `[benedict]` / `[ninhydrin]` / `[nessler]` sections; other
/// sections in the same file belong to other loaders and are skipped.
inline AssayProtocol load_protocol(const std::string& text) {
  AssayProtocol p = default_protocol();
  for (const auto& sec : parse_sections(text)) {
    if (sec.kind != "benedict" && sec.kind != "ninhydrin" &&
        sec.kind != "nessler")
      continue;
    const AssayKind kind = detail::kind_for_section(sec.kind);
    AssayParams& params = p.params[static_cast<int>(kind)];
    AssayChart& chart = p.charts[static_cast<int>(kind)];
    if (sec.count("bin") > 0) chart.entries.clear();
    for (const auto& e : sec.entries) {
      if (e.key == "nominal_mass_g")
        params.nominal_mass_g = parse_double(e.value, e.line);
      else if (e.key == "reagent_ml")
        params.reagent_ml = parse_double(e.value, e.line);
      else if (e.key == "react_ms")
        params.react_time_ms = parse_int(e.value, e.line);
      else if (e.key == "small_react_ms")
        params.small_sample_react_time_ms = parse_int(e.value, e.line);
      else if (e.key == "lod_mg")
        params.lod_mg = parse_double(e.value, e.line);
      else if (e.key == "small_lod_factor")
        params.small_sample_lod_factor = parse_double(e.value, e.line);
      else if (e.key == "bin") {
        const auto f = split_fields(e.value);
        if (f.size() != 4)
          throw ParseError(e.line, "bin wants `UPPER_MG r g b`");
        ChartEntry entry;
        entry.upper_mg = parse_double(f[0], e.line);
        std::uint8_t ch[3];
        for (int i = 0; i < 3; ++i) {
          const long long c = parse_int(f[i + 1], e.line);
          if (c < 0 || c > 255)
            throw ValidationError("bin", "color channel outside [0, 255]");
          ch[i] = static_cast<std::uint8_t>(c);
        }
        entry.color = Rgb{ch[0], ch[1], ch[2]};
        chart.entries.push_back(entry);
      } else {
        throw ParseError(e.line, "unknown key " + e.key + " in [" + sec.kind +
                                     "]");
      }
    }
  }
  detail::validate_protocol(p);
  return p;
}

}  // namespace astrolab
