#pragma once

#include <functional>
#include <map>
#include <string>

#include "astrolab/assay_engine.hpp"
#include "astrolab/sensor_suite.hpp"
#include "astrolab/text_config.hpp"

namespace astrolab {

enum class Verdict { Extant, Extinct, NoPresenceOfLife };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Extant: return "Extant";
    case Verdict::Extinct: return "Extinct";
    case Verdict::NoPresenceOfLife: return "NoPresenceOfLife";
  }
  return "?";
}

struct LifeVerdict {
  Verdict verdict = Verdict::NoPresenceOfLife;
  bool contaminated_evidence = false;

  friend bool operator==(const LifeVerdict&, const LifeVerdict&) = default;
};

/// The three-level decision tree: protein wins, then carbohydrate, then
/// nothing — ammonia alone is inconclusive.
inline Verdict classify_life(bool protein, bool carbohydrate,
                             bool /*ammonia*/) {
  if (protein) return Verdict::Extant;
  if (carbohydrate) return Verdict::Extinct;
  return Verdict::NoPresenceOfLife;
}

/// Verdict over a target's assay results; missing assays count as
/// not-detected, contamination on any contributing assay taints the
/// evidence.
inline LifeVerdict classify_life(const std::vector<AssayResult>& results) {
  bool flags[3] = {false, false, false};
  LifeVerdict out;
  for (const auto& r : results) {
    if (r.detected) flags[static_cast<int>(r.kind)] = true;
    if (r.contaminated_input) out.contaminated_evidence = true;
  }
  out.verdict = classify_life(flags[static_cast<int>(AssayKind::Protein)],
                              flags[static_cast<int>(AssayKind::Carbohydrate)],
                              flags[static_cast<int>(AssayKind::Ammonia)]);
  return out;
}

enum class RockType { IgneousMetamorphic, Shale };

inline const char* rock_type_name(RockType t) {
  return t == RockType::Shale ? "Shale" : "IgneousMetamorphic";
}

struct RockClass {
  RockType rock_type = RockType::IgneousMetamorphic;
  bool fossil_prediction = false;
  std::string classifier_id;

  friend bool operator==(const RockClass&, const RockClass&) = default;
};

struct RockGasReading {
  bool alcohol = false;
  double formaldehyde_ppm = 0.0;
};

class UnknownClassifierError : public std::runtime_error {
 public:
  explicit UnknownClassifierError(const std::string& id)
      : std::runtime_error("unknown rock classifier: " + id) {}
};

struct BaselineClassifierConfig {
  int gray_tan_min[3] = {100, 90, 80};
  int gray_tan_max[3] = {200, 190, 180};
  double formaldehyde_threshold_ppm = 0.5;
};

/// Shale shows bedding layers and a gray-tan hue; biogenic gases over a
/// shale suggest preserved organics.
inline RockClass baseline_classify(const ImageCapture& capture,
                                   const RockGasReading& gas,
                                   const BaselineClassifierConfig& cfg) {
  const std::uint8_t ch[3] = {capture.mean_color.r, capture.mean_color.g,
                              capture.mean_color.b};
  bool in_box = true;
  for (int i = 0; i < 3; ++i)
    in_box = in_box && ch[i] >= cfg.gray_tan_min[i] &&
             ch[i] <= cfg.gray_tan_max[i];
  RockClass out;
  out.rock_type = (capture.layered && in_box) ? RockType::Shale
                                              : RockType::IgneousMetamorphic;
  out.fossil_prediction =
      out.rock_type == RockType::Shale &&
      (gas.alcohol || gas.formaldehyde_ppm >= cfg.formaldehyde_threshold_ppm);
  return out;
}

/// Named pure classifiers so a learned model can slot in without interface
/// change. Registering new entries never alters existing ones.
class ClassifierRegistry {
 public:
  using Fn = std::function<RockClass(const ImageCapture&,
                                     const RockGasReading&)>;

  explicit ClassifierRegistry(
      const BaselineClassifierConfig& baseline_cfg = {}) {
    register_classifier("baseline",
                        [baseline_cfg](const ImageCapture& c,
                                       const RockGasReading& g) {
                          return baseline_classify(c, g, baseline_cfg);
                        });
  }

  void register_classifier(const std::string& id, Fn fn) {
    fns_[id] = std::move(fn);
  }

  bool has(const std::string& id) const { return fns_.count(id) > 0; }

  RockClass classify(const ImageCapture& capture, const RockGasReading& gas,
                     const std::string& classifier_id) const {
    const auto it = fns_.find(classifier_id);
    if (it == fns_.end()) throw UnknownClassifierError(classifier_id);
    RockClass out = it->second(capture, gas);
    out.classifier_id = classifier_id;
    return out;
  }

 private:
  std::map<std::string, Fn> fns_;
};

/// Reads the `[baseline_classifier]` section; other sections are skipped.
inline BaselineClassifierConfig load_classifier_config(
    const std::string& text) {
  BaselineClassifierConfig cfg;
  for (const auto& sec : parse_sections(text)) {
    if (sec.kind != "baseline_classifier") continue;
    const auto triple = [&](const char* key, int out[3]) {
      const auto* e = sec.find_last(key);
      if (!e) return;
      const auto f = split_fields(e->value);
      if (f.size() != 3)
        throw ParseError(e->line, std::string(key) + " wants `r g b`");
      for (int i = 0; i < 3; ++i) {
        const long long c = parse_int(f[i], e->line);
        if (c < 0 || c > 255)
          throw ValidationError(key, "channel outside [0, 255]");
        out[i] = static_cast<int>(c);
      }
    };
    triple("gray_tan_min", cfg.gray_tan_min);
    triple("gray_tan_max", cfg.gray_tan_max);
    if (const auto* e = sec.find_last("formaldehyde_threshold_ppm"))
      cfg.formaldehyde_threshold_ppm = parse_double(e->value, e->line);
    for (int i = 0; i < 3; ++i)
      if (cfg.gray_tan_min[i] > cfg.gray_tan_max[i])
        throw ValidationError("gray_tan_min", "exceeds gray_tan_max");
  }
  return cfg;
}

}  // namespace astrolab
