#include <catch2/catch_amalgamated.hpp>

#include "astrolab/life_classifier.hpp"

using namespace astrolab;

TEST_CASE("decision tree: the full truth table", "[classifier]") {
  // protein dominates, carbohydrate is the fallback, ammonia never decides
  for (const bool ammonia : {false, true}) {
    CHECK(classify_life(true, true, ammonia) == Verdict::Extant);
    CHECK(classify_life(true, false, ammonia) == Verdict::Extant);
    CHECK(classify_life(false, true, ammonia) == Verdict::Extinct);
    CHECK(classify_life(false, false, ammonia) == Verdict::NoPresenceOfLife);
  }
}

TEST_CASE("verdict over assay results", "[classifier]") {
  AssayResult protein;
  protein.kind = AssayKind::Protein;
  protein.detected = true;
  AssayResult carb;
  carb.kind = AssayKind::Carbohydrate;
  carb.detected = true;
  AssayResult ammonia;
  ammonia.kind = AssayKind::Ammonia;
  ammonia.detected = true;

  CHECK(classify_life({protein, carb, ammonia}).verdict == Verdict::Extant);
  CHECK(classify_life({carb, ammonia}).verdict == Verdict::Extinct);
  CHECK(classify_life({ammonia}).verdict == Verdict::NoPresenceOfLife);
  // missing assays read as not-detected
  CHECK(classify_life({}).verdict == Verdict::NoPresenceOfLife);
  AssayResult negative_protein;
  negative_protein.kind = AssayKind::Protein;
  CHECK(classify_life({negative_protein, carb}).verdict == Verdict::Extinct);
}

TEST_CASE("contamination taints the verdict evidence", "[classifier]") {
  AssayResult carb;
  carb.kind = AssayKind::Carbohydrate;
  carb.detected = true;
  AssayResult dirty_ammonia;
  dirty_ammonia.kind = AssayKind::Ammonia;
  dirty_ammonia.contaminated_input = true;

  const LifeVerdict v = classify_life({carb, dirty_ammonia});
  CHECK(v.verdict == Verdict::Extinct);
  CHECK(v.contaminated_evidence);
  CHECK_FALSE(classify_life({carb}).contaminated_evidence);
}

TEST_CASE("verdict names are wire-stable", "[classifier]") {
  CHECK(std::string(verdict_name(Verdict::Extant)) == "Extant");
  CHECK(std::string(verdict_name(Verdict::Extinct)) == "Extinct");
  CHECK(std::string(verdict_name(Verdict::NoPresenceOfLife)) ==
        "NoPresenceOfLife");
}

namespace {

ImageCapture capture(Rgb color, bool layered) {
  ImageCapture c;
  c.rock_id = "r";
  c.mean_color = color;
  c.layered = layered;
  return c;
}

}  // namespace

TEST_CASE("baseline rock classification", "[classifier]") {
  const BaselineClassifierConfig cfg;
  const RockGasReading quiet;

  // layered gray-tan rock with no gases: shale, no fossil call
  auto r = baseline_classify(capture({140, 130, 115}, true), quiet, cfg);
  CHECK(r.rock_type == RockType::Shale);
  CHECK_FALSE(r.fossil_prediction);

  // same hue without layering is igneous/metamorphic
  r = baseline_classify(capture({140, 130, 115}, false), quiet, cfg);
  CHECK(r.rock_type == RockType::IgneousMetamorphic);

  // layered but too dark for the gray-tan box
  r = baseline_classify(capture({40, 40, 40}, true), quiet, cfg);
  CHECK(r.rock_type == RockType::IgneousMetamorphic);

  // shale plus formaldehyde at the threshold: fossil prediction
  RockGasReading formaldehyde;
  formaldehyde.formaldehyde_ppm = cfg.formaldehyde_threshold_ppm;
  r = baseline_classify(capture({140, 130, 115}, true), formaldehyde, cfg);
  CHECK(r.rock_type == RockType::Shale);
  CHECK(r.fossil_prediction);

  // alcohol alone also flips the fossil call
  RockGasReading alcohol;
  alcohol.alcohol = true;
  r = baseline_classify(capture({140, 130, 115}, true), alcohol, cfg);
  CHECK(r.fossil_prediction);

  // gases over a non-shale never predict a fossil
  r = baseline_classify(capture({40, 40, 40}, false), alcohol, cfg);
  CHECK_FALSE(r.fossil_prediction);
}

TEST_CASE("gray-tan box edges are inclusive", "[classifier]") {
  const BaselineClassifierConfig cfg;
  const RockGasReading quiet;
  const Rgb at_min{static_cast<std::uint8_t>(cfg.gray_tan_min[0]),
                   static_cast<std::uint8_t>(cfg.gray_tan_min[1]),
                   static_cast<std::uint8_t>(cfg.gray_tan_min[2])};
  const Rgb at_max{static_cast<std::uint8_t>(cfg.gray_tan_max[0]),
                   static_cast<std::uint8_t>(cfg.gray_tan_max[1]),
                   static_cast<std::uint8_t>(cfg.gray_tan_max[2])};
  CHECK(baseline_classify(capture(at_min, true), quiet, cfg).rock_type ==
        RockType::Shale);
  CHECK(baseline_classify(capture(at_max, true), quiet, cfg).rock_type ==
        RockType::Shale);
  const Rgb below{static_cast<std::uint8_t>(cfg.gray_tan_min[0] - 1),
                  static_cast<std::uint8_t>(cfg.gray_tan_min[1]),
                  static_cast<std::uint8_t>(cfg.gray_tan_min[2])};
  CHECK(baseline_classify(capture(below, true), quiet, cfg).rock_type ==
        RockType::IgneousMetamorphic);
}

TEST_CASE("registry dispatch and isolation", "[classifier]") {
  ClassifierRegistry reg;
  CHECK(reg.has("baseline"));
  CHECK_FALSE(reg.has("cnn_v2"));

  const auto cap = capture({140, 130, 115}, true);
  const RockGasReading quiet;
  const RockClass baseline = reg.classify(cap, quiet, "baseline");
  CHECK(baseline.classifier_id == "baseline");
  CHECK(baseline.rock_type == RockType::Shale);

  CHECK_THROWS_AS(reg.classify(cap, quiet, "cnn_v2"), UnknownClassifierError);

  // registering another classifier must not perturb the baseline
  reg.register_classifier("always_fossil",
                          [](const ImageCapture&, const RockGasReading&) {
                            RockClass r;
                            r.rock_type = RockType::Shale;
                            r.fossil_prediction = true;
                            return r;
                          });
  CHECK(reg.classify(cap, quiet, "always_fossil").fossil_prediction);
  CHECK(reg.classify(cap, quiet, "baseline") == baseline);
}

TEST_CASE("classifier config load", "[classifier]") {
  const BaselineClassifierConfig cfg = load_classifier_config(
      "[baseline_classifier]\n"
      "gray_tan_min = 90 80 70\n"
      "gray_tan_max = 210 200 190\n"
      "formaldehyde_threshold_ppm = 0.8\n"
      "[engine]\nretries = 2\n");
  CHECK(cfg.gray_tan_min[0] == 90);
  CHECK(cfg.gray_tan_max[2] == 190);
  CHECK(cfg.formaldehyde_threshold_ppm == 0.8);

  CHECK_THROWS_AS(load_classifier_config("[baseline_classifier]\n"
                                         "gray_tan_min = 220 220 220\n"),
                  ValidationError);
  CHECK_THROWS_AS(load_classifier_config("[baseline_classifier]\n"
                                         "gray_tan_max = 90 90\n"),
                  ParseError);
}
