#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "astrolab/assay_engine.hpp"
#include "astrolab/env_model.hpp"
#include "astrolab/life_classifier.hpp"
#include "astrolab/mission_log.hpp"
#include "astrolab/sampling_mechanism.hpp"
#include "astrolab/sensor_suite.hpp"
#include "astrolab/telemetry.hpp"

namespace astrolab {

struct SampleTarget {
  std::string name;
  Vec2 position;
  std::vector<double> depths_cm;
  std::vector<AssayKind> assays;
};

struct RockTarget {
  std::string name;
  std::string rock_id;
};

struct MissionPlan {
  std::string site_ref;
  std::uint64_t seed = 0;
  std::string classifier_id = "baseline";
  std::optional<std::string> telemetry;  // host:port
  std::vector<SampleTarget> targets;
  std::vector<RockTarget> rock_targets;
  std::vector<std::string> warnings;  // duplicate-key last-wins notes
};

inline AssayKind assay_kind_from_name(const std::string& name,
                                      std::size_t line) {
  if (name == "protein") return AssayKind::Protein;
  if (name == "carbohydrate") return AssayKind::Carbohydrate;
  if (name == "ammonia") return AssayKind::Ammonia;
  throw ParseError(line, "unknown assay `" + name +
                             "` (expected protein, carbohydrate, ammonia)");
}

namespace detail {

inline void warn_duplicates(const ConfigSection& sec,
                            std::initializer_list<const char*> keys,
                            std::vector<std::string>& warnings) {
  for (const char* key : keys)
    if (sec.count(key) > 1)
      warnings.push_back("duplicate key `" + std::string(key) + "` in [" +
                         sec.kind +
                         (sec.label.empty() ? "" : " " + sec.label) +
                         "]; last value wins");
}

}  // namespace detail

inline MissionPlan parse_plan(const std::string& text) {
  MissionPlan plan;
  bool have_mission = false;
  for (const auto& sec : parse_sections(text)) {
    if (sec.kind == "mission") {
      have_mission = true;
      detail::warn_duplicates(sec, {"site", "seed", "classifier", "telemetry"},
                              plan.warnings);
      for (const auto& e : sec.entries)
        if (e.key != "site" && e.key != "seed" && e.key != "classifier" &&
            e.key != "telemetry")
          throw ParseError(e.line, "unknown key " + e.key + " in [mission]");
      if (const auto* e = sec.find_last("site")) plan.site_ref = e->value;
      if (const auto* e = sec.find_last("seed"))
        plan.seed = parse_uint(e->value, e->line);
      if (const auto* e = sec.find_last("classifier"))
        plan.classifier_id = e->value;
      if (const auto* e = sec.find_last("telemetry"))
        plan.telemetry = e->value;
    } else if (sec.kind == "target") {
      if (sec.label.empty())
        throw ParseError(sec.line, "[target] needs a name");
      SampleTarget target;
      target.name = sec.label;
      detail::warn_duplicates(sec, {"position", "depths", "assays"},
                              plan.warnings);
      const auto* pos = sec.find_last("position");
      if (!pos) throw ParseError(sec.line, "[target] needs `position`");
      {
        const auto f = split_fields(pos->value);
        if (f.size() != 2) throw ParseError(pos->line, "position wants `x y`");
        target.position = {parse_double(f[0], pos->line),
                           parse_double(f[1], pos->line)};
      }
      const auto* depths = sec.find_last("depths");
      if (!depths) throw ParseError(sec.line, "[target] needs `depths`");
      for (const auto& d : split_fields(depths->value)) {
        const double v = parse_double(d, depths->line);
        if (!(v > 0.0))
          throw ValidationError("depths", "depths must be positive");
        target.depths_cm.push_back(v);
      }
      if (target.depths_cm.empty())
        throw ValidationError("depths", "target " + target.name +
                                            " has no depths");
      const auto* assays = sec.find_last("assays");
      if (!assays) throw ParseError(sec.line, "[target] needs `assays`");
      {
        std::string list = assays->value;
        std::size_t pos2 = 0;
        while (pos2 <= list.size()) {
          const std::size_t comma = list.find(',', pos2);
          const std::string name = list.substr(
              pos2, comma == std::string::npos ? comma : comma - pos2);
          if (!name.empty())
            target.assays.push_back(assay_kind_from_name(name, assays->line));
          if (comma == std::string::npos) break;
          pos2 = comma + 1;
        }
      }
      if (target.assays.empty())
        throw ValidationError("assays", "target " + target.name +
                                            " requests no assays");
      plan.targets.push_back(std::move(target));
    } else if (sec.kind == "rock") {
      if (sec.label.empty()) throw ParseError(sec.line, "[rock] needs a name");
      RockTarget rock;
      rock.name = sec.label;
      const auto* id = sec.find_last("id");
      if (!id) throw ParseError(sec.line, "[rock] needs `id`");
      rock.rock_id = id->value;
      plan.rock_targets.push_back(std::move(rock));
    } else {
      throw ParseError(sec.line, "unknown section [" + sec.kind + "]");
    }
  }
  if (!have_mission)
    throw ValidationError("mission", "plan has no [mission] section");
  if (plan.targets.empty() && plan.rock_targets.empty())
    throw ValidationError("target", "plan has no targets and no rocks");
  return plan;
}

struct EngineParams {
  double rover_speed_m_s = 0.1;
  std::int64_t suction_ms = 20'000;
  std::int64_t probe_deploy_ms = 2'000;
  std::int64_t sensor_setup_ms = 2'000;
  std::int64_t ph_read_ms = 1'000;
  std::int64_t rock_sense_ms = 1'000;
  double water_ml = 10.0;
  int retries = 3;
  std::int64_t pace_ms = 0;  // wall-clock pause per step, for operators
  MechanismConfig mech;
};

/// Reads the `[engine]` section; other sections belong to other loaders.
inline EngineParams load_engine_params(const std::string& text) {
  EngineParams p;
  for (const auto& sec : parse_sections(text)) {
    if (sec.kind != "engine") continue;
    for (const auto& e : sec.entries) {
      if (e.key == "rover_speed_m_s")
        p.rover_speed_m_s = parse_double(e.value, e.line);
      else if (e.key == "suction_s")
        p.suction_ms = static_cast<std::int64_t>(
            parse_double(e.value, e.line) * 1000.0);
      else if (e.key == "probe_deploy_ms")
        p.probe_deploy_ms = parse_int(e.value, e.line);
      else if (e.key == "sensor_setup_ms")
        p.sensor_setup_ms = parse_int(e.value, e.line);
      else if (e.key == "ph_read_ms")
        p.ph_read_ms = parse_int(e.value, e.line);
      else if (e.key == "rock_sense_ms")
        p.rock_sense_ms = parse_int(e.value, e.line);
      else if (e.key == "water_ml")
        p.water_ml = parse_double(e.value, e.line);
      else if (e.key == "retries")
        p.retries = static_cast<int>(parse_int(e.value, e.line));
      else if (e.key == "pace_ms")
        p.pace_ms = parse_int(e.value, e.line);
      else if (e.key == "actuator_speed_mm_s")
        p.mech.actuator_speed_mm_s = parse_double(e.value, e.line);
      else if (e.key == "collection_rate_g_s")
        p.mech.collection_rate_g_s = parse_double(e.value, e.line);
      else if (e.key == "max_reach_cm")
        p.mech.max_reach_cm = parse_double(e.value, e.line);
      else if (e.key == "stepper_ms_per_step")
        p.mech.stepper_ms_per_step = parse_int(e.value, e.line);
      else if (e.key == "dispense_ms_per_ml")
        p.mech.dispense_ms_per_ml = parse_int(e.value, e.line);
      else if (e.key == "reservoir_ml")
        p.mech.reservoir_ml = parse_double(e.value, e.line);
      else if (e.key == "duty_window_ms")
        p.mech.duty.window_ms = parse_int(e.value, e.line);
      else if (e.key == "duty_max_on_ms")
        p.mech.duty.max_on_ms = parse_int(e.value, e.line);
      else
        throw ParseError(e.line, "unknown key " + e.key + " in [engine]");
    }
  }
  if (!(p.rover_speed_m_s > 0.0))
    throw ValidationError("rover_speed_m_s", "must be positive");
  if (!(p.mech.max_reach_cm > 5.0))
    throw ValidationError("max_reach_cm",
                          "sampling depth capability must exceed 5 cm");
  if (p.retries < 1) throw ValidationError("retries", "must be at least 1");
  return p;
}

/// The params file carries assay, classifier, and engine sections together;
/// anything else is a typo worth rejecting up front.
inline void validate_params_sections(const std::string& text) {
  for (const auto& sec : parse_sections(text))
    if (sec.kind != "benedict" && sec.kind != "ninhydrin" &&
        sec.kind != "nessler" && sec.kind != "baseline_classifier" &&
        sec.kind != "engine")
      throw ParseError(sec.line, "unknown params section [" + sec.kind + "]");
}

class IllegalTransitionError : public std::runtime_error {
 public:
  IllegalTransitionError(int current, int next)
      : std::runtime_error("illegal step transition " +
                           std::to_string(current) + " -> " +
                           std::to_string(next)) {}
};

inline const char* step_name(int step) {
  static const char* names[] = {
      "deploy",        "survey",     "select_region", "init_gear",
      "initial_ph",    "suction",    "deposit",       "iterate",
      "rotate_plate",  "reposition", "transport",     "dispense",
      "capture_color", "classify_sample", "position_rock", "rock_sense",
      "rock_classify", "transmit"};
  return (step >= 1 && step <= 18) ? names[step - 1] : "?";
}

struct MissionState {
  int step_index = 0;  // 0 = not started; 1..18 per the documented table
  Vec2 rover_pose;
  std::int64_t clock_ms = 0;
};

/// Legal step-entry transitions. The cycle restarts at 3 per soil target
/// and at 15 per rock; a skip may exit a cycle early to the next cycle
/// start (3 or 15) or to transmit (18).
inline void advance_step(MissionState& state, int next) {
  const int cur = state.step_index;
  bool ok = false;
  if (cur == 0) {
    ok = next == 1;
  } else if (cur == 1) {
    ok = next == 2;
  } else if (cur == 2) {
    ok = next == 3 || next == 15;
  } else if (cur >= 3 && cur <= 13) {
    ok = next == cur + 1 || next == 3 || next == 15 || next == 18;
  } else if (cur == 14) {
    ok = next == 3 || next == 15 || next == 18;
  } else if (cur == 15 || cur == 16) {
    ok = next == cur + 1 || next == 15 || next == 18;
  } else if (cur == 17) {
    ok = next == 15 || next == 18;
  }
  if (!ok) throw IllegalTransitionError(cur, next);
  state.step_index = next;
}

/// Network-facing hooks the engine may use; the engine itself never talks
/// to a socket.
class TelemetrySink {
 public:
  virtual ~TelemetrySink() = default;
  virtual void send(const Message& msg) = 0;
  virtual bool abort_requested() const = 0;
};

enum class MissionStatus { Completed, Aborted };

struct MissionResult {
  MissionStatus status = MissionStatus::Completed;
  MissionLog log;
  MissionSummary summary;
};

namespace detail {

struct AbortRequested {};

inline std::string no_spaces(std::string s) {
  for (char& c : s)
    if (c == ' ' || c == '\n' || c == '\t') c = '_';
  return s;
}

inline std::string xy(Vec2 p) {
  return logfmt::num(p.x) + "," + logfmt::num(p.y);
}

class MissionRunner {
 public:
  MissionRunner(const MissionPlan& plan, const SiteModel& site,
                const SensorCalibration& calib, const AssayProtocol& protocol,
                const ClassifierRegistry& registry, const EngineParams& params,
                TelemetrySink* sink)
      : plan_(plan),
        site_(site),
        calib_(calib),
        protocol_(protocol),
        registry_(registry),
        params_(params),
        sink_(sink),
        mech_(params.mech),
        rng_(plan.seed) {}

  MissionResult run() {
    MissionResult result;
    state_.rover_pose = {site_.extent.x0, site_.extent.y0};
    record("MISSION_START",
           {{"seed", std::to_string(plan_.seed)},
            {"classifier", plan_.classifier_id},
            {"site", no_spaces(site_.name)},
            {"targets", std::to_string(plan_.targets.size())},
            {"rocks", std::to_string(plan_.rock_targets.size())}});
    for (const auto& w : plan_.warnings)
      record("WARN", {{"msg", no_spaces(w)}});

    try {
      enter_step(1);
      advance(params_.sensor_setup_ms);

      enter_step(2);
      survey_frame(nullptr);

      for (const auto& target : plan_.targets) run_target(target);
      for (const auto& rock : plan_.rock_targets) run_rock(rock);

      enter_step(18);
      finish("completed");
      result.status = MissionStatus::Completed;
    } catch (const AbortRequested&) {
      record("ABORT", {{"reason", "ground_command"}});
      finish("aborted");
      result.status = MissionStatus::Aborted;
    }
    result.log = std::move(log_);
    result.summary = replay(result.log, params_.mech.duty.window_ms);
    return result;
  }

 private:
  void finish(const std::string& status) {
    std::size_t skipped = 0;
    for (const auto& rec : log_.records)
      if (rec.event == "SKIP") ++skipped;
    record("MISSION_END", {{"status", status},
                           {"targets", std::to_string(plan_.targets.size())},
                           {"skipped", std::to_string(skipped)},
                           {"rocks",
                            std::to_string(plan_.rock_targets.size())}});
    send(LogEventMsg{logfmt::format_record(log_.records.back())});
  }

  void run_target(const SampleTarget& target) {
    for (int attempt = 1;; ++attempt) {
      try {
        target_cycle(target);
        return;
      } catch (const AbortRequested&) {
        throw;
      } catch (const std::exception& e) {
        record("RETRY", {{"target", target.name},
                         {"attempt", std::to_string(attempt)},
                         {"err", no_spaces(e.what())}});
        if (attempt >= params_.retries) {
          record("SKIP", {{"target", target.name},
                          {"reason", no_spaces(e.what())}});
          return;
        }
      }
    }
  }

  void target_cycle(const SampleTarget& target) {
    enter_step(3, {{"target", target.name}});
    move_to(target.position);

    enter_step(4, {{"target", target.name}});
    advance(params_.probe_deploy_ms);
    mech_.set_probe_deployed(true);

    enter_step(5, {{"target", target.name}});
    const double ph =
        read_ph(site_, state_.rover_pose, 0.0, calib_, rng_, true);
    advance(params_.ph_read_ms);
    record("PH", {{"target", target.name}, {"value", logfmt::num(ph)}});
    mech_.set_probe_deployed(false);

    enter_step(6, {{"target", target.name}});
    std::vector<SoilSample> parts;
    for (const double depth : target.depths_cm) {
      const double axes[3] = {50.0, 50.0,
                              std::min(depth * 10.0, mech_.config().stroke_mm)};
      for (;;) {
        const auto plan = mech_.position_pump(axes, state_.clock_ms);
        if (const auto* wait = std::get_if<WaitUntil>(&plan)) {
          duty_wait("axes", wait->t_ms);
          continue;
        }
        const auto& motion = std::get<MotionPlan>(plan);
        for (int i = 0; i < 3; ++i)
          log_actuator(mech_.axis(i));
        record("PUMP_POS", {{"x", logfmt::num(axes[0])},
                            {"y", logfmt::num(axes[1])},
                            {"z", logfmt::num(axes[2])},
                            {"dur_ms",
                             std::to_string(motion.end_ms - motion.start_ms)}});
        state_.clock_ms = motion.end_ms;
        break;
      }
      for (;;) {
        const auto got = mech_.run_suction(site_, target.position, depth,
                                           params_.suction_ms,
                                           state_.clock_ms);
        if (const auto* wait = std::get_if<WaitUntil>(&got)) {
          duty_wait("suction", wait->t_ms);
          continue;
        }
        log_actuator(mech_.suction_actuator());
        const auto& sample = std::get<SoilSample>(got);
        record("SUCTION", {{"target", target.name},
                           {"depth_cm", logfmt::num(depth)},
                           {"duration_ms", std::to_string(params_.suction_ms)},
                           {"mass_g", logfmt::num(sample.mass_g)}});
        advance(params_.suction_ms);
        parts.push_back(sample);
        break;
      }
    }
    const SoilSample composite = merge_samples(parts);
    if (parts.size() > 1)
      record("SAMPLE_MERGED", {{"target", target.name},
                               {"parts", std::to_string(parts.size())},
                               {"mass_g", logfmt::num(composite.mass_g)}});

    enter_step(7, {{"target", target.name}});
    const int slot = mech_.turntable().current_slot;
    if (mech_.slot_at(slot).sample) {
      mech_.replace_beaker(slot);
      record("BEAKER_REPLACE", {{"slot", std::to_string(slot)}});
    }
    mech_.deposit_sample(composite, slot);
    record("DEPOSIT",
           {{"target", target.name},
            {"slot", std::to_string(slot)},
            {"mass_g", logfmt::num(composite.mass_g)},
            {"contaminated", mech_.slot_at(slot).contaminated ? "1" : "0"}});

    enter_step(8, {{"target", target.name},
                   {"passes", std::to_string(parts.size())}});

    enter_step(9, {{"target", target.name}});
    mech_.advance_turntable(1, state_.clock_ms);
    advance(mech_.advance_duration_ms(1));
    record("ADVANCE",
           {{"slots", "1"},
            {"steps", std::to_string(mech_.turntable().steps_per_slot)},
            {"slot", std::to_string(mech_.turntable().current_slot)}});

    enter_step(10, {{"target", target.name}});
    enter_step(11, {{"target", target.name},
                    {"slot", std::to_string(slot)}});

    enter_step(12, {{"target", target.name}});
    for (const AssayKind kind : target.assays) {
      const auto rec = mech_.dispense(reagent_name(kind),
                                      protocol_.params_for(kind).reagent_ml,
                                      slot, state_.clock_ms);
      state_.clock_ms = mech_.dispense_busy_until_ms();
      record("DISPENSE", {{"line", rec.pump_id},
                          {"ml", logfmt::num(rec.volume_ml)},
                          {"slot", std::to_string(slot)}});
    }
    {
      const auto rec =
          mech_.dispense("water", params_.water_ml, slot, state_.clock_ms);
      state_.clock_ms = mech_.dispense_busy_until_ms();
      record("DISPENSE", {{"line", rec.pump_id},
                          {"ml", logfmt::num(rec.volume_ml)},
                          {"slot", std::to_string(slot)}});
    }

    enter_step(13, {{"target", target.name}});
    std::vector<AssayResult> results;
    for (const AssayKind kind : target.assays) {
      record("ASSAY_START",
             {{"target", target.name},
              {"kind", assay_name(kind)},
              {"slot", std::to_string(slot)}});
      const AssayResult res = run_assay(kind, mech_.slot_at(slot),
                                        protocol_.params_for(kind),
                                        protocol_.chart_for(kind));
      advance(res.elapsed_ms);
      record("ASSAY_RESULT",
             {{"target", target.name},
              {"kind", assay_name(kind)},
              {"detected", res.detected ? "1" : "0"},
              {"bin", std::to_string(res.bin_index)},
              {"elapsed_ms", std::to_string(res.elapsed_ms)},
              {"contaminated", res.contaminated_input ? "1" : "0"}});
      send(AssayResultMsg{target.name, res});
      results.push_back(res);
    }

    enter_step(14, {{"target", target.name}});
    const LifeVerdict verdict = classify_life(results);
    record("VERDICT",
           {{"target", target.name},
            {"verdict", verdict_name(verdict.verdict)},
            {"contaminated", verdict.contaminated_evidence ? "1" : "0"}});
    send(LifeVerdictMsg{target.name, verdict});
  }

  void run_rock(const RockTarget& rock) {
    for (int attempt = 1;; ++attempt) {
      try {
        rock_cycle(rock);
        return;
      } catch (const AbortRequested&) {
        throw;
      } catch (const std::exception& e) {
        record("RETRY", {{"target", rock.name},
                         {"attempt", std::to_string(attempt)},
                         {"err", no_spaces(e.what())}});
        if (attempt >= params_.retries) {
          record("ROCK_SKIP", {{"name", rock.name},
                               {"rock", rock.rock_id},
                               {"reason", no_spaces(e.what())}});
          return;
        }
      }
    }
  }

  void rock_cycle(const RockTarget& rock) {
    enter_step(15, {{"name", rock.name}, {"rock", rock.rock_id}});
    const RockProperties& props = rock_at(site_, rock.rock_id);
    move_to(props.position);

    enter_step(16, {{"name", rock.name}});
    const ImageCapture cap =
        capture_image(site_, rock.rock_id, state_.clock_ms);
    record("IMAGE", {{"rock", rock.rock_id},
                     {"r", std::to_string(cap.mean_color.r)},
                     {"g", std::to_string(cap.mean_color.g)},
                     {"b", std::to_string(cap.mean_color.b)},
                     {"layered", cap.layered ? "1" : "0"}});
    const SensorFrame frame = survey_frame(&props);
    advance(params_.rock_sense_ms);
    record("ROCK_GAS",
           {{"rock", rock.rock_id},
            {"alcohol", frame.alcohol_detected ? "1" : "0"},
            {"formaldehyde", logfmt::num(frame.formaldehyde_ppm)}});

    enter_step(17, {{"name", rock.name}});
    const RockClass cls = registry_.classify(
        cap, {frame.alcohol_detected, frame.formaldehyde_ppm},
        plan_.classifier_id);
    record("ROCK_CLASS", {{"name", rock.name},
                          {"rock", rock.rock_id},
                          {"type", rock_type_name(cls.rock_type)},
                          {"fossil", cls.fossil_prediction ? "1" : "0"},
                          {"classifier", cls.classifier_id}});
    send(LogEventMsg{logfmt::format_record(log_.records.back())});
  }

  SensorFrame survey_frame(const RockProperties* rock) {
    const SensorFrame frame = poll_frame(site_, state_.rover_pose,
                                         state_.clock_ms, calib_, rng_, rock);
    record("FRAME",
           {{"rgb", std::to_string(frame.rgb.r) + "," +
                        std::to_string(frame.rgb.g) + "," +
                        std::to_string(frame.rgb.b)},
            {"alcohol", frame.alcohol_detected ? "1" : "0"},
            {"co2", logfmt::num(frame.co2_ppm)},
            {"formaldehyde", logfmt::num(frame.formaldehyde_ppm)},
            {"humidity", logfmt::num(frame.humidity_pct)},
            {"ammonia", logfmt::num(frame.ammonia_ppm)},
            {"moisture", logfmt::num(frame.soil_moisture_pct)},
            {"ph", logfmt::num(frame.ph)},
            {"faults", std::to_string(frame.faults)}});
    send(SensorFrameMsg{frame});
    return frame;
  }

  static SoilSample merge_samples(const std::vector<SoilSample>& parts) {
    SoilSample out = parts.front();
    if (parts.size() == 1) return out;
    double mass = 0.0;
    SoilComposition mix;
    mix.ph = 0.0;
    bool sterile = true;
    for (const auto& p : parts) {
      mass += p.mass_g;
      mix.protein_mg_per_g += p.composition.protein_mg_per_g * p.mass_g;
      mix.carbohydrate_mg_per_g +=
          p.composition.carbohydrate_mg_per_g * p.mass_g;
      mix.ammonia_mg_per_g += p.composition.ammonia_mg_per_g * p.mass_g;
      mix.moisture_pct += p.composition.moisture_pct * p.mass_g;
      mix.ph += p.composition.ph * p.mass_g;
      sterile = sterile && p.sterile_chain;
    }
    if (mass > 0.0) {
      mix.protein_mg_per_g /= mass;
      mix.carbohydrate_mg_per_g /= mass;
      mix.ammonia_mg_per_g /= mass;
      mix.moisture_pct /= mass;
      mix.ph /= mass;
    }
    out.mass_g = mass;
    out.composition = mix;
    out.depth_cm = parts.back().depth_cm;
    out.sterile_chain = sterile;
    return out;
  }

  void move_to(Vec2 to) {
    if (!site_.extent.contains(to)) throw OutOfExtentError(to);
    const double dx = to.x - state_.rover_pose.x;
    const double dy = to.y - state_.rover_pose.y;
    const double dist = std::sqrt(dx * dx + dy * dy);
    const auto dur = static_cast<std::int64_t>(
        std::ceil(dist / params_.rover_speed_m_s * 1000.0));
    record("MOVE", {{"to", xy(to)},
                    {"dist_m", logfmt::num(dist)},
                    {"dur_ms", std::to_string(dur)}});
    advance(dur);
    state_.rover_pose = to;
  }

  void duty_wait(const std::string& what, std::int64_t until_ms) {
    record("DUTY_WAIT",
           {{"id", what}, {"until", std::to_string(until_ms)}});
    state_.clock_ms = std::max(state_.clock_ms, until_ms);
  }

  void log_actuator(const ActuatorState& actuator) {
    if (actuator.on_intervals.empty()) return;
    const OnInterval& iv = actuator.on_intervals.back();
    if (iv.start_ms < state_.clock_ms) return;  // not newly granted
    record("ACTUATOR_ON", {{"id", actuator.id},
                           {"start", std::to_string(iv.start_ms)},
                           {"end", std::to_string(iv.end_ms)}});
  }

  void enter_step(
      int step,
      std::vector<std::pair<std::string, std::string>> extra = {}) {
    if (sink_ && sink_->abort_requested()) throw AbortRequested{};
    if (params_.pace_ms > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(params_.pace_ms));
    advance_step(state_, step);
    std::vector<std::pair<std::string, std::string>> kv = {
        {"n", std::to_string(step)}, {"name", step_name(step)}};
    kv.insert(kv.end(), extra.begin(), extra.end());
    record("STEP", std::move(kv));
  }

  void advance(std::int64_t ms) { state_.clock_ms += ms; }

  void record(const std::string& event,
              std::vector<std::pair<std::string, std::string>> kv) {
    MissionLogRecord rec;
    rec.t_ms = state_.clock_ms;
    rec.seq = log_.records.size();
    rec.event = event;
    rec.kv = std::move(kv);
    log_.records.push_back(std::move(rec));
  }

  void send(const Message& msg) {
    if (sink_) sink_->send(msg);
  }

  const MissionPlan& plan_;
  const SiteModel& site_;
  const SensorCalibration& calib_;
  const AssayProtocol& protocol_;
  const ClassifierRegistry& registry_;
  const EngineParams& params_;
  TelemetrySink* sink_;
  Mechanism mech_;
  NoiseRng rng_;
  MissionState state_;
  MissionLog log_;
};

}  // namespace detail

/// Executes the full eighteen-step methodology over the loaded models.
/// Pure in (plan, site, configs): identical inputs give byte-identical
/// logs. `sink`, when given, receives typed telemetry and may raise abort.
inline MissionResult run_mission(const MissionPlan& plan,
                                 const SiteModel& site,
                                 const SensorCalibration& calib,
                                 const AssayProtocol& protocol,
                                 const ClassifierRegistry& registry,
                                 const EngineParams& params,
                                 TelemetrySink* sink = nullptr) {
  detail::MissionRunner runner(plan, site, calib, protocol, registry, params,
                               sink);
  return runner.run();
}

}  // namespace astrolab
