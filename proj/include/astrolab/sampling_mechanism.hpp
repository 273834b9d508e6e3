#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "astrolab/env_model.hpp"

namespace astrolab {

class MechanismError : public std::runtime_error {
 public:
  explicit MechanismError(const std::string& what)
      : std::runtime_error(what) {}
};

class RequestTooLongError : public MechanismError {
 public:
  explicit RequestTooLongError(std::int64_t requested_ms)
      : MechanismError("requested on-time " + std::to_string(requested_ms) +
                       " ms exceeds the duty budget") {}
};

struct DutyBudget {
  std::int64_t window_ms = 1'200'000;  // 20 min
  std::int64_t max_on_ms = 120'000;    // 2 min on per window
};

struct OnInterval {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;  // half-open [start, end)

  friend bool operator==(const OnInterval&, const OnInterval&) = default;
};

struct ActuatorState {
  std::string id;
  double position_mm = 0.0;
  std::vector<OnInterval> on_intervals;  // disjoint, ordered
};

struct Allowed {};
struct WaitUntil {
  std::int64_t t_ms = 0;
};
using DutyDecision = std::variant<Allowed, WaitUntil>;

/// Rolling-window admission check. Allowed iff granting `requested_ms` of
/// on-time starting now keeps every window of window_ms at or under
/// max_on_ms; otherwise the earliest start time that does.
inline DutyDecision duty_check(const ActuatorState& actuator,
                               const DutyBudget& budget, std::int64_t now_ms,
                               std::int64_t requested_ms) {
  if (requested_ms > budget.max_on_ms) throw RequestTooLongError(requested_ms);
  if (requested_ms <= 0) return Allowed{};

  const auto on_time_from = [&](std::int64_t w) {
    std::int64_t total = 0;
    for (const auto& iv : actuator.on_intervals)
      total += std::max<std::int64_t>(0, iv.end_ms - std::max(iv.start_ms, w));
    return total;
  };
  const std::int64_t spare = budget.max_on_ms - requested_ms;
  if (on_time_from(now_ms - budget.window_ms) <= spare) return Allowed{};

  // Slide the window start right until enough old on-time falls out.
  std::int64_t suffix = 0;
  std::int64_t w = now_ms;
  for (auto it = actuator.on_intervals.rbegin();
       it != actuator.on_intervals.rend(); ++it) {
    const std::int64_t len = it->end_ms - it->start_ms;
    if (suffix + len <= spare) {
      suffix += len;
      w = it->start_ms;
      continue;
    }
    w = it->end_ms - (spare - suffix);
    break;
  }
  return WaitUntil{w + budget.window_ms};
}

/// Appends a granted on-interval; intervals must arrive in time order.
inline void record_on(ActuatorState& actuator, std::int64_t start_ms,
                      std::int64_t end_ms) {
  if (end_ms <= start_ms) return;
  if (!actuator.on_intervals.empty() &&
      start_ms < actuator.on_intervals.back().end_ms)
    throw MechanismError("actuator " + actuator.id +
                         " on-interval overlaps its predecessor");
  actuator.on_intervals.push_back({start_ms, end_ms});
}

struct SoilSample {
  double mass_g = 0.0;
  Vec2 source_position;
  double depth_cm = 0.0;
  SoilComposition composition;
  bool sterile_chain = true;

  friend bool operator==(const SoilSample&, const SoilSample&) = default;
};

struct DispenseRecord {
  std::string pump_id;
  double volume_ml = 0.0;
};

struct BeakerSlot {
  bool occupied = true;  // a clean beaker is seated
  std::optional<SoilSample> sample;
  bool funnel_cover_open = false;
  bool cover_open_at_alignment = false;
  bool contaminated = false;  // sticky until beaker replacement
  std::vector<DispenseRecord> preps;
};

struct TurntableState {
  int slot_count = 3;
  int steps_per_slot = 200;  // 1.8 deg/step through a 3:1 reduction
  long long motor_steps_taken = 0;
  int current_slot = 0;  // slot index at the funnel station
  std::vector<BeakerSlot> slots;
};

struct MechanismConfig {
  double stroke_mm = 100.0;
  double actuator_speed_mm_s = 10.0;
  double collection_rate_g_s = 0.5;
  double max_reach_cm = 8.0;  // must exceed the 5 cm capability floor
  DutyBudget duty;
  int slot_count = 3;
  int steps_per_slot = 200;
  std::int64_t stepper_ms_per_step = 5;
  std::int64_t dispense_ms_per_ml = 100;
  double reservoir_ml = 500.0;
};

struct MotionPlan {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  double target_mm[3] = {0, 0, 0};
};

/// The physical sample path: three positioning actuators plus the suction
/// pump, the funnel/turntable assembly, and the reagent/water lines. All
/// mutation flows through one logical thread (the mission engine).
class Mechanism {
 public:
  explicit Mechanism(const MechanismConfig& config = {}) : config_(config) {
    axes_[0].id = "axis_x";
    axes_[1].id = "axis_y";
    axes_[2].id = "axis_z";
    suction_.id = "suction";
    turntable_.slot_count = config.slot_count;
    turntable_.steps_per_slot = config.steps_per_slot;
    turntable_.slots.assign(static_cast<std::size_t>(config.slot_count),
                            BeakerSlot{});
    for (const char* line : {"benedict", "ninhydrin", "nessler", "water"})
      reservoirs_[line] = config.reservoir_ml;
  }

  const MechanismConfig& config() const { return config_; }
  const TurntableState& turntable() const { return turntable_; }
  const ActuatorState& axis(int i) const { return axes_[i]; }
  const ActuatorState& suction_actuator() const { return suction_; }
  double reservoir_ml(const std::string& line) const {
    const auto it = reservoirs_.find(line);
    return it == reservoirs_.end() ? 0.0 : it->second;
  }
  bool pump_positioned() const { return pump_positioned_; }
  bool probe_deployed() const { return probe_deployed_; }
  void set_probe_deployed(bool deployed) { probe_deployed_ = deployed; }
  void set_funnel_cover(int slot, bool open) {
    slot_at(slot).funnel_cover_open = open;
  }

  /// Moves the three axes simultaneously. Returns WaitUntil if any axis'
  /// duty budget defers the move; on Allowed the positions are committed
  /// and the plan's end_ms is when the slowest axis arrives.
  std::variant<MotionPlan, WaitUntil> position_pump(const double target_mm[3],
                                                    std::int64_t now_ms) {
    std::int64_t durations[3];
    for (int i = 0; i < 3; ++i) {
      if (target_mm[i] < 0.0 || target_mm[i] > config_.stroke_mm)
        throw MechanismError("axis " + axes_[i].id + " target " +
                             std::to_string(target_mm[i]) +
                             " mm outside stroke");
      const double dist = std::abs(target_mm[i] - axes_[i].position_mm);
      durations[i] = static_cast<std::int64_t>(
          std::ceil(dist / config_.actuator_speed_mm_s * 1000.0));
    }
    std::int64_t wait = 0;
    for (int i = 0; i < 3; ++i) {
      const auto decision =
          duty_check(axes_[i], config_.duty, now_ms, durations[i]);
      if (const auto* w = std::get_if<WaitUntil>(&decision))
        wait = std::max(wait, w->t_ms);
    }
    if (wait > 0) return WaitUntil{wait};

    MotionPlan plan;
    plan.start_ms = now_ms;
    plan.end_ms = now_ms;
    for (int i = 0; i < 3; ++i) {
      record_on(axes_[i], now_ms, now_ms + durations[i]);
      axes_[i].position_mm = target_mm[i];
      plan.target_mm[i] = target_mm[i];
      plan.end_ms = std::max(plan.end_ms, now_ms + durations[i]);
    }
    pump_positioned_ = true;
    return plan;
  }

  /// Collects soil at the current pump position. Mass is rate x time;
  /// composition comes from the environment at the requested depth.
  std::variant<SoilSample, WaitUntil> run_suction(const SiteModel& site,
                                                  Vec2 position,
                                                  double depth_cm,
                                                  std::int64_t duration_ms,
                                                  std::int64_t now_ms) {
    if (depth_cm > config_.max_reach_cm)
      throw MechanismError("depth " + std::to_string(depth_cm) +
                           " cm beyond reach of " +
                           std::to_string(config_.max_reach_cm) + " cm");
    if (!pump_positioned_)
      throw MechanismError("suction requested before pump positioning");
    const auto decision =
        duty_check(suction_, config_.duty, now_ms, duration_ms);
    if (const auto* w = std::get_if<WaitUntil>(&decision)) return *w;

    record_on(suction_, now_ms, now_ms + duration_ms);
    SoilSample sample;
    sample.mass_g = config_.collection_rate_g_s * (duration_ms / 1000.0);
    sample.source_position = position;
    sample.depth_cm = depth_cm;
    sample.composition = soil_at(site, position, depth_cm);
    sample.sterile_chain = sterilization_valid_;
    return sample;
  }

  /// Drops a collected sample through the funnel into the aligned beaker.
  void deposit_sample(const SoilSample& sample, int slot_index) {
    BeakerSlot& slot = slot_at(slot_index);
    if (turntable_.current_slot != slot_index)
      throw MechanismError("slot " + std::to_string(slot_index) +
                           " is not at the funnel station");
    if (!slot.occupied)
      throw MechanismError("slot " + std::to_string(slot_index) +
                           " has no beaker seated");
    if (slot.sample)
      throw MechanismError("slot " + std::to_string(slot_index) +
                           " already holds a sample");
    if (slot.cover_open_at_alignment) slot.contaminated = true;
    if (!sample.sterile_chain) slot.contaminated = true;
    slot.sample = sample;
  }

  /// Rotates the plate by whole slots; 200 full steps per slot.
  void advance_turntable(int n_slots, std::int64_t now_ms) {
    if (n_slots <= 0)
      throw MechanismError("turntable advance must be a positive slot count");
    if (now_ms < dispense_busy_until_ms_)
      throw MechanismError("turntable motion during active dispense");
    turntable_.motor_steps_taken +=
        static_cast<long long>(n_slots) * turntable_.steps_per_slot;
    turntable_.current_slot =
        (turntable_.current_slot + n_slots) % turntable_.slot_count;
    for (auto& slot : turntable_.slots)
      slot.cover_open_at_alignment = slot.funnel_cover_open;
  }

  /// Stepper time for an n-slot advance, for the engine's clock.
  std::int64_t advance_duration_ms(int n_slots) const {
    return static_cast<std::int64_t>(n_slots) * turntable_.steps_per_slot *
           config_.stepper_ms_per_step;
  }

  /// True when `slot` sits under the reagent/water lines (one station
  /// behind the funnel in rotation order).
  bool at_dispense_station(int slot_index) const {
    return (slot_index + 1) % turntable_.slot_count == turntable_.current_slot;
  }

  /// Pumps reagent or water into the aligned, sample-bearing beaker.
  DispenseRecord dispense(const std::string& pump_id, double volume_ml,
                          int slot_index, std::int64_t now_ms) {
    if (volume_ml <= 0.0)
      throw MechanismError("dispense volume must be positive");
    BeakerSlot& slot = slot_at(slot_index);
    if (!at_dispense_station(slot_index))
      throw MechanismError("slot " + std::to_string(slot_index) +
                           " is not at the dispense station");
    if (!slot.sample)
      throw MechanismError("dispense into slot " + std::to_string(slot_index) +
                           " with no sample");
    auto it = reservoirs_.find(pump_id);
    if (it == reservoirs_.end())
      throw MechanismError("unknown pump line " + pump_id);
    if (it->second < volume_ml)
      throw MechanismError("reservoir " + pump_id + " holds " +
                           std::to_string(it->second) + " ml, need " +
                           std::to_string(volume_ml));
    it->second -= volume_ml;
    DispenseRecord rec{pump_id, volume_ml};
    slot.preps.push_back(rec);
    dispense_busy_until_ms_ =
        now_ms + static_cast<std::int64_t>(
                     std::ceil(volume_ml * config_.dispense_ms_per_ml));
    return rec;
  }

  std::int64_t dispense_busy_until_ms() const { return dispense_busy_until_ms_; }

  /// Swaps in a fresh beaker: clears the sample, preps, and the sticky
  /// contamination flag.
  void replace_beaker(int slot_index) {
    BeakerSlot& slot = slot_at(slot_index);
    const bool cover = slot.funnel_cover_open;
    slot = BeakerSlot{};
    slot.funnel_cover_open = cover;
    slot.cover_open_at_alignment = cover;
  }

  BeakerSlot& slot_at(int slot_index) {
    if (slot_index < 0 || slot_index >= turntable_.slot_count)
      throw MechanismError("slot index " + std::to_string(slot_index) +
                           " out of range");
    return turntable_.slots[static_cast<std::size_t>(slot_index)];
  }
  const BeakerSlot& slot_at(int slot_index) const {
    return const_cast<Mechanism*>(this)->slot_at(slot_index);
  }

 private:
  MechanismConfig config_;
  ActuatorState axes_[3];
  ActuatorState suction_;
  TurntableState turntable_;
  std::map<std::string, double> reservoirs_;
  bool pump_positioned_ = false;
  bool probe_deployed_ = false;
  bool sterilization_valid_ = true;
  std::int64_t dispense_busy_until_ms_ = 0;
};

}  // namespace astrolab
