#include <catch2/catch_amalgamated.hpp>
#include <variant>

#include "astrolab/rng.hpp"
#include "astrolab/sampling_mechanism.hpp"

using namespace astrolab;

namespace {

// Independent oracle: peak on-time over every window placement. The peak of
// a sliding window over a step function is attained with the window start at
// an interval start or the window end at an interval end.
std::int64_t peak_on_any_window(const std::vector<OnInterval>& ivs,
                                std::int64_t window_ms) {
  std::int64_t peak = 0;
  auto total_in = [&](std::int64_t w0) {
    std::int64_t sum = 0;
    for (const auto& iv : ivs) {
      const std::int64_t lo = std::max(iv.start_ms, w0);
      const std::int64_t hi = std::min(iv.end_ms, w0 + window_ms);
      sum += std::max<std::int64_t>(0, hi - lo);
    }
    return sum;
  };
  for (const auto& iv : ivs) {
    peak = std::max(peak, total_in(iv.start_ms));
    peak = std::max(peak, total_in(iv.end_ms - window_ms));
  }
  return peak;
}

}  // namespace

TEST_CASE("fresh actuator grants the full budget", "[mechanism]") {
  ActuatorState act;
  const DutyBudget budget;
  const auto d = duty_check(act, budget, 0, budget.max_on_ms);
  CHECK(std::holds_alternative<Allowed>(d));
}

TEST_CASE("full budget just spent defers by the window exit", "[mechanism]") {
  ActuatorState act;
  const DutyBudget budget;
  const std::int64_t t = 5'000'000;
  record_on(act, t - budget.max_on_ms, t);
  const auto d = duty_check(act, budget, t, 1);
  REQUIRE(std::holds_alternative<WaitUntil>(d));
  CHECK(std::get<WaitUntil>(d).t_ms == t + 1'080'001);
}

TEST_CASE("requests beyond the cap are rejected outright", "[mechanism]") {
  ActuatorState act;
  const DutyBudget budget;
  CHECK_THROWS_AS(duty_check(act, budget, 0, budget.max_on_ms + 1),
                  RequestTooLongError);
}

TEST_CASE("random schedules never exceed the rolling budget", "[mechanism]") {
  NoiseRng rng(20240814);
  const DutyBudget budget;
  for (int trial = 0; trial < 300; ++trial) {
    ActuatorState act;
    std::int64_t now = 0;
    for (int step = 0; step < 60; ++step) {
      const std::int64_t req =
          1 + static_cast<std::int64_t>(rng.unit() * (budget.max_on_ms - 1));
      auto d = duty_check(act, budget, now, req);
      if (const auto* w = std::get_if<WaitUntil>(&d)) {
        REQUIRE(w->t_ms > now);
        // minimality: one tick earlier must still be blocked
        const auto early = duty_check(act, budget, w->t_ms - 1, req);
        REQUIRE(std::holds_alternative<WaitUntil>(early));
        now = w->t_ms;
        d = duty_check(act, budget, now, req);
        REQUIRE(std::holds_alternative<Allowed>(d));
      }
      record_on(act, now, now + req);
      now += req + static_cast<std::int64_t>(rng.unit() * 90'000);
    }
    REQUIRE(peak_on_any_window(act.on_intervals, budget.window_ms) <=
            budget.max_on_ms);
  }
}

TEST_CASE("record_on rejects out-of-order intervals", "[mechanism]") {
  ActuatorState act;
  record_on(act, 100, 200);
  CHECK_THROWS_AS(record_on(act, 150, 260), MechanismError);
  record_on(act, 300, 300);  // empty interval is dropped, not stored
  CHECK(act.on_intervals.size() == 1);
}

TEST_CASE("position_pump computes travel from distance and speed",
          "[mechanism]") {
  Mechanism m;
  const double park[3] = {0, 0, 0};
  auto plan = m.position_pump(park, 0);
  REQUIRE(std::holds_alternative<MotionPlan>(plan));
  CHECK(std::get<MotionPlan>(plan).end_ms == 0);  // no-op move

  const double far[3] = {100, 0, 0};
  plan = m.position_pump(far, 10);
  REQUIRE(std::holds_alternative<MotionPlan>(plan));
  CHECK(std::get<MotionPlan>(plan).end_ms == 10 + 10'000);
  CHECK(m.axis(0).position_mm == 100);

  const double over[3] = {101, 0, 0};
  CHECK_THROWS_AS(m.position_pump(over, 20'000), MechanismError);
}

TEST_CASE("position_pump defers when an axis budget is exhausted",
          "[mechanism]") {
  Mechanism m;
  std::int64_t now = 0;
  bool went_far = false;
  for (int i = 0; i < 12; ++i) {
    const double target[3] = {went_far ? 0.0 : 100.0, 0, 0};
    auto plan = m.position_pump(target, now);
    REQUIRE(std::holds_alternative<MotionPlan>(plan));
    now = std::get<MotionPlan>(plan).end_ms;
    went_far = !went_far;
  }
  // 120 s of axis_x on-time inside one window: the 13th move must wait
  const double target[3] = {went_far ? 0.0 : 100.0, 0, 0};
  const auto plan = m.position_pump(target, now);
  REQUIRE(std::holds_alternative<WaitUntil>(plan));
  CHECK(std::get<WaitUntil>(plan).t_ms > now);
}

namespace {

SiteModel bench_site() {
  return load_site(
      "[ambient]\nextent = 0 0 10 10\nco2_ppm = 400\nhumidity_pct = 20\n"
      "[patch bed]\nregion = 0 0 10 10\n"
      "layer = 6 2.0 1.0 0.0 15 6.8\n");
}

Mechanism positioned_mechanism() {
  Mechanism m;
  const double down[3] = {10, 10, 60};
  m.position_pump(down, 0);
  return m;
}

}  // namespace

TEST_CASE("suction mass is rate times duration", "[mechanism]") {
  const SiteModel site = bench_site();
  Mechanism m = positioned_mechanism();
  auto got = m.run_suction(site, {5, 5}, 6.0, 20'000, 20'000);
  REQUIRE(std::holds_alternative<SoilSample>(got));
  const SoilSample& s = std::get<SoilSample>(got);
  CHECK(s.mass_g == 10.0);
  CHECK(s.depth_cm == 6.0);
  CHECK(s.composition.protein_mg_per_g == 2.0);
  CHECK(s.sterile_chain);
}

TEST_CASE("suction depth gate sits beyond the 5 cm floor", "[mechanism]") {
  const SiteModel site = bench_site();
  Mechanism m = positioned_mechanism();
  CHECK(m.config().max_reach_cm > 5.0);
  CHECK(std::holds_alternative<SoilSample>(
      m.run_suction(site, {5, 5}, m.config().max_reach_cm, 1000, 20'000)));
  CHECK_THROWS_AS(m.run_suction(site, {5, 5}, 9.0, 1000, 40'000),
                  MechanismError);
}

TEST_CASE("suction before positioning is rejected", "[mechanism]") {
  const SiteModel site = bench_site();
  Mechanism m;
  CHECK_THROWS_AS(m.run_suction(site, {5, 5}, 6.0, 1000, 0), MechanismError);
}

TEST_CASE("suction defers on its own duty budget", "[mechanism]") {
  const SiteModel site = bench_site();
  Mechanism m = positioned_mechanism();
  std::int64_t now = 20'000;
  for (int i = 0; i < 6; ++i) {
    auto got = m.run_suction(site, {5, 5}, 6.0, 20'000, now);
    REQUIRE(std::holds_alternative<SoilSample>(got));
    now += 20'000;
  }
  const auto deferred = m.run_suction(site, {5, 5}, 6.0, 20'000, now);
  REQUIRE(std::holds_alternative<WaitUntil>(deferred));
  const std::int64_t resume = std::get<WaitUntil>(deferred).t_ms;
  CHECK(resume > now);
  CHECK(std::holds_alternative<SoilSample>(
      m.run_suction(site, {5, 5}, 6.0, 20'000, resume)));
}

TEST_CASE("deposit requires funnel alignment and a fresh beaker",
          "[mechanism]") {
  Mechanism m;
  SoilSample s;
  s.mass_g = 10;
  m.deposit_sample(s, 0);
  CHECK(m.slot_at(0).sample.has_value());
  CHECK_FALSE(m.slot_at(0).contaminated);
  CHECK_THROWS_AS(m.deposit_sample(s, 0), MechanismError);  // already loaded
  CHECK_THROWS_AS(m.deposit_sample(s, 1), MechanismError);  // not at funnel
  m.slot_at(2).occupied = false;
  m.advance_turntable(2, 0);
  CHECK_THROWS_AS(m.deposit_sample(s, 2), MechanismError);  // no beaker
}

TEST_CASE("open funnel cover at alignment contaminates the deposit",
          "[mechanism]") {
  Mechanism m;
  m.set_funnel_cover(0, true);
  m.advance_turntable(3, 0);  // full revolution captures the cover state
  CHECK(m.turntable().current_slot == 0);
  SoilSample s;
  s.mass_g = 5;
  m.deposit_sample(s, 0);
  CHECK(m.slot_at(0).contaminated);
}

TEST_CASE("broken sterile chain contaminates the deposit", "[mechanism]") {
  Mechanism m;
  SoilSample s;
  s.mass_g = 5;
  s.sterile_chain = false;
  m.deposit_sample(s, 0);
  CHECK(m.slot_at(0).contaminated);
}

TEST_CASE("contamination is sticky until the beaker is replaced",
          "[mechanism]") {
  Mechanism m;
  SoilSample s;
  s.sterile_chain = false;
  s.mass_g = 5;
  m.deposit_sample(s, 0);
  REQUIRE(m.slot_at(0).contaminated);
  m.replace_beaker(0);
  CHECK_FALSE(m.slot_at(0).contaminated);
  CHECK_FALSE(m.slot_at(0).sample.has_value());
  CHECK(m.slot_at(0).occupied);
  SoilSample clean;
  clean.mass_g = 5;
  m.deposit_sample(clean, 0);
  CHECK_FALSE(m.slot_at(0).contaminated);
}

TEST_CASE("turntable geometry: 200 steps per slot, modular position",
          "[mechanism]") {
  Mechanism m;
  m.advance_turntable(1, 0);
  CHECK(m.turntable().motor_steps_taken == 200);
  CHECK(m.turntable().current_slot == 1);
  CHECK(m.advance_duration_ms(1) == 1000);
  CHECK_THROWS_AS(m.advance_turntable(0, 0), MechanismError);

  NoiseRng rng(3);
  long long total = 1;
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + static_cast<int>(rng.unit() * 5);
    m.advance_turntable(n, 0);
    total += n;
    REQUIRE(m.turntable().motor_steps_taken == total * 200);
    REQUIRE(m.turntable().current_slot == total % 3);
  }
}

TEST_CASE("deposit then single advance reaches the dispense station",
          "[mechanism]") {
  Mechanism m;
  SoilSample s;
  s.mass_g = 10;
  m.deposit_sample(s, 0);
  CHECK_FALSE(m.at_dispense_station(0));
  m.advance_turntable(1, 0);
  CHECK(m.at_dispense_station(0));
}

TEST_CASE("dispense bookkeeping and guards", "[mechanism]") {
  Mechanism m;
  SoilSample s;
  s.mass_g = 10;
  m.deposit_sample(s, 0);
  CHECK_THROWS_AS(m.dispense("benedict", 20, 0, 0), MechanismError);  // align
  m.advance_turntable(1, 0);
  CHECK_THROWS_AS(m.dispense("benedict", 20, 1, 0), MechanismError);  // align
  CHECK_THROWS_AS(m.dispense("benedict", 0, 0, 0), MechanismError);
  CHECK_THROWS_AS(m.dispense("acetone", 5, 0, 0), MechanismError);
  const auto rec = m.dispense("benedict", 20, 0, 1000);
  CHECK(rec.volume_ml == 20);
  CHECK(m.reservoir_ml("benedict") == 480);
  CHECK(m.slot_at(0).preps.size() == 1);
  CHECK(m.dispense_busy_until_ms() == 1000 + 2000);
  CHECK_THROWS_AS(m.advance_turntable(1, 2999), MechanismError);
  m.advance_turntable(1, 3000);  // released exactly at busy-until
  CHECK(m.turntable().current_slot == 2);
  // slot 1 now sits at the dispense station but carries no sample
  CHECK(m.at_dispense_station(1));
  CHECK_THROWS_AS(m.dispense("water", 5, 1, 3000), MechanismError);
}

TEST_CASE("reservoir exhaustion is an error, not a silent short pour",
          "[mechanism]") {
  MechanismConfig cfg;
  cfg.reservoir_ml = 30;
  Mechanism m(cfg);
  SoilSample s;
  s.mass_g = 10;
  m.deposit_sample(s, 0);
  m.advance_turntable(1, 0);
  m.dispense("nessler", 20, 0, 0);
  CHECK_THROWS_AS(m.dispense("nessler", 20, 0, 5000), MechanismError);
  CHECK(m.reservoir_ml("nessler") == 10);  // untouched by the failed pour
}
