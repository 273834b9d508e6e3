#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "astrolab/color.hpp"
#include "astrolab/env_model.hpp"
#include "astrolab/rng.hpp"
#include "astrolab/text_config.hpp"

namespace astrolab {

class SignalFaultError : public std::runtime_error {
 public:
  explicit SignalFaultError(const std::string& what)
      : std::runtime_error(what) {}
};

class ProbeNotDeployedError : public std::runtime_error {
 public:
  ProbeNotDeployedError()
      : std::runtime_error("ph probe is not deployed") {}
};

struct ColorCal {
  double f_min[3] = {2000, 2000, 2000};
  double f_max[3] = {52000, 52000, 52000};
  double noise = 0.0;  // raw counts, zero-mean amplitude
};

struct GasCal {
  double rl_ohms = 10000.0;
  double ro_ohms = 10000.0;
  double curve_a = 1.0;
  double curve_b = -1.0;
  double vc_volts = 5.0;
  double noise = 0.0;  // volts on v_out
};

struct LinearCal {
  double raw_min = 0.0;
  double raw_max = 1023.0;
  double noise = 0.0;  // raw counts
};

struct SensorCalibration {
  ColorCal color;
  GasCal mq135;  // CO2
  GasCal mq137;  // ammonia
  GasCal mq138;  // formaldehyde
  double alcohol_threshold = 512.0;  // MQ-3 digital trip level
  LinearCal hr202;                   // air humidity
  LinearCal yl69;                    // soil moisture
  double ph_noise = 0.0;
};

// Per-channel fault bits in SensorFrame::faults.
enum : std::uint8_t {
  kFaultCo2 = 1u << 0,
  kFaultFormaldehyde = 1u << 1,
  kFaultAmmonia = 1u << 2,
};

struct SensorFrame {
  std::int64_t t_ms = 0;
  Rgb rgb;
  bool alcohol_detected = false;
  double co2_ppm = 0.0;
  double formaldehyde_ppm = 0.0;
  double humidity_pct = 0.0;
  double ammonia_ppm = 0.0;
  double soil_moisture_pct = 0.0;
  double ph = 7.0;
  std::uint8_t faults = 0;

  friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

struct ImageCapture {
  std::string rock_id;
  Rgb mean_color;
  bool layered = false;
  std::int64_t t_ms = 0;

  friend bool operator==(const ImageCapture&, const ImageCapture&) = default;
};

namespace detail {

inline double require_positive(const std::string& key, double v) {
  if (!(v > 0.0))
    throw ValidationError(key, "must be positive, got " + std::to_string(v));
  return v;
}

inline void load_gas_section(GasCal& cal, const ConfigSection& sec) {
  if (const auto* e = sec.find_last("rl_ohms"))
    cal.rl_ohms = parse_double(e->value, e->line);
  if (const auto* e = sec.find_last("ro_ohms"))
    cal.ro_ohms = parse_double(e->value, e->line);
  if (const auto* e = sec.find_last("curve_a"))
    cal.curve_a = parse_double(e->value, e->line);
  if (const auto* e = sec.find_last("curve_b"))
    cal.curve_b = parse_double(e->value, e->line);
  if (const auto* e = sec.find_last("vc_volts"))
    cal.vc_volts = parse_double(e->value, e->line);
  if (const auto* e = sec.find_last("noise"))
    cal.noise = parse_double(e->value, e->line);
  require_positive(sec.kind + ".rl_ohms", cal.rl_ohms);
  require_positive(sec.kind + ".ro_ohms", cal.ro_ohms);
  require_positive(sec.kind + ".vc_volts", cal.vc_volts);
  if (cal.curve_b == 0.0)
    throw ValidationError(sec.kind + ".curve_b", "must be nonzero");
}

inline void load_linear_section(LinearCal& cal, const ConfigSection& sec) {
  if (const auto* e = sec.find_last("raw_min"))
    cal.raw_min = parse_double(e->value, e->line);
  if (const auto* e = sec.find_last("raw_max"))
    cal.raw_max = parse_double(e->value, e->line);
  if (const auto* e = sec.find_last("noise"))
    cal.noise = parse_double(e->value, e->line);
  if (!(cal.raw_max > cal.raw_min))
    throw ValidationError(sec.kind + ".raw_max",
                          "must exceed raw_min");
}

}  // namespace detail

inline SensorCalibration load_calibration(const std::string& text) {
  SensorCalibration cal;
  for (const auto& sec : parse_sections(text)) {
    if (sec.kind == "color") {
      if (const auto* e = sec.find_last("f_min")) {
        const auto f = split_fields(e->value);
        if (f.size() != 3) throw ParseError(e->line, "f_min wants `r g b`");
        for (int i = 0; i < 3; ++i)
          cal.color.f_min[i] = parse_double(f[i], e->line);
      }
      if (const auto* e = sec.find_last("f_max")) {
        const auto f = split_fields(e->value);
        if (f.size() != 3) throw ParseError(e->line, "f_max wants `r g b`");
        for (int i = 0; i < 3; ++i)
          cal.color.f_max[i] = parse_double(f[i], e->line);
      }
      if (const auto* e = sec.find_last("noise"))
        cal.color.noise = parse_double(e->value, e->line);
      for (int i = 0; i < 3; ++i)
        if (!(cal.color.f_max[i] > cal.color.f_min[i]))
          throw ValidationError("color.f_max", "must exceed f_min");
    } else if (sec.kind == "mq135") {
      detail::load_gas_section(cal.mq135, sec);
    } else if (sec.kind == "mq137") {
      detail::load_gas_section(cal.mq137, sec);
    } else if (sec.kind == "mq138") {
      detail::load_gas_section(cal.mq138, sec);
    } else if (sec.kind == "mq3") {
      if (const auto* e = sec.find_last("threshold"))
        cal.alcohol_threshold = parse_double(e->value, e->line);
    } else if (sec.kind == "hr202") {
      detail::load_linear_section(cal.hr202, sec);
    } else if (sec.kind == "yl69") {
      detail::load_linear_section(cal.yl69, sec);
    } else if (sec.kind == "ph") {
      if (const auto* e = sec.find_last("noise"))
        cal.ph_noise = parse_double(e->value, e->line);
    } else {
      throw ParseError(sec.line, "unknown calibration section [" + sec.kind +
                                     "]");
    }
  }
  return cal;
}

/// Maps one raw frequency count to a byte channel: linear to [0,255],
/// round half away from zero, clamp. Total over all raw values.
inline std::uint8_t map_color_channel(double raw, double f_min, double f_max) {
  const double scaled = 255.0 * (raw - f_min) / (f_max - f_min);
  const double rounded = std::round(scaled);  // half away from zero
  return static_cast<std::uint8_t>(std::clamp(rounded, 0.0, 255.0));
}

inline Rgb map_color_raw(const double raw[3], const ColorCal& cal) {
  return Rgb{map_color_channel(raw[0], cal.f_min[0], cal.f_max[0]),
             map_color_channel(raw[1], cal.f_min[1], cal.f_max[1]),
             map_color_channel(raw[2], cal.f_min[2], cal.f_max[2])};
}

/// Forward MQ transfer: voltage divider to Rs, then power-law ppm.
inline double gas_ppm(double v_out, const GasCal& cal) {
  if (!(v_out > 0.0) || !(v_out < cal.vc_volts))
    throw SignalFaultError("gas sensor v_out " + std::to_string(v_out) +
                           " outside (0, " + std::to_string(cal.vc_volts) +
                           ")");
  const double rs = cal.rl_ohms * (cal.vc_volts - v_out) / v_out;
  const double ratio = rs / cal.ro_ohms;
  return cal.curve_a * std::pow(ratio, cal.curve_b);
}

/// Inverse transfer used to synthesize raw signals from ground truth.
inline double vout_from_ppm(double ppm, const GasCal& cal) {
  const double ratio = std::pow(ppm / cal.curve_a, 1.0 / cal.curve_b);
  const double rs = cal.ro_ohms * ratio;
  return cal.vc_volts * cal.rl_ohms / (cal.rl_ohms + rs);
}

inline bool alcohol_detected(double raw_digital, const SensorCalibration& cal) {
  return raw_digital >= cal.alcohol_threshold;
}

inline double linear_pct(double raw, const LinearCal& cal) {
  const double pct = 100.0 * (raw - cal.raw_min) / (cal.raw_max - cal.raw_min);
  return std::clamp(pct, 0.0, 100.0);
}

inline double humidity_pct(double raw, const SensorCalibration& cal) {
  return linear_pct(raw, cal.hr202);
}

inline double soil_moisture_pct(double raw, const SensorCalibration& cal) {
  return linear_pct(raw, cal.yl69);
}

inline double read_ph(const SiteModel& site, Vec2 position, double depth_cm,
                      const SensorCalibration& cal, NoiseRng& rng,
                      bool probe_deployed) {
  if (!probe_deployed) throw ProbeNotDeployedError();
  const double truth = soil_at(site, position, depth_cm).ph;
  return std::clamp(truth + rng.centered(cal.ph_noise), 0.0, 14.0);
}

namespace detail {

// Concentrations of exactly zero have no finite inverse voltage on a
// power-law curve; synthesize a negligible floor instead of a fault.
inline constexpr double kGasFloorPpm = 1e-6;

inline double synth_gas(double truth_ppm, const GasCal& cal, NoiseRng& rng,
                        double& out_ppm) {
  const double v = vout_from_ppm(std::max(truth_ppm, kGasFloorPpm), cal) +
                   rng.centered(cal.noise);
  out_ppm = gas_ppm(v, cal);  // may throw SignalFaultError
  return v;
}

}  // namespace detail

/// One sensing cycle: synthesize raw signals from ground truth through the
/// inverse transfers, add seeded noise, convert forward. A gas channel whose
/// synthesized voltage leaves (0, vc) sets its fault bit and reads 0; the
/// frame is still produced. Pass the rock under the mast, if any, so its
/// surface gases drive the alcohol/formaldehyde channels.
inline SensorFrame poll_frame(const SiteModel& site, Vec2 rover_pose,
                              std::int64_t t_ms, const SensorCalibration& cal,
                              NoiseRng& rng,
                              const RockProperties* rock = nullptr) {
  SensorFrame frame;
  frame.t_ms = t_ms;

  // Imager target: the rock under the mast, else neutral mid-gray terrain.
  double raw_rgb[3];
  for (int i = 0; i < 3; ++i) {
    const double span = cal.color.f_max[i] - cal.color.f_min[i];
    const double unit = rock ? rock->mean_color[i] / 255.0 : 0.5;
    raw_rgb[i] = cal.color.f_min[i] + unit * span + rng.centered(cal.color.noise);
  }
  frame.rgb = map_color_raw(raw_rgb, cal.color);

  const double alcohol_raw =
      (rock && rock->surface_alcohol) ? cal.alcohol_threshold : 0.0;
  frame.alcohol_detected = alcohol_detected(alcohol_raw, cal);

  const AmbientConditions ambient = gas_at(site, rover_pose);
  try {
    detail::synth_gas(ambient.co2_ppm, cal.mq135, rng, frame.co2_ppm);
  } catch (const SignalFaultError&) {
    frame.faults |= kFaultCo2;
    frame.co2_ppm = 0.0;
  }
  const double formaldehyde_truth =
      rock ? rock->surface_formaldehyde_ppm : 0.0;
  try {
    detail::synth_gas(formaldehyde_truth, cal.mq138, rng,
                      frame.formaldehyde_ppm);
  } catch (const SignalFaultError&) {
    frame.faults |= kFaultFormaldehyde;
    frame.formaldehyde_ppm = 0.0;
  }
  try {
    detail::synth_gas(0.0, cal.mq137, rng, frame.ammonia_ppm);
  } catch (const SignalFaultError&) {
    frame.faults |= kFaultAmmonia;
    frame.ammonia_ppm = 0.0;
  }

  const double humidity_raw =
      cal.hr202.raw_min +
      ambient.humidity_pct / 100.0 * (cal.hr202.raw_max - cal.hr202.raw_min) +
      rng.centered(cal.hr202.noise);
  frame.humidity_pct = humidity_pct(humidity_raw, cal);

  const SoilComposition surface = soil_at(site, rover_pose, 0.0);
  const double moisture_raw =
      cal.yl69.raw_min +
      surface.moisture_pct / 100.0 * (cal.yl69.raw_max - cal.yl69.raw_min) +
      rng.centered(cal.yl69.noise);
  frame.soil_moisture_pct = soil_moisture_pct(moisture_raw, cal);

  frame.ph = std::clamp(surface.ph + rng.centered(cal.ph_noise), 0.0, 14.0);
  return frame;
}

/// Observable rock features only; the fossil ground truth never leaves the
/// environment model.
inline ImageCapture capture_image(const SiteModel& site,
                                  const std::string& rock_id,
                                  std::int64_t t_ms) {
  const RockProperties& rock = rock_at(site, rock_id);
  ImageCapture cap;
  cap.rock_id = rock.id;
  cap.mean_color = Rgb{static_cast<std::uint8_t>(rock.mean_color[0]),
                       static_cast<std::uint8_t>(rock.mean_color[1]),
                       static_cast<std::uint8_t>(rock.mean_color[2])};
  cap.layered = rock.layered;
  cap.t_ms = t_ms;
  return cap;
}

}  // namespace astrolab
