#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "astrolab/text_config.hpp"

namespace astrolab {

class MalformedLogError : public std::runtime_error {
 public:
  MalformedLogError(std::size_t line, const std::string& what)
      : std::runtime_error("log line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct MissionLogRecord {
  std::int64_t t_ms = 0;
  std::uint64_t seq = 0;
  std::string event;
  std::vector<std::pair<std::string, std::string>> kv;

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : kv)
      if (k == key) return &v;
    return nullptr;
  }
};

namespace logfmt {

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string num(std::int64_t v) { return std::to_string(v); }

/// `t=<ms> seq=<n> ev=<IDENT> k=v ...` — single line, no trailing newline.
/// Values may not contain spaces; offenders are rejected at write time.
inline std::string format_record(const MissionLogRecord& rec) {
  std::string line = "t=" + std::to_string(rec.t_ms) +
                     " seq=" + std::to_string(rec.seq) + " ev=" + rec.event;
  for (const auto& [k, v] : rec.kv) {
    if (v.find(' ') != std::string::npos ||
        v.find('\n') != std::string::npos)
      throw std::logic_error("log value for key " + k + " contains spaces");
    line += " " + k + "=" + v;
  }
  return line;
}

inline MissionLogRecord parse_record(const std::string& line,
                                     std::size_t line_no) {
  MissionLogRecord rec;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos >= line.size()) break;
    const std::size_t end = line.find(' ', pos);
    const std::string token =
        line.substr(pos, end == std::string::npos ? end : end - pos);
    pos = end == std::string::npos ? line.size() : end + 1;
    const std::size_t eq = token.find('=');
    if (eq == std::string::npos || eq == 0)
      throw MalformedLogError(line_no, "token `" + token + "` is not k=v");
    pairs.emplace_back(token.substr(0, eq), token.substr(eq + 1));
  }
  if (pairs.size() < 3 || pairs[0].first != "t" || pairs[1].first != "seq" ||
      pairs[2].first != "ev")
    throw MalformedLogError(line_no, "record must start `t= seq= ev=`");
  try {
    rec.t_ms = parse_int(pairs[0].second, line_no);
    rec.seq = static_cast<std::uint64_t>(parse_int(pairs[1].second, line_no));
  } catch (const ParseError& e) {
    throw MalformedLogError(line_no, e.what());
  }
  rec.event = pairs[2].second;
  if (rec.event.empty()) throw MalformedLogError(line_no, "empty event");
  rec.kv.assign(pairs.begin() + 3, pairs.end());
  return rec;
}

}  // namespace logfmt

struct MissionLog {
  std::vector<MissionLogRecord> records;

  std::string to_text() const {
    std::string out;
    for (const auto& rec : records) out += logfmt::format_record(rec) + "\n";
    return out;
  }
};

/// Parses a full log text, enforcing contiguous sequence numbers from 0 and
/// a non-decreasing clock. Truncation (an unterminated final line) and
/// reordering are errors, naming the offending line.
inline MissionLog parse_log(const std::string& text) {
  MissionLog log;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos)
      throw MalformedLogError(line_no, "truncated record (missing newline)");
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    MissionLogRecord rec = logfmt::parse_record(line, line_no);
    if (rec.seq != log.records.size())
      throw MalformedLogError(line_no, "sequence gap: expected " +
                                           std::to_string(log.records.size()) +
                                           ", got " + std::to_string(rec.seq));
    if (!log.records.empty() && rec.t_ms < log.records.back().t_ms)
      throw MalformedLogError(line_no, "clock went backwards");
    log.records.push_back(std::move(rec));
  }
  return log;
}

struct TargetSummary {
  std::string name;
  std::string verdict;  // Extant | Extinct | NoPresenceOfLife | skipped
  bool contaminated = false;
  bool skipped = false;
  std::string skip_reason;

  friend bool operator==(const TargetSummary&, const TargetSummary&) = default;
};

struct AssaySummary {
  std::string target;
  std::string kind;
  bool detected = false;
  int bin = 0;
  std::int64_t elapsed_ms = 0;
  bool contaminated = false;

  friend bool operator==(const AssaySummary&, const AssaySummary&) = default;
};

struct RockSummary {
  std::string name;
  std::string rock_id;
  std::string rock_type;
  bool fossil = false;
  std::string classifier;

  friend bool operator==(const RockSummary&, const RockSummary&) = default;
};

struct DutySummary {
  std::string actuator;
  std::int64_t total_on_ms = 0;
  std::int64_t peak_window_on_ms = 0;  // worst rolling 1,200,000 ms window

  friend bool operator==(const DutySummary&, const DutySummary&) = default;
};

struct MissionSummary {
  std::string status;  // completed | aborted
  std::int64_t t_end_ms = 0;
  std::vector<TargetSummary> targets;
  std::vector<AssaySummary> assays;
  std::vector<RockSummary> rocks;
  std::vector<DutySummary> duty;

  friend bool operator==(const MissionSummary&, const MissionSummary&) = default;

  std::string to_text() const {
    std::string out;
    std::size_t skipped = 0;
    for (const auto& t : targets) skipped += t.skipped ? 1 : 0;
    out += "mission status=" + status +
           " t_end_ms=" + std::to_string(t_end_ms) +
           " targets=" + std::to_string(targets.size()) +
           " skipped=" + std::to_string(skipped) +
           " rocks=" + std::to_string(rocks.size()) + "\n";
    for (const auto& t : targets) {
      if (t.skipped) {
        out += "target name=" + t.name + " verdict=skipped reason=" +
               t.skip_reason + "\n";
      } else {
        out += "target name=" + t.name + " verdict=" + t.verdict +
               " contaminated=" + (t.contaminated ? "true" : "false") + "\n";
      }
    }
    for (const auto& a : assays)
      out += "assay target=" + a.target + " kind=" + a.kind +
             " detected=" + (a.detected ? "true" : "false") +
             " bin=" + std::to_string(a.bin) +
             " elapsed_ms=" + std::to_string(a.elapsed_ms) +
             " contaminated=" + (a.contaminated ? "true" : "false") + "\n";
    for (const auto& r : rocks)
      out += "rock name=" + r.name + " id=" + r.rock_id + " type=" +
             r.rock_type + " fossil=" + (r.fossil ? "true" : "false") +
             " classifier=" + r.classifier + "\n";
    for (const auto& d : duty)
      out += "duty actuator=" + d.actuator +
             " total_on_ms=" + std::to_string(d.total_on_ms) +
             " peak_window_on_ms=" + std::to_string(d.peak_window_on_ms) +
             "\n";
    return out;
  }
};

namespace detail {

inline bool log_flag(const MissionLogRecord& rec, const char* key) {
  const std::string* v = rec.find(key);
  return v && (*v == "1" || *v == "true");
}

inline std::int64_t log_int(const MissionLogRecord& rec, const char* key,
                            std::size_t line_no) {
  const std::string* v = rec.find(key);
  if (!v) throw MalformedLogError(line_no, std::string("missing key ") + key);
  return parse_int(*v, line_no);
}

inline std::string log_str(const MissionLogRecord& rec, const char* key,
                           std::size_t line_no) {
  const std::string* v = rec.find(key);
  if (!v) throw MalformedLogError(line_no, std::string("missing key ") + key);
  return *v;
}

/// Worst-case on-time over any rolling window of `window_ms`. Candidate
/// window ends: every interval end (a maximum is attained there).
inline std::int64_t peak_window_on(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& intervals,
    std::int64_t window_ms) {
  std::int64_t peak = 0;
  for (const auto& anchor : intervals) {
    const std::int64_t w_end = anchor.second;
    const std::int64_t w_start = w_end - window_ms;
    std::int64_t total = 0;
    for (const auto& [s, e] : intervals) {
      const std::int64_t lo = std::max(s, w_start);
      const std::int64_t hi = std::min(e, w_end);
      if (hi > lo) total += hi - lo;
    }
    peak = std::max(peak, total);
  }
  return peak;
}

}  // namespace detail

/// Recomputes the mission summary from log records alone. A live run's
/// summary is produced by replaying its own log, so report and replay can
/// never drift apart.
inline MissionSummary replay(const MissionLog& log,
                             std::int64_t duty_window_ms = 1'200'000) {
  MissionSummary summary;
  std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>>
      duty_intervals;
  std::vector<std::string> actuator_order;
  bool ended = false;

  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const MissionLogRecord& rec = log.records[i];
    const std::size_t line_no = i + 1;
    if (rec.event == "VERDICT") {
      TargetSummary t;
      t.name = detail::log_str(rec, "target", line_no);
      t.verdict = detail::log_str(rec, "verdict", line_no);
      t.contaminated = detail::log_flag(rec, "contaminated");
      summary.targets.push_back(std::move(t));
    } else if (rec.event == "SKIP") {
      TargetSummary t;
      t.name = detail::log_str(rec, "target", line_no);
      t.skipped = true;
      t.verdict = "skipped";
      t.skip_reason = detail::log_str(rec, "reason", line_no);
      summary.targets.push_back(std::move(t));
    } else if (rec.event == "ASSAY_RESULT") {
      AssaySummary a;
      a.target = detail::log_str(rec, "target", line_no);
      a.kind = detail::log_str(rec, "kind", line_no);
      a.detected = detail::log_flag(rec, "detected");
      a.bin = static_cast<int>(detail::log_int(rec, "bin", line_no));
      a.elapsed_ms = detail::log_int(rec, "elapsed_ms", line_no);
      a.contaminated = detail::log_flag(rec, "contaminated");
      summary.assays.push_back(std::move(a));
    } else if (rec.event == "ROCK_CLASS") {
      RockSummary r;
      r.name = detail::log_str(rec, "name", line_no);
      r.rock_id = detail::log_str(rec, "rock", line_no);
      r.rock_type = detail::log_str(rec, "type", line_no);
      r.fossil = detail::log_flag(rec, "fossil");
      r.classifier = detail::log_str(rec, "classifier", line_no);
      summary.rocks.push_back(std::move(r));
    } else if (rec.event == "ACTUATOR_ON") {
      const std::string id = detail::log_str(rec, "id", line_no);
      if (duty_intervals.find(id) == duty_intervals.end())
        actuator_order.push_back(id);
      duty_intervals[id].emplace_back(
          detail::log_int(rec, "start", line_no),
          detail::log_int(rec, "end", line_no));
    } else if (rec.event == "MISSION_END") {
      summary.status = detail::log_str(rec, "status", line_no);
      summary.t_end_ms = rec.t_ms;
      ended = true;
    }
  }
  if (!ended)
    throw MalformedLogError(log.records.size(),
                            "log has no MISSION_END record");
  for (const auto& id : actuator_order) {
    DutySummary d;
    d.actuator = id;
    for (const auto& [s, e] : duty_intervals[id]) d.total_on_ms += e - s;
    d.peak_window_on_ms =
        detail::peak_window_on(duty_intervals[id], duty_window_ms);
    summary.duty.push_back(std::move(d));
  }
  return summary;
}

inline MissionSummary replay(const std::string& log_text,
                             std::int64_t duty_window_ms = 1'200'000) {
  return replay(parse_log(log_text), duty_window_ms);
}

}  // namespace astrolab
