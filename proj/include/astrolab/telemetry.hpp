#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <variant>
#include <vector>

#include "astrolab/assay_engine.hpp"
#include "astrolab/life_classifier.hpp"
#include "astrolab/sensor_suite.hpp"

namespace astrolab {

// Frame layout: 4D 52 | version 01 | msg_type | length u32 BE | payload |
// crc32 u32 BE over everything before it. See docs/wire_format.md.
inline constexpr std::uint8_t kMagic0 = 0x4D;
inline constexpr std::uint8_t kMagic1 = 0x52;
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kMaxPayload = 65'536;
inline constexpr std::size_t kFrameOverhead = 12;  // header 8 + crc 4

enum : std::uint8_t {
  kMsgSensorFrame = 0x01,
  kMsgAssayResult = 0x02,
  kMsgLifeVerdict = 0x03,
  kMsgLogEvent = 0x04,
  kMsgAck = 0x05,
  kMsgCmdStart = 0x81,
  kMsgCmdAbort = 0x82,
};

namespace detail {

inline constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k)
      c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

inline constexpr std::array<std::uint32_t, 256> kCrcTable = make_crc_table();

}  // namespace detail

/// CRC-32/IEEE: reflected, init all-ones, final xor all-ones.
/// crc32("123456789") = 0xCBF43926.
inline std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i)
    c = detail::kCrcTable[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

inline std::uint32_t crc32(const std::vector<std::uint8_t>& data) {
  return crc32(data.data(), data.size());
}

struct SensorFrameMsg {
  SensorFrame frame;
  friend bool operator==(const SensorFrameMsg&,
                         const SensorFrameMsg&) = default;
};

struct AssayResultMsg {
  std::string target;
  AssayResult result;
  friend bool operator==(const AssayResultMsg&,
                         const AssayResultMsg&) = default;
};

struct LifeVerdictMsg {
  std::string target;
  LifeVerdict verdict;
  friend bool operator==(const LifeVerdictMsg&,
                         const LifeVerdictMsg&) = default;
};

struct LogEventMsg {
  std::string line;  // one mission-log line, no trailing newline
  friend bool operator==(const LogEventMsg&, const LogEventMsg&) = default;
};

struct AckMsg {
  std::uint64_t ack_id = 0;
  friend bool operator==(const AckMsg&, const AckMsg&) = default;
};

struct CmdStartMsg {
  std::string mission_id;
  friend bool operator==(const CmdStartMsg&, const CmdStartMsg&) = default;
};

struct CmdAbortMsg {
  std::string reason;
  friend bool operator==(const CmdAbortMsg&, const CmdAbortMsg&) = default;
};

using Message = std::variant<SensorFrameMsg, AssayResultMsg, LifeVerdictMsg,
                             LogEventMsg, AckMsg, CmdStartMsg, CmdAbortMsg>;

class EncodeError : public std::runtime_error {
 public:
  explicit EncodeError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  if (s.size() > 0xFFFF)
    throw EncodeError("string field over 65535 bytes");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t len) : data_(data), len_(len) {}

  bool ok() const { return ok_; }
  bool exhausted() const { return pos_ == len_; }

  std::uint8_t u8() {
    if (!need(1)) return 0;
    return data_[pos_++];
  }
  std::uint16_t u16() {
    if (!need(2)) return 0;
    std::uint16_t v = static_cast<std::uint16_t>(
        (static_cast<std::uint16_t>(data_[pos_]) << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint64_t u64() {
    if (!need(8)) return 0;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint16_t n = u16();
    if (!need(n)) return {};
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  bool need(std::size_t n) {
    if (!ok_ || len_ - pos_ < n) {
      ok_ = false;
      return false;
    }
    return true;
  }

  const std::uint8_t* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
  bool ok_ = true;
};

inline std::vector<std::uint8_t> encode_payload(const Message& msg,
                                                std::uint8_t& msg_type) {
  std::vector<std::uint8_t> p;
  if (const auto* m = std::get_if<SensorFrameMsg>(&msg)) {
    msg_type = kMsgSensorFrame;
    put_u64(p, static_cast<std::uint64_t>(m->frame.t_ms));
    p.push_back(m->frame.rgb.r);
    p.push_back(m->frame.rgb.g);
    p.push_back(m->frame.rgb.b);
    p.push_back(m->frame.alcohol_detected ? 1 : 0);
    put_f64(p, m->frame.co2_ppm);
    put_f64(p, m->frame.formaldehyde_ppm);
    put_f64(p, m->frame.humidity_pct);
    put_f64(p, m->frame.ammonia_ppm);
    put_f64(p, m->frame.soil_moisture_pct);
    put_f64(p, m->frame.ph);
    p.push_back(m->frame.faults);
  } else if (const auto* m = std::get_if<AssayResultMsg>(&msg)) {
    msg_type = kMsgAssayResult;
    put_string(p, m->target);
    p.push_back(static_cast<std::uint8_t>(m->result.kind));
    p.push_back(m->result.detected ? 1 : 0);
    put_u16(p, static_cast<std::uint16_t>(m->result.bin_index));
    put_u64(p, static_cast<std::uint64_t>(m->result.elapsed_ms));
    p.push_back(m->result.contaminated_input ? 1 : 0);
  } else if (const auto* m = std::get_if<LifeVerdictMsg>(&msg)) {
    msg_type = kMsgLifeVerdict;
    put_string(p, m->target);
    p.push_back(static_cast<std::uint8_t>(m->verdict.verdict));
    p.push_back(m->verdict.contaminated_evidence ? 1 : 0);
  } else if (const auto* m = std::get_if<LogEventMsg>(&msg)) {
    msg_type = kMsgLogEvent;
    put_string(p, m->line);
  } else if (const auto* m = std::get_if<AckMsg>(&msg)) {
    msg_type = kMsgAck;
    put_u64(p, m->ack_id);
  } else if (const auto* m = std::get_if<CmdStartMsg>(&msg)) {
    msg_type = kMsgCmdStart;
    put_string(p, m->mission_id);
  } else if (const auto* m = std::get_if<CmdAbortMsg>(&msg)) {
    msg_type = kMsgCmdAbort;
    put_string(p, m->reason);
  } else {
    throw EncodeError("unhandled message alternative");
  }
  return p;
}

}  // namespace detail

/// Canonical frame bytes: one message, one byte sequence.
inline std::vector<std::uint8_t> encode(const Message& msg) {
  std::uint8_t msg_type = 0;
  const std::vector<std::uint8_t> payload =
      detail::encode_payload(msg, msg_type);
  if (payload.size() > kMaxPayload)
    throw EncodeError("payload of " + std::to_string(payload.size()) +
                      " bytes exceeds the 65536-byte cap");
  std::vector<std::uint8_t> frame;
  frame.reserve(payload.size() + kFrameOverhead);
  frame.push_back(kMagic0);
  frame.push_back(kMagic1);
  frame.push_back(kWireVersion);
  frame.push_back(msg_type);
  detail::put_u32(frame, static_cast<std::uint32_t>(payload.size()));
  frame.insert(frame.end(), payload.begin(), payload.end());
  detail::put_u32(frame, crc32(frame.data(), frame.size()));
  return frame;
}

enum class DecodeStatus { Ok, NeedMore, Error };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::Error;
  Message msg;
  std::size_t consumed = 0;  // bytes of one frame when Ok, else 0
  std::string error;
};

namespace detail {

inline DecodeResult decode_error(const std::string& why) {
  DecodeResult r;
  r.status = DecodeStatus::Error;
  r.error = why;
  return r;
}

}  // namespace detail

/// Decodes one frame from the head of `data`. Trailing bytes are never
/// consumed; a short buffer yields NeedMore rather than an error.
inline DecodeResult decode(const std::uint8_t* data, std::size_t len) {
  if (len < 2) {
    DecodeResult r;
    r.status = DecodeStatus::NeedMore;
    return r;
  }
  if (data[0] != kMagic0 || data[1] != kMagic1)
    return detail::decode_error("bad magic");
  if (len < kFrameOverhead - 4) {  // through the length field
    DecodeResult r;
    r.status = DecodeStatus::NeedMore;
    return r;
  }
  if (data[2] != kWireVersion)
    return detail::decode_error("unsupported version " +
                                std::to_string(data[2]));
  const std::uint8_t msg_type = data[3];
  std::uint32_t length = 0;
  for (int i = 0; i < 4; ++i) length = (length << 8) | data[4 + i];
  if (length > kMaxPayload)
    return detail::decode_error("length " + std::to_string(length) +
                                " over the payload cap");
  const std::size_t total = kFrameOverhead + length;
  if (len < total) {
    DecodeResult r;
    r.status = DecodeStatus::NeedMore;
    return r;
  }
  std::uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i)
    stored_crc = (stored_crc << 8) | data[total - 4 + i];
  if (crc32(data, total - 4) != stored_crc)
    return detail::decode_error("crc mismatch");

  detail::Reader rd(data + 8, length);
  DecodeResult r;
  r.status = DecodeStatus::Ok;
  r.consumed = total;
  switch (msg_type) {
    case kMsgSensorFrame: {
      SensorFrameMsg m;
      m.frame.t_ms = static_cast<std::int64_t>(rd.u64());
      m.frame.rgb.r = rd.u8();
      m.frame.rgb.g = rd.u8();
      m.frame.rgb.b = rd.u8();
      m.frame.alcohol_detected = rd.u8() != 0;
      m.frame.co2_ppm = rd.f64();
      m.frame.formaldehyde_ppm = rd.f64();
      m.frame.humidity_pct = rd.f64();
      m.frame.ammonia_ppm = rd.f64();
      m.frame.soil_moisture_pct = rd.f64();
      m.frame.ph = rd.f64();
      m.frame.faults = rd.u8();
      r.msg = m;
      break;
    }
    case kMsgAssayResult: {
      AssayResultMsg m;
      m.target = rd.str();
      const std::uint8_t kind = rd.u8();
      if (kind > 2) return detail::decode_error("assay kind out of range");
      m.result.kind = static_cast<AssayKind>(kind);
      m.result.detected = rd.u8() != 0;
      m.result.bin_index = rd.u16();
      m.result.elapsed_ms = static_cast<std::int64_t>(rd.u64());
      m.result.contaminated_input = rd.u8() != 0;
      r.msg = m;
      break;
    }
    case kMsgLifeVerdict: {
      LifeVerdictMsg m;
      m.target = rd.str();
      const std::uint8_t v = rd.u8();
      if (v > 2) return detail::decode_error("verdict out of range");
      m.verdict.verdict = static_cast<Verdict>(v);
      m.verdict.contaminated_evidence = rd.u8() != 0;
      r.msg = m;
      break;
    }
    case kMsgLogEvent: {
      LogEventMsg m;
      m.line = rd.str();
      r.msg = m;
      break;
    }
    case kMsgAck: {
      AckMsg m;
      m.ack_id = rd.u64();
      r.msg = m;
      break;
    }
    case kMsgCmdStart: {
      CmdStartMsg m;
      m.mission_id = rd.str();
      r.msg = m;
      break;
    }
    case kMsgCmdAbort: {
      CmdAbortMsg m;
      m.reason = rd.str();
      r.msg = m;
      break;
    }
    default:
      return detail::decode_error("unknown msg_type " +
                                  std::to_string(msg_type));
  }
  if (!rd.ok() || !rd.exhausted())
    return detail::decode_error("payload length does not match msg_type");
  return r;
}

inline DecodeResult decode(const std::vector<std::uint8_t>& data) {
  return decode(data.data(), data.size());
}

/// Incremental stream decoder: identical message sequence for any chunking
/// of the same bytes. On a corrupt frame it drops bytes up to the next
/// plausible frame start and counts the rejection.
class StreamDecoder {
 public:
  template <typename OnMessage>
  void feed(const std::uint8_t* data, std::size_t len, OnMessage&& on_msg) {
    buf_.insert(buf_.end(), data, data + len);
    std::size_t off = 0;
    for (;;) {
      const DecodeResult r = decode(buf_.data() + off, buf_.size() - off);
      if (r.status == DecodeStatus::Ok) {
        on_msg(r.msg);
        off += r.consumed;
      } else if (r.status == DecodeStatus::NeedMore) {
        break;
      } else {
        ++rejected_;
        const std::size_t next = resync_offset(off);
        if (next == buf_.size() && buf_[buf_.size() - 1] == kMagic0) {
          // keep a trailing half-magic byte for the next chunk
          off = buf_.size() - 1;
          break;
        }
        off = next;
      }
    }
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(off));
  }

  std::uint64_t rejected() const { return rejected_; }

 private:
  std::size_t resync_offset(std::size_t off) const {
    for (std::size_t i = off + 1; i + 1 < buf_.size(); ++i)
      if (buf_[i] == kMagic0 && buf_[i + 1] == kMagic1) return i;
    return buf_.size();
  }

  std::vector<std::uint8_t> buf_;
  std::uint64_t rejected_ = 0;
};

}  // namespace astrolab
