#include <catch2/catch_amalgamated.hpp>
#include <cstdint>
#include <vector>

#include "astrolab/rng.hpp"
#include "astrolab/telemetry.hpp"

using namespace astrolab;

namespace {

// Independent per-bit CRC-32/IEEE for cross-checking the table-driven one.
std::uint32_t crc32_bitwise(const std::uint8_t* data, std::size_t len) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) {
    crc ^= data[i];
    for (int k = 0; k < 8; ++k)
      crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

std::string random_ident(NoiseRng& rng, std::size_t max_len) {
  static const char alphabet[] =
      "abcdefghijklmnopqrstuvwxyz_0123456789";
  std::string s;
  const std::size_t n = static_cast<std::size_t>(rng.unit() * max_len);
  for (std::size_t i = 0; i < n; ++i)
    s += alphabet[static_cast<std::size_t>(rng.unit() * (sizeof alphabet - 1))];
  return s;
}

Message random_message(NoiseRng& rng) {
  switch (static_cast<int>(rng.unit() * 7)) {
    case 0: {
      SensorFrameMsg m;
      m.frame.t_ms = static_cast<std::int64_t>(rng.unit() * 1e12);
      m.frame.rgb = {static_cast<std::uint8_t>(rng.unit() * 256),
                     static_cast<std::uint8_t>(rng.unit() * 256),
                     static_cast<std::uint8_t>(rng.unit() * 256)};
      m.frame.alcohol_detected = rng.unit() < 0.5;
      m.frame.co2_ppm = rng.centered(1000);
      m.frame.formaldehyde_ppm = rng.centered(10);
      m.frame.humidity_pct = rng.unit() * 100;
      m.frame.ammonia_ppm = rng.centered(5);
      m.frame.soil_moisture_pct = rng.unit() * 100;
      m.frame.ph = rng.unit() * 14;
      m.frame.faults = static_cast<std::uint8_t>(rng.unit() * 8);
      return m;
    }
    case 1: {
      AssayResultMsg m;
      m.target = random_ident(rng, 24);
      m.result.kind = static_cast<AssayKind>(rng.unit() * 3);
      m.result.detected = rng.unit() < 0.5;
      m.result.bin_index = static_cast<int>(rng.unit() * 6);
      m.result.elapsed_ms = static_cast<std::int64_t>(rng.unit() * 1e9);
      m.result.contaminated_input = rng.unit() < 0.3;
      return m;
    }
    case 2: {
      LifeVerdictMsg m;
      m.target = random_ident(rng, 24);
      m.verdict.verdict = static_cast<Verdict>(rng.unit() * 3);
      m.verdict.contaminated_evidence = rng.unit() < 0.3;
      return m;
    }
    case 3: {
      LogEventMsg m;
      m.line = "t=0 seq=0 ev=" + random_ident(rng, 200);
      return m;
    }
    case 4: {
      AckMsg m;
      m.ack_id = static_cast<std::uint64_t>(rng.unit() * 1e15);
      return m;
    }
    case 5: {
      CmdStartMsg m;
      m.mission_id = random_ident(rng, 32);
      return m;
    }
    default: {
      CmdAbortMsg m;
      m.reason = random_ident(rng, 64);
      return m;
    }
  }
}

}  // namespace

TEST_CASE("crc32 known answers", "[telemetry]") {
  const std::uint8_t check[] = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
  CHECK(crc32(check, 9) == 0xCBF43926u);
  CHECK(crc32(nullptr, 0) == 0x00000000u);
  const std::uint8_t zeros[4] = {0, 0, 0, 0};
  CHECK(crc32(zeros, 4) == 0x2144DF1Cu);
}

TEST_CASE("crc32 agrees with a bitwise reference", "[telemetry]") {
  NoiseRng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint8_t> buf(
        static_cast<std::size_t>(rng.unit() * 300));
    for (auto& b : buf) b = static_cast<std::uint8_t>(rng.unit() * 256);
    REQUIRE(crc32(buf.data(), buf.size()) ==
            crc32_bitwise(buf.data(), buf.size()));
  }
}

TEST_CASE("frame sizes: ack is 20 bytes, sensor frame is 73", "[telemetry]") {
  const auto ack = encode(AckMsg{7});
  CHECK(ack.size() == 20);  // 8 header + 8 payload + 4 crc
  const auto frame = encode(SensorFrameMsg{});
  CHECK(frame.size() == 73);  // 61-byte payload
  CHECK(frame[0] == 0x4D);
  CHECK(frame[1] == 0x52);
  CHECK(frame[2] == 0x01);
  CHECK(frame[3] == kMsgSensorFrame);
}

TEST_CASE("encoding is canonical", "[telemetry]") {
  NoiseRng rng(7);
  for (int i = 0; i < 50; ++i) {
    const Message m = random_message(rng);
    CHECK(encode(m) == encode(m));
  }
}

TEST_CASE("decode inverts encode across all message types", "[telemetry]") {
  NoiseRng rng(20240816);
  for (int trial = 0; trial < 1200; ++trial) {
    const Message m = random_message(rng);
    const auto frame = encode(m);
    const DecodeResult r = decode(frame);
    REQUIRE(r.status == DecodeStatus::Ok);
    REQUIRE(r.consumed == frame.size());
    REQUIRE(r.msg == m);
  }
}

TEST_CASE("oversized strings cannot be framed", "[telemetry]") {
  LogEventMsg big;
  big.line.assign(70'000, 'x');
  CHECK_THROWS_AS(encode(big), EncodeError);
  big.line.assign(65'535, 'x');
  CHECK_THROWS_AS(encode(big), EncodeError);  // payload 65537 > cap
}

TEST_CASE("short buffers ask for more data", "[telemetry]") {
  const auto frame = encode(AckMsg{1});
  for (std::size_t n = 0; n < frame.size(); ++n) {
    const DecodeResult r = decode(frame.data(), n);
    REQUIRE(r.status == DecodeStatus::NeedMore);
  }
  CHECK(decode(frame.data(), frame.size()).status == DecodeStatus::Ok);
}

TEST_CASE("trailing bytes are left unconsumed", "[telemetry]") {
  auto frame = encode(CmdStartMsg{"m1"});
  const std::size_t flen = frame.size();
  frame.insert(frame.end(), {0xDE, 0xAD, 0xBE, 0xEF});
  const DecodeResult r = decode(frame);
  REQUIRE(r.status == DecodeStatus::Ok);
  CHECK(r.consumed == flen);
}

TEST_CASE("every single-bit flip is rejected", "[telemetry]") {
  AssayResultMsg m;
  m.target = "dextrose_mid";
  m.result.kind = AssayKind::Carbohydrate;
  m.result.detected = true;
  m.result.bin_index = 2;
  m.result.elapsed_ms = 300'000;
  const auto frame = encode(m);
  const DecodeResult clean = decode(frame);
  REQUIRE(clean.status == DecodeStatus::Ok);

  for (std::size_t byte = 0; byte < frame.size(); ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      auto bent = frame;
      bent[byte] = static_cast<std::uint8_t>(bent[byte] ^ (1u << bit));
      const DecodeResult r = decode(bent);
      // NeedMore (inflated length) and Error are both honest rejections;
      // silently decoding a different message is the failure mode.
      REQUIRE(r.status != DecodeStatus::Ok);
    }
  }
}

TEST_CASE("garbage decodes", "[telemetry]") {
  const std::uint8_t junk[] = {0x00, 0x11, 0x22, 0x33, 0x44, 0x55};
  CHECK(decode(junk, sizeof junk).status == DecodeStatus::Error);
  // right magic, absurd length field
  const std::uint8_t liar[] = {0x4D, 0x52, 0x01, 0x05,
                               0xFF, 0xFF, 0xFF, 0xFF};
  CHECK(decode(liar, sizeof liar).status == DecodeStatus::Error);
  // wrong version
  const std::uint8_t vers[] = {0x4D, 0x52, 0x09, 0x05, 0, 0, 0, 0};
  CHECK(decode(vers, sizeof vers).status == DecodeStatus::Error);
}

TEST_CASE("stream decoding is chunking-invariant", "[telemetry]") {
  NoiseRng rng(55);
  std::vector<Message> sent;
  std::vector<std::uint8_t> wire;
  for (int i = 0; i < 60; ++i) {
    sent.push_back(random_message(rng));
    const auto f = encode(sent.back());
    wire.insert(wire.end(), f.begin(), f.end());
  }

  const auto run = [&](std::size_t chunk) {
    StreamDecoder dec;
    std::vector<Message> got;
    for (std::size_t off = 0; off < wire.size(); off += chunk)
      dec.feed(wire.data() + off, std::min(chunk, wire.size() - off),
               [&](const Message& m) { got.push_back(m); });
    REQUIRE(dec.rejected() == 0);
    return got;
  };

  for (const std::size_t chunk : {std::size_t{1}, std::size_t{7},
                                  std::size_t{64}, wire.size()}) {
    const auto got = run(chunk);
    REQUIRE(got.size() == sent.size());
    for (std::size_t i = 0; i < sent.size(); ++i) REQUIRE(got[i] == sent[i]);
  }

  // random chunk boundaries
  for (int trial = 0; trial < 20; ++trial) {
    StreamDecoder dec;
    std::vector<Message> got;
    std::size_t off = 0;
    while (off < wire.size()) {
      const std::size_t n =
          std::min<std::size_t>(1 + static_cast<std::size_t>(rng.unit() * 97),
                                wire.size() - off);
      dec.feed(wire.data() + off, n,
               [&](const Message& m) { got.push_back(m); });
      off += n;
    }
    REQUIRE(got.size() == sent.size());
    for (std::size_t i = 0; i < sent.size(); ++i) REQUIRE(got[i] == sent[i]);
  }
}

TEST_CASE("stream decoder resyncs past a corrupt frame", "[telemetry]") {
  const auto a = encode(CmdStartMsg{"alpha"});
  auto b = encode(LogEventMsg{"t=1 seq=4 ev=beacon"});
  const auto c = encode(AckMsg{9});
  b[2] ^= 0x40;  // wreck the version byte; magic stays intact

  std::vector<std::uint8_t> wire;
  for (const std::vector<std::uint8_t>* f :
       {&a, static_cast<const std::vector<std::uint8_t>*>(&b), &c})
    wire.insert(wire.end(), f->begin(), f->end());

  StreamDecoder dec;
  std::vector<Message> got;
  dec.feed(wire.data(), wire.size(),
           [&](const Message& m) { got.push_back(m); });
  REQUIRE(got.size() == 2);
  CHECK(got[0] == Message{CmdStartMsg{"alpha"}});
  CHECK(got[1] == Message{AckMsg{9}});
  CHECK(dec.rejected() == 1);
}
