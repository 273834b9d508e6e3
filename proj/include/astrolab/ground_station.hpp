#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "astrolab/mission_log.hpp"
#include "astrolab/net.hpp"
#include "astrolab/telemetry.hpp"

namespace astrolab {

/// Receives rover telemetry: validates frames, appends each decoded message
/// to a per-connection store file in mission-log line format, and Acks with
/// a per-connection strictly increasing id. Dropping a file named `abort`
/// into the store directory forwards CmdAbort to every connected rover.
class GroundStation {
 public:
  struct Options {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 = ephemeral
    std::string store_dir;
  };

  explicit GroundStation(const Options& options)
      : options_(options), listener_(options.host, options.port) {
    std::filesystem::create_directories(options_.store_dir);
  }

  ~GroundStation() { stop(); }

  std::uint16_t port() const { return listener_.port(); }

  void start() {
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  void stop() {
    if (!running_.exchange(false)) {
      if (accept_thread_.joinable()) accept_thread_.join();
      return;
    }
    listener_.close_fd();
    if (accept_thread_.joinable()) accept_thread_.join();
    {
      std::lock_guard lock(conns_mutex_);
      for (auto& conn : conns_) conn->socket.shutdown_both();
    }
    for (auto& t : conn_threads_)
      if (t.joinable()) t.join();
    conn_threads_.clear();
  }

  std::uint64_t connections() const { return connection_count_; }
  std::uint64_t stored() const { return stored_; }
  std::uint64_t rejected() const { return rejected_; }

 private:
  struct Conn {
    Socket socket;
    std::mutex send_mutex;
    std::atomic<bool> alive{true};
  };

  void accept_loop() {
    std::uint64_t next_index = 0;
    while (running_) {
      check_abort_file();
      auto accepted = listener_.accept_for(50);
      if (!accepted) continue;
      auto conn = std::make_shared<Conn>();
      conn->socket = std::move(*accepted);
      {
        std::lock_guard lock(conns_mutex_);
        conns_.push_back(conn);
      }
      ++connection_count_;
      const std::uint64_t index = next_index++;
      conn_threads_.emplace_back(
          [this, conn, index] { conn_loop(*conn, index); });
    }
  }

  void check_abort_file() {
    const std::filesystem::path path =
        std::filesystem::path(options_.store_dir) / "abort";
    std::error_code ec;
    if (!std::filesystem::exists(path, ec) || abort_forwarded_) return;
    abort_forwarded_ = true;
    std::string reason = "operator_abort";
    {
      std::ifstream in(path);
      std::string line;
      if (std::getline(in, line) && !line.empty()) reason = line;
    }
    const std::vector<std::uint8_t> frame = encode(CmdAbortMsg{reason});
    std::lock_guard lock(conns_mutex_);
    for (auto& conn : conns_) {
      if (!conn->alive) continue;
      try {
        std::lock_guard send_lock(conn->send_mutex);
        conn->socket.send_all(frame.data(), frame.size());
      } catch (const NetError&) {
        conn->alive = false;
      }
    }
  }

  void conn_loop(Conn& conn, std::uint64_t index) {
    std::ofstream store(std::filesystem::path(options_.store_dir) /
                        ("conn_" + std::to_string(index) + ".log"));
    StreamDecoder decoder;
    std::uint64_t ack_id = 0;
    std::uint64_t record_seq = 0;
    std::uint8_t buf[4096];
    const std::uint64_t rejected_before = decoder.rejected();

    try {
      for (;;) {
        const std::size_t n = conn.socket.recv_some(buf, sizeof buf);
        if (n == 0) break;
        decoder.feed(buf, n, [&](const Message& msg) {
          store << store_line(msg, record_seq++) << '\n' << std::flush;
          ++stored_;
          const std::vector<std::uint8_t> ack = encode(AckMsg{++ack_id});
          std::lock_guard send_lock(conn.send_mutex);
          conn.socket.send_all(ack.data(), ack.size());
        });
      }
    } catch (const NetError&) {
      // connection dropped; whatever was stored stays stored
    } catch (const std::ios_base::failure&) {
      // store I/O failure: drop the connection, keep serving others
    }
    rejected_ += decoder.rejected() - rejected_before;
    conn.alive = false;
    // half-close so a client draining Acks sees EOF without waiting for
    // the whole station to stop
    conn.socket.shutdown_both();
  }

  /// Mission-log line for one received message. LogEventMsg lines arrive
  /// already formatted and are kept byte-for-byte.
  static std::string store_line(const Message& msg, std::uint64_t seq) {
    if (const auto* m = std::get_if<LogEventMsg>(&msg)) return m->line;
    MissionLogRecord rec;
    rec.seq = seq;
    if (const auto* m = std::get_if<SensorFrameMsg>(&msg)) {
      rec.t_ms = m->frame.t_ms;
      rec.event = "FRAME";
      rec.kv = {{"rgb", std::to_string(m->frame.rgb.r) + "," +
                            std::to_string(m->frame.rgb.g) + "," +
                            std::to_string(m->frame.rgb.b)},
                {"alcohol", m->frame.alcohol_detected ? "1" : "0"},
                {"co2", logfmt::num(m->frame.co2_ppm)},
                {"formaldehyde", logfmt::num(m->frame.formaldehyde_ppm)},
                {"humidity", logfmt::num(m->frame.humidity_pct)},
                {"ammonia", logfmt::num(m->frame.ammonia_ppm)},
                {"moisture", logfmt::num(m->frame.soil_moisture_pct)},
                {"ph", logfmt::num(m->frame.ph)},
                {"faults", std::to_string(m->frame.faults)}};
    } else if (const auto* m = std::get_if<AssayResultMsg>(&msg)) {
      rec.t_ms = m->result.elapsed_ms;
      rec.event = "ASSAY_RESULT";
      rec.kv = {{"target", m->target},
                {"kind", assay_name(m->result.kind)},
                {"detected", m->result.detected ? "1" : "0"},
                {"bin", std::to_string(m->result.bin_index)},
                {"elapsed_ms", std::to_string(m->result.elapsed_ms)},
                {"contaminated", m->result.contaminated_input ? "1" : "0"}};
    } else if (const auto* m = std::get_if<LifeVerdictMsg>(&msg)) {
      rec.event = "VERDICT";
      rec.kv = {{"target", m->target},
                {"verdict", verdict_name(m->verdict.verdict)},
                {"contaminated",
                 m->verdict.contaminated_evidence ? "1" : "0"}};
    } else if (const auto* m = std::get_if<AckMsg>(&msg)) {
      rec.event = "ACK";
      rec.kv = {{"id", std::to_string(m->ack_id)}};
    } else if (const auto* m = std::get_if<CmdStartMsg>(&msg)) {
      rec.event = "CMD_START";
      rec.kv = {{"mission", m->mission_id}};
    } else if (const auto* m = std::get_if<CmdAbortMsg>(&msg)) {
      rec.event = "CMD_ABORT";
      rec.kv = {{"reason", m->reason}};
    }
    return logfmt::format_record(rec);
  }

  Options options_;
  Listener listener_;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex conns_mutex_;
  std::vector<std::shared_ptr<Conn>> conns_;
  std::vector<std::thread> conn_threads_;
  std::atomic<std::uint64_t> connection_count_{0};
  std::atomic<std::uint64_t> stored_{0};
  std::atomic<std::uint64_t> rejected_{0};
  bool abort_forwarded_ = false;
};

}  // namespace astrolab
