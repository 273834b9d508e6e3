#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <thread>

#include "astrolab/mission_engine.hpp"
#include "astrolab/net.hpp"
#include "astrolab/telemetry.hpp"

namespace astrolab {

/// Rover-side uplink. send() never blocks the mission: messages queue
/// unbounded and a writer thread drains them; a reader thread counts Acks
/// and raises the abort flag when the ground station commands one.
class TelemetryClient : public TelemetrySink {
 public:
  TelemetryClient(const std::string& host, std::uint16_t port)
      : socket_(connect_tcp(host, port)) {
    writer_ = std::thread([this] { writer_loop(); });
    reader_ = std::thread([this] { reader_loop(); });
  }

  ~TelemetryClient() override { close(); }

  void send(const Message& msg) override {
    {
      std::lock_guard lock(mutex_);
      if (closing_ || failed_) return;
      queue_.push_back(msg);
    }
    cv_.notify_one();
  }

  bool abort_requested() const override { return abort_; }
  std::uint64_t acks() const { return acks_; }
  bool failed() const { return failed_; }

  /// Drains the queue, half-closes the stream so the station sees EOF, and
  /// collects remaining Acks until the station closes its side.
  void close() {
    {
      std::lock_guard lock(mutex_);
      if (closing_) return;
      closing_ = true;
    }
    cv_.notify_all();
    if (writer_.joinable()) writer_.join();
    socket_.shutdown_write();
    if (reader_.joinable()) reader_.join();
    socket_.close_fd();
  }

 private:
  void writer_loop() {
    for (;;) {
      Message msg;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return closing_ || !queue_.empty(); });
        if (queue_.empty()) return;  // closing and drained
        msg = std::move(queue_.front());
        queue_.pop_front();
      }
      try {
        const std::vector<std::uint8_t> frame = encode(msg);
        socket_.send_all(frame.data(), frame.size());
      } catch (const NetError&) {
        failed_ = true;
        std::lock_guard lock(mutex_);
        queue_.clear();
        return;
      }
    }
  }

  void reader_loop() {
    StreamDecoder decoder;
    std::uint8_t buf[4096];
    try {
      for (;;) {
        const std::size_t n = socket_.recv_some(buf, sizeof buf);
        if (n == 0) return;
        decoder.feed(buf, n, [this](const Message& msg) {
          if (std::holds_alternative<AckMsg>(msg)) ++acks_;
          if (std::holds_alternative<CmdAbortMsg>(msg)) abort_ = true;
        });
      }
    } catch (const NetError&) {
      failed_ = true;
    }
  }

  Socket socket_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Message> queue_;
  bool closing_ = false;
  std::atomic<bool> abort_{false};
  std::atomic<bool> failed_{false};
  std::atomic<std::uint64_t> acks_{0};
  std::thread writer_;
  std::thread reader_;

};

}  // namespace astrolab
