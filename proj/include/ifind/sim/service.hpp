#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ifind/sim/simulation.hpp"

namespace ifind::sim {

/// Outbound message queue of one client. Telemetry is bounded: when full,
/// frames are dropped and the next delivered message is a gap marker
/// {"type":"gap","missed":n}. Replies are never dropped.
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  void push_frame(std::string line);
  void push_reply(std::string line);
  /// Next message, or nullopt on timeout / after close() once drained.
  std::optional<std::string> pop(std::chrono::milliseconds timeout);
  void close();
  bool closed() const;
  std::size_t dropped() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  struct Item {
    std::string line;
    bool frame;
  };
  std::deque<Item> queue_;
  std::size_t capacity_;
  std::size_t frames_ = 0;   // telemetry frames currently queued
  std::size_t missed_ = 0;   // dropped since the last gap marker
  std::size_t dropped_ = 0;  // total
  bool closed_ = false;
};

/// Thread-safe host of one Simulation: FIFO command intake from many
/// clients, one loop thread, broadcast telemetry.
class SimService {
 public:
  explicit SimService(SimConfig config, std::optional<std::filesystem::path> log_path = std::nullopt);
  ~SimService();
  SimService(const SimService&) = delete;
  SimService& operator=(const SimService&) = delete;

  /// Queues a command; its reply goes to `reply_to` (may be null).
  void submit(Command c, std::shared_ptr<Subscription> reply_to);
  std::shared_ptr<Subscription> subscribe(std::size_t capacity = 256);
  void unsubscribe(const std::shared_ptr<Subscription>& s);

  /// Advances one tick on the caller's thread. Not to be mixed with start().
  void step_once();
  /// Runs the loop in real time (one tick per dt) until stop().
  void start();
  void stop();

  std::uint64_t tick() const;
  nlohmann::json describe() const;
  double dt() const { return dt_; }

 private:
  void step_locked();

  mutable std::mutex mu_;
  Simulation sim_;
  double dt_;
  std::deque<std::weak_ptr<Subscription>> reply_routes_;
  std::vector<std::shared_ptr<Subscription>> subscribers_;
  std::optional<session::SessionWriter> writer_;
  std::thread loop_;
  std::atomic<bool> running_{false};
};

}  // namespace ifind::sim
