#include "ifind/sim/service.hpp"

#include <algorithm>

namespace ifind::sim {

void Subscription::push_frame(std::string line) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (frames_ >= capacity_) {
      ++missed_;
      ++dropped_;
      return;
    }
    if (missed_ > 0) {
      queue_.push_back({nlohmann::json{{"type", "gap"}, {"missed", missed_}}.dump(), false});
      missed_ = 0;
    }
    queue_.push_back({std::move(line), true});
    ++frames_;
  }
  cv_.notify_one();
}

void Subscription::push_reply(std::string line) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back({std::move(line), false});
  }
  cv_.notify_one();
}

std::optional<std::string> Subscription::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; })) return std::nullopt;
  if (queue_.empty()) return std::nullopt;
  Item item = std::move(queue_.front());
  queue_.pop_front();
  if (item.frame) --frames_;
  return std::move(item.line);
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::size_t Subscription::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

SimService::SimService(SimConfig config, std::optional<std::filesystem::path> log_path)
    : sim_(std::move(config)), dt_(sim_.config().dt) {
  if (log_path) writer_.emplace(*log_path);
}

SimService::~SimService() {
  stop();
  std::lock_guard lock(mu_);
  for (const auto& s : subscribers_) s->close();
}

void SimService::submit(Command c, std::shared_ptr<Subscription> reply_to) {
  std::lock_guard lock(mu_);
  sim_.submit(std::move(c));
  reply_routes_.push_back(reply_to);
}

std::shared_ptr<Subscription> SimService::subscribe(std::size_t capacity) {
  auto s = std::make_shared<Subscription>(capacity);
  std::lock_guard lock(mu_);
  subscribers_.push_back(s);
  return s;
}

void SimService::unsubscribe(const std::shared_ptr<Subscription>& s) {
  std::lock_guard lock(mu_);
  subscribers_.erase(std::remove(subscribers_.begin(), subscribers_.end(), s), subscribers_.end());
  s->close();
}

void SimService::step_locked() {
  auto out = sim_.step();
  if (writer_)
    for (const auto& e : out.events) writer_->append(e);
  for (const auto& r : out.replies) {
    std::shared_ptr<Subscription> dest;
    if (!reply_routes_.empty()) {
      dest = reply_routes_.front().lock();
      reply_routes_.pop_front();
    }
    if (dest) dest->push_reply(r.to_json(sim_.state().tick).dump());
  }
  const std::string frame = out.telemetry.dump();
  for (const auto& s : subscribers_) s->push_frame(frame);
}

void SimService::step_once() {
  std::lock_guard lock(mu_);
  step_locked();
}

void SimService::start() {
  if (running_.exchange(true)) return;
  loop_ = std::thread([this] {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(dt_));
    auto next = std::chrono::steady_clock::now();
    while (running_) {
      next += period;
      {
        std::lock_guard lock(mu_);
        step_locked();
      }
      std::this_thread::sleep_until(next);
    }
  });
}

void SimService::stop() {
  if (!running_.exchange(false)) return;
  if (loop_.joinable()) loop_.join();
}

std::uint64_t SimService::tick() const {
  std::lock_guard lock(mu_);
  return sim_.state().tick;
}

nlohmann::json SimService::describe() const {
  std::lock_guard lock(mu_);
  return sim_.describe();
}

}  // namespace ifind::sim
