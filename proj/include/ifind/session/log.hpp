#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ifind::session {

enum class EventKind { Command, Telemetry, Grade, Safety, Questionnaire };

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);  // throws ParseError

struct Event {
  std::uint64_t tick = 0;
  EventKind kind = EventKind::Command;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const Event& o) const {
    return tick == o.tick && kind == o.kind && payload == o.payload;
  }
};

/// Append-only event list with non-decreasing ticks.
class SessionLog {
 public:
  /// Throws TickRegression when `e.tick` precedes the last tick.
  void append(Event e);
  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool operator==(const SessionLog& o) const { return events_ == o.events_; }

 private:
  std::vector<Event> events_;
};

SessionLog append_event(SessionLog log, Event e);

/// One JSON object per line: {"kind", "payload", "tick"}.
std::string to_line(const Event& e);
Event parse_line(std::string_view line);  // throws ParseError

std::string to_ndjson(const SessionLog& log);
SessionLog parse_session(std::string_view text);  // throws ParseError / TickRegression

void save_session(const SessionLog& log, const std::filesystem::path& path);
SessionLog load_session(const std::filesystem::path& path);

/// Streams events to a file as they are appended, one flushed line each, so a
/// concurrent reader always sees a whole-line prefix.
class SessionWriter {
 public:
  explicit SessionWriter(const std::filesystem::path& path);
  void append(const Event& e);  // throws TickRegression
  std::size_t size() const { return count_; }

 private:
  std::ofstream out_;
  std::uint64_t last_tick_ = 0;
  std::size_t count_ = 0;
};

}  // namespace ifind::session
