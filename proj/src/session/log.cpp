#include "ifind/session/log.hpp"

#include <sstream>

#include "ifind/common/error.hpp"

namespace ifind::session {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Command: return "command";
    case EventKind::Telemetry: return "telemetry";
    case EventKind::Grade: return "grade";
    case EventKind::Safety: return "safety";
    case EventKind::Questionnaire: return "questionnaire";
  }
  return "?";
}

EventKind event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::Command, EventKind::Telemetry, EventKind::Grade, EventKind::Safety,
                 EventKind::Questionnaire})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::ParseError, "unknown event kind '" + std::string(s) + "'");
}

void SessionLog::append(Event e) {
  if (!events_.empty() && e.tick < events_.back().tick)
    throw Error(ErrorCode::TickRegression, "event tick " + std::to_string(e.tick) +
                                               " precedes last tick " +
                                               std::to_string(events_.back().tick));
  events_.push_back(std::move(e));
}

SessionLog append_event(SessionLog log, Event e) {
  log.append(std::move(e));
  return log;
}

std::string to_line(const Event& e) {
  nlohmann::json j = {{"tick", e.tick}, {"kind", std::string(to_string(e.kind))}, {"payload", e.payload}};
  return j.dump();
}

Event parse_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    Event e;
    e.tick = j.at("tick").get<std::uint64_t>();
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.payload = j.at("payload");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("malformed session record: ") + ex.what());
  }
}

std::string to_ndjson(const SessionLog& log) {
  std::string out;
  for (const auto& e : log.events()) {
    out += to_line(e);
    out += '\n';
  }
  return out;
}

SessionLog parse_session(std::string_view text) {
  SessionLog log;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto line = text.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        log.append(parse_line(line));
      } catch (const Error& e) {
        throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    start = end + 1;
  }
  return log;
}

void save_session(const SessionLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write session log " + path.string());
  out << to_ndjson(log);
}

SessionLog load_session(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read session log " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_session(buf.str());
}

SessionWriter::SessionWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::InvalidArgument, "cannot write session log " + path.string());
}

void SessionWriter::append(const Event& e) {
  if (count_ > 0 && e.tick < last_tick_)
    throw Error(ErrorCode::TickRegression, "event tick " + std::to_string(e.tick) +
                                               " precedes last tick " + std::to_string(last_tick_));
  last_tick_ = e.tick;
  ++count_;
  out_ << to_line(e) << '\n';
  out_.flush();
}

}  // namespace ifind::session
