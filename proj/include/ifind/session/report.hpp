#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ifind/session/log.hpp"
#include "ifind/session/stats.hpp"

namespace ifind::session {

/// Sonographer-versus-robot chi-square test; `degenerate` marks a table with
/// an empty row or column, reported as statistic 0, p = 1.
struct Comparison {
  ChiSquareResult result;
  bool degenerate = false;
};

struct SessionReport {
  std::map<Operator, GradeSummary> grades;
  Comparison adequate;       // good-or-acceptable out of all records
  Comparison good_adequate;  // good out of good-or-acceptable
  std::map<std::string, std::size_t> commands;  // by kind
  std::size_t rejected_commands = 0;
  std::size_t safety_events = 0;
  std::size_t telemetry_frames = 0;
  std::vector<QuestionnaireResponse> responses;
  std::map<RobotVersion, std::array<QuestionStats, kQuestions>> questionnaire;
};

/// Throws the ParseError / InvalidAnswer of a malformed grade or questionnaire payload.
SessionReport build_report(const SessionLog& log);

Comparison compare(long a_success, long a_total, long b_success, long b_total);

std::string format_report(const SessionReport& r);
nlohmann::json report_json(const SessionReport& r);

}  // namespace ifind::session
