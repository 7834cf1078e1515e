#include "ifind/session/report.hpp"

#include <cstdio>
#include <sstream>

namespace ifind::session {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pct(const std::optional<double>& fraction) {
  const auto p = percent(fraction);
  return fraction ? p + "%" : p;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

nlohmann::json fraction_json(const std::optional<double>& f) {
  return f ? nlohmann::json(*f) : nlohmann::json();
}

}  // namespace

Comparison compare(long a_success, long a_total, long b_success, long b_total) {
  Comparison c;
  try {
    c.result = compare_proportions(a_success, a_total, b_success, b_total);
  } catch (const DegenerateTable& e) {
    c.result = e.result();
    c.degenerate = true;
  }
  return c;
}

SessionReport build_report(const SessionLog& log) {
  SessionReport r;
  std::vector<GradeRecord> grades;
  for (const auto& e : log.events()) {
    switch (e.kind) {
      case EventKind::Grade:
        grades.push_back(grade_record_from_json(e.payload));
        break;
      case EventKind::Questionnaire:
        r.responses.push_back(questionnaire_from_json(e.payload));
        break;
      case EventKind::Command:
        ++r.commands[e.payload.value("kind", std::string("?"))];
        if (e.payload.value("status", std::string()) == "error") ++r.rejected_commands;
        break;
      case EventKind::Safety:
        ++r.safety_events;
        break;
      case EventKind::Telemetry:
        ++r.telemetry_frames;
        break;
    }
  }
  r.grades = summarize_grades(grades);
  r.questionnaire = summarize_questionnaire(r.responses);
  const auto& s = r.grades.at(Operator::Sonographer);
  const auto& b = r.grades.at(Operator::Robot);
  const auto l = [](std::size_t v) { return static_cast<long>(v); };
  r.adequate = compare(l(s.good + s.acceptable), l(s.total), l(b.good + b.acceptable), l(b.total));
  r.good_adequate = compare(l(s.good), l(s.good + s.acceptable), l(b.good), l(b.good + b.acceptable));
  return r;
}

std::string format_report(const SessionReport& r) {
  std::ostringstream o;
  o << "Acquisition grades\n";
  o << pad("operator", 12, true) << pad("total", 7) << pad("good", 7) << pad("acceptable", 12)
    << pad("poor", 7) << pad("good+acceptable", 17) << pad("good|adequate", 15) << "\n";
  for (const auto op : {Operator::Sonographer, Operator::Robot}) {
    const auto& g = r.grades.at(op);
    o << pad(std::string(to_string(op)), 12, true) << pad(std::to_string(g.total), 7)
      << pad(std::to_string(g.good), 7) << pad(std::to_string(g.acceptable), 12)
      << pad(std::to_string(g.poor), 7) << pad(pct(g.good_or_acceptable), 17)
      << pad(pct(g.good_given_adequate), 15) << "\n";
  }
  o << "\nSonographer vs robot (Pearson chi-square, 1 dof)\n";
  const auto line = [&](const char* name, const Comparison& c) {
    o << pad(name, 17, true) << "chi2 = " << fmt("%.6f", c.result.statistic)
      << "  p = " << fmt("%.3g", c.result.p_value);
    if (c.degenerate) o << "  (degenerate table)";
    o << "\n";
  };
  line("good+acceptable", r.adequate);
  line("good|adequate", r.good_adequate);

  for (const auto& [version, stats] : r.questionnaire) {
    o << "\nQuestionnaire " << to_string(version) << " (N=" << stats[0].n << ")\n";
    o << pad("question", 10, true);
    for (const char* h : {"min", "q1", "median", "q3", "max", "n0", "n1", "n2", "n3", "n4"})
      o << pad(h, 7);
    o << "\n";
    for (std::size_t q = 0; q < kQuestions; ++q) {
      const auto& s = stats[q];
      o << pad("Q" + std::to_string(q + 1), 10, true);
      for (int v : {s.min, s.q1, s.median, s.q3, s.max}) o << pad(std::to_string(v), 7);
      for (auto c : s.counts) o << pad(std::to_string(c), 7);
      o << "\n";
    }
  }
  if (!r.responses.empty()) {
    o << "\nQuestionnaire responses\n";
    for (const auto& resp : r.responses) {
      o << pad(resp.volunteer, 12, true) << pad(std::string(to_string(resp.version)), 4, true);
      for (int a : resp.answers) o << ' ' << a;
      o << "\n";
    }
  }
  o << "\nCommands\n";
  for (const auto& [kind, n] : r.commands) o << pad(kind, 17, true) << n << "\n";
  o << pad("rejected", 17, true) << r.rejected_commands << "\n";
  o << "\nSafety transitions " << r.safety_events << "\n";
  o << "Telemetry frames " << r.telemetry_frames << "\n";
  return o.str();
}

nlohmann::json report_json(const SessionReport& r) {
  nlohmann::json grades = nlohmann::json::object();
  for (const auto& [op, g] : r.grades)
    grades[std::string(to_string(op))] = {{"total", g.total},
                                          {"good", g.good},
                                          {"acceptable", g.acceptable},
                                          {"poor", g.poor},
                                          {"good_or_acceptable", fraction_json(g.good_or_acceptable)},
                                          {"good_given_adequate", fraction_json(g.good_given_adequate)}};
  const auto cmp = [](const Comparison& c) {
    return nlohmann::json{{"chi_square", c.result.statistic}, {"p_value", c.result.p_value},
                          {"degenerate", c.degenerate}};
  };
  nlohmann::json questionnaire = nlohmann::json::object();
  for (const auto& [version, stats] : r.questionnaire) {
    nlohmann::json qs = nlohmann::json::array();
    for (const auto& s : stats)
      qs.push_back({{"n", s.n}, {"min", s.min}, {"q1", s.q1}, {"median", s.median},
                    {"q3", s.q3}, {"max", s.max}, {"counts", s.counts}});
    questionnaire[std::string(to_string(version))] = qs;
  }
  nlohmann::json responses = nlohmann::json::array();
  for (const auto& resp : r.responses) responses.push_back(to_json(resp));
  return {{"grades", grades},
          {"good_or_acceptable_test", cmp(r.adequate)},
          {"good_given_adequate_test", cmp(r.good_adequate)},
          {"questionnaire", questionnaire},
          {"responses", responses},
          {"commands", r.commands},
          {"rejected_commands", r.rejected_commands},
          {"safety_events", r.safety_events},
          {"telemetry_frames", r.telemetry_frames}};
}

}  // namespace ifind::session
