#include "ifind/session/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "ifind/common/bundled.hpp"

namespace ifind::session {

std::map<Operator, GradeSummary> summarize_grades(const std::vector<GradeRecord>& records) {
  std::map<Operator, GradeSummary> out{{Operator::Sonographer, {}}, {Operator::Robot, {}}};
  for (const auto& r : records) {
    auto& s = out[r.op];
    ++s.total;
    switch (r.grade) {
      case Grade::Good: ++s.good; break;
      case Grade::Acceptable: ++s.acceptable; break;
      case Grade::Poor: ++s.poor; break;
    }
  }
  for (auto& [op, s] : out) {
    const std::size_t adequate = s.good + s.acceptable;
    if (s.total > 0) s.good_or_acceptable = static_cast<double>(adequate) / static_cast<double>(s.total);
    if (adequate > 0) s.good_given_adequate = static_cast<double>(s.good) / static_cast<double>(adequate);
  }
  return out;
}

std::string percent(const std::optional<double>& fraction) {
  if (!fraction) return "n/a";
  // Half-up on ties such as 9/16; the slack absorbs the representation error
  // of fractions like 1/80 whose exact tenths end in 5.
  const auto tenths = static_cast<long long>(std::floor(1000.0 * *fraction + 0.5 + 1e-9));
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

double chi_square1_sf(double x) {
  if (!(x > 0.0)) return 1.0;
  return std::erfc(std::sqrt(0.5 * x));
}

ChiSquareResult compare_proportions(long a_success, long a_total, long b_success, long b_total) {
  if (a_success < 0 || b_success < 0 || a_success > a_total || b_success > b_total)
    throw Error(ErrorCode::InvalidArgument, "successes must lie in [0, total]");
  const double a = static_cast<double>(a_success), c = static_cast<double>(a_total - a_success);
  const double b = static_cast<double>(b_success), d = static_cast<double>(b_total - b_success);
  const double r1 = a + c, r2 = b + d, c1 = a + b, c2 = c + d;
  if (r1 == 0.0 || r2 == 0.0 || c1 == 0.0 || c2 == 0.0)
    throw DegenerateTable("2x2 table has an empty row or column");
  const double n = r1 + r2;
  const double cross = a * d - b * c;
  ChiSquareResult res;
  res.statistic = n * cross * cross / (r1 * r2 * c1 * c2);
  res.p_value = chi_square1_sf(res.statistic);
  return res;
}

std::string_view to_string(RobotVersion v) { return v == RobotVersion::V2 ? "v2" : "v3"; }

RobotVersion robot_version_from_string(std::string_view s) {
  if (s == "v2" || s == "ifind-v2") return RobotVersion::V2;
  if (s == "v3" || s == "ifind-v3") return RobotVersion::V3;
  throw Error(ErrorCode::ParseError, "unknown robot version '" + std::string(s) + "'");
}

void validate(const QuestionnaireResponse& r) {
  for (std::size_t i = 0; i < kQuestions; ++i)
    if (r.answers[i] < 0 || r.answers[i] > kMaxAnswer)
      throw Error(ErrorCode::InvalidAnswer, "Q" + std::to_string(i + 1) + " answer " +
                                                std::to_string(r.answers[i]) + " outside 0..4");
}

nlohmann::json to_json(const QuestionnaireResponse& r) {
  return {{"volunteer", r.volunteer},
          {"version", std::string(to_string(r.version))},
          {"answers", r.answers}};
}

QuestionnaireResponse questionnaire_from_json(const nlohmann::json& j) {
  QuestionnaireResponse r;
  try {
    r.volunteer = j.at("volunteer").get<std::string>();
    r.version = robot_version_from_string(j.at("version").get<std::string>());
    const auto& a = j.at("answers");
    if (!a.is_array() || a.size() != kQuestions)
      throw Error(ErrorCode::InvalidAnswer, "questionnaire needs exactly 7 answers");
    for (std::size_t i = 0; i < kQuestions; ++i) {
      if (!a[i].is_number_integer())
        throw Error(ErrorCode::InvalidAnswer, "Q" + std::to_string(i + 1) + " answer is not an integer");
      const auto v = a[i].get<long long>();
      if (v < 0 || v > kMaxAnswer)
        throw Error(ErrorCode::InvalidAnswer, "Q" + std::to_string(i + 1) + " answer " +
                                                  std::to_string(v) + " outside 0..4");
      r.answers[i] = static_cast<int>(v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed questionnaire response: ") + e.what());
  }
  return r;
}

namespace {

int nearest_rank(const std::vector<int>& sorted, double p) {
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

}  // namespace

std::map<RobotVersion, std::array<QuestionStats, kQuestions>> summarize_questionnaire(
    const std::vector<QuestionnaireResponse>& responses) {
  for (const auto& r : responses) validate(r);
  std::map<RobotVersion, std::array<QuestionStats, kQuestions>> out;
  for (auto version : {RobotVersion::V2, RobotVersion::V3}) {
    std::array<std::vector<int>, kQuestions> columns;
    for (const auto& r : responses)
      if (r.version == version)
        for (std::size_t q = 0; q < kQuestions; ++q) columns[q].push_back(r.answers[q]);
    if (columns[0].empty()) continue;
    auto& stats = out[version];
    for (std::size_t q = 0; q < kQuestions; ++q) {
      auto& col = columns[q];
      std::sort(col.begin(), col.end());
      auto& s = stats[q];
      s.n = col.size();
      s.min = col.front();
      s.max = col.back();
      s.median = col[(col.size() - 1) / 2];
      s.q1 = nearest_rank(col, 0.25);
      s.q3 = nearest_rank(col, 0.75);
      for (int v : col) ++s.counts[static_cast<std::size_t>(v)];
    }
  }
  return out;
}

QuestionnaireText questionnaire_text() {
  const auto j = nlohmann::json::parse(bundled::lookup("questionnaire.json"));
  QuestionnaireText t;
  const auto& qs = j.at("questions");
  for (std::size_t i = 0; i < kQuestions; ++i) t.questions[i] = qs.at(i).at("text").get<std::string>();
  const auto& labels = j.at("scale").at("labels");
  for (std::size_t i = 0; i <= kMaxAnswer; ++i) t.labels[i] = labels.at(i).get<std::string>();
  return t;
}

}  // namespace ifind::session
