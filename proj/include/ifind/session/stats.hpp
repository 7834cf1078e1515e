#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ifind/common/error.hpp"
#include "ifind/session/views.hpp"

namespace ifind::session {

struct GradeSummary {
  std::size_t total = 0;
  std::size_t good = 0;
  std::size_t acceptable = 0;
  std::size_t poor = 0;
  std::optional<double> good_or_acceptable;  // fraction of total
  std::optional<double> good_given_adequate;  // fraction of good-or-acceptable
};

std::map<Operator, GradeSummary> summarize_grades(const std::vector<GradeRecord>& records);

/// Percentage with one decimal ("97.5"), or "n/a" for an undefined fraction.
std::string percent(const std::optional<double>& fraction);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// A row or column of the 2x2 table sums to zero; p = 1 by convention.
class DegenerateTable : public Error {
 public:
  explicit DegenerateTable(const std::string& what)
      : Error(ErrorCode::DegenerateTable, what) {}
  ChiSquareResult result() const noexcept { return {0.0, 1.0}; }
};

/// Pearson chi-square on [[a, a_total - a], [b, b_total - b]] without
/// continuity correction; p from the chi-square(1) survival function.
ChiSquareResult compare_proportions(long a_success, long a_total, long b_success, long b_total);

/// Survival function of the chi-square distribution with one degree of freedom.
double chi_square1_sf(double x);

enum class RobotVersion { V2, V3 };
std::string_view to_string(RobotVersion v);
RobotVersion robot_version_from_string(std::string_view s);  // throws ParseError

constexpr std::size_t kQuestions = 7;
constexpr int kMaxAnswer = 4;

struct QuestionnaireResponse {
  std::string volunteer;
  RobotVersion version = RobotVersion::V2;
  std::array<int, kQuestions> answers{};
};

/// Throws InvalidAnswer when any answer is outside 0..4.
void validate(const QuestionnaireResponse& r);
nlohmann::json to_json(const QuestionnaireResponse& r);
/// Accepts {"volunteer", "version", "answers": [7 ints]}. Throws InvalidAnswer / ParseError.
QuestionnaireResponse questionnaire_from_json(const nlohmann::json& j);

struct QuestionStats {
  std::size_t n = 0;
  int min = 0;
  int q1 = 0;
  int median = 0;  // lower median for even n
  int q3 = 0;
  int max = 0;
  std::array<std::size_t, kMaxAnswer + 1> counts{};
};

// Quartiles are nearest-rank: sorted[ceil(p n) - 1].
std::map<RobotVersion, std::array<QuestionStats, kQuestions>> summarize_questionnaire(
    const std::vector<QuestionnaireResponse>& responses);

struct QuestionnaireText {
  std::array<std::string, kQuestions> questions;
  std::array<std::string, kMaxAnswer + 1> labels;
};
QuestionnaireText questionnaire_text();

}  // namespace ifind::session
