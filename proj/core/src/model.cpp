#include "civqr/model.hpp"

#include <cmath>

namespace civqr {

Dataset Dataset::from_rows(std::vector<Observation> rows) {
  if (rows.empty())
    throw std::invalid_argument("cannot infer dimensions from an empty sample");
  const std::size_t k = rows.front().z.size();
  const std::size_t l = rows.front().w.size();
  return Dataset(std::move(rows), k, l);
}

double Dataset::censored_fraction() const {
  if (rows_.empty()) return 0.0;
  std::size_t censored = 0;
  for (const auto& row : rows_)
    if (!row.delta) ++censored;
  return static_cast<double>(censored) / static_cast<double>(rows_.size());
}

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

std::vector<std::string> validate(const Dataset& data) {
  std::vector<std::string> report;
  if (data.n() == 0) {
    report.push_back("dataset is empty");
    return report;
  }
  if (data.k() == 0) report.push_back("regressor dimension must be positive");
  if (data.l() == 0) report.push_back("instrument dimension must be positive");

  bool any_event = false;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const Observation& row = data[i];
    const std::string at = " at row " + std::to_string(i);
    if (!std::isfinite(row.y))
      report.push_back("nonfinite duration" + at);
    else if (row.y <= 0.0)
      report.push_back("nonpositive duration" + at);
    if (row.z.size() != data.k())
      report.push_back("regressor dimension mismatch" + at);
    else if (!all_finite(row.z))
      report.push_back("nonfinite regressor" + at);
    if (row.w.size() != data.l())
      report.push_back("instrument dimension mismatch" + at);
    else if (!all_finite(row.w))
      report.push_back("nonfinite instrument" + at);
    if (row.delta) any_event = true;
  }
  if (!any_event) report.push_back("no uncensored observations");
  return report;
}

void require_valid(const Dataset& data) {
  const auto report = validate(data);
  if (report.empty()) return;
  std::string joined = "invalid dataset: ";
  for (std::size_t i = 0; i < report.size(); ++i) {
    if (i > 0) joined += "; ";
    joined += report[i];
  }
  throw std::invalid_argument(joined);
}

}  // namespace civqr
