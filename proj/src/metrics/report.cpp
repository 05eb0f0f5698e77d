#include "alternator/metrics/report.hpp"

#include <cmath>

#include "alternator/csv.hpp"
#include "alternator/errors.hpp"

namespace alternator {

const MetricRow* MetricReport::find(const std::string& metric) const {
  for (const auto& r : rows) {
    if (r.metric == metric) return &r;
  }
  return nullptr;
}

namespace {
// JSON has no NaN; non-finite values are written as null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double from_number(const nlohmann::json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }
}  // namespace

nlohmann::json MetricReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) arr.push_back({{"metric", r.metric}, {"value", number(r.value)}, {"stderr", number(r.stderr_)}});
  return {{"metrics", arr}};
}

std::string MetricReport::to_csv() const {
  std::string out = "metric,value,stderr\n";
  for (const auto& r : rows) out += r.metric + "," + csv::format_double(r.value) + "," + csv::format_double(r.stderr_) + "\n";
  return out;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  MetricReport rep;
  try {
    for (const auto& r : j.at("metrics")) {
      rep.add(r.at("metric").get<std::string>(), from_number(r.at("value")), from_number(r.at("stderr")));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("metric report: ") + e.what());
  }
  return rep;
}

}  // namespace alternator
