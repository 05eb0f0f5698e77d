#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace alternator {

struct MetricRow {
  std::string metric;
  double value = 0.0;
  double stderr_ = 0.0;
};

// Flat list of named metrics; serializes to JSON and to CSV
// (`metric,value,stderr`).
struct MetricReport {
  std::vector<MetricRow> rows;

  void add(std::string metric, double value, double stderr_ = 0.0) {
    rows.push_back({std::move(metric), value, stderr_});
  }
  const MetricRow* find(const std::string& metric) const;

  nlohmann::json to_json() const;
  std::string to_csv() const;
  static MetricReport from_json(const nlohmann::json& j);
};

}  // namespace alternator
