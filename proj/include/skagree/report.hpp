// Simulation results and their JSON / CSV forms.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skagree/typicality.hpp"

namespace skagree {

struct Metric {
  std::string name;
  double value = 0.0;
};

struct SimulationReport {
  std::string protocol;  // "nofb" or "fb"
  TypicalityParams tp;
  std::size_t trials = 0;
  std::uint64_t seed = 0;

  std::vector<Metric> nominal_rates;
  std::vector<Metric> realized_rates;  // log2(count) / n
  std::vector<Metric> error_rates;     // Pr{K != K^}
  std::vector<Metric> leakage;         // bits per channel use
  std::vector<Metric> key_entropy;     // H(K)/n from key histograms
  std::vector<Metric> failures;        // raw counts

  bool leakage_exact = true;
  std::size_t enumeration_size = 0;

  /// Looks a metric up by name across all groups.
  std::optional<double> find(const std::string& name) const;
  double get(const std::string& name) const;
};

std::string report_to_json(const SimulationReport& r, int indent = 2);
/// One row per metric: group,name,value.
std::string report_to_csv(const SimulationReport& r);

/// Shortest round-trip decimal for a double.
std::string format_double(double v);

}  // namespace skagree
