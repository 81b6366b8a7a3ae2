#include "skagree/report.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

#include "skagree/io.hpp"

namespace skagree {

namespace {

using Group = std::pair<const char*, const std::vector<Metric>*>;

std::vector<Group> groups(const SimulationReport& r) {
  return {{"nominal_rates", &r.nominal_rates}, {"realized_rates", &r.realized_rates},
          {"error_rates", &r.error_rates},     {"leakage", &r.leakage},
          {"key_entropy", &r.key_entropy},     {"failures", &r.failures}};
}

}  // namespace

std::optional<double> SimulationReport::find(const std::string& name) const {
  for (const auto& [label, metrics] : groups(*this)) {
    (void)label;
    for (const auto& m : *metrics) {
      if (m.name == name) return m.value;
    }
  }
  return std::nullopt;
}

double SimulationReport::get(const std::string& name) const {
  auto v = find(name);
  if (!v) throw std::out_of_range("no metric named '" + name + "'");
  return *v;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string report_to_json(const SimulationReport& r, int indent) { return to_json(r).dump(indent); }

std::string report_to_csv(const SimulationReport& r) {
  std::ostringstream os;
  os << "group,name,value\n";
  for (const auto& [label, metrics] : groups(r)) {
    for (const auto& m : *metrics) os << label << "," << m.name << "," << format_double(m.value) << "\n";
  }
  os << "meta,leakage_exact," << (r.leakage_exact ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace skagree
