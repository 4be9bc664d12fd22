#pragma once

// Calibrated block parameters theta*_{sidedness, n} and their CSV cache.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rcmi/error.hpp"

namespace rcmi {

struct CalibrationResult {
  int sidedness = 0;
  int n_rows = 1;
  double theta_star = 0.0;
  double target_moment = 0.0;
  double achieved_moment = 0.0;
  double target_stderr = 0.0;
  int iterations = 0;
};

class ParameterTable {
 public:
  ParameterTable() = default;
  explicit ParameterTable(double theta) : theta_(theta) {}

  double theta() const { return theta_; }
  void set_theta(double theta) { theta_ = theta; }

  void set(int sidedness, int n_rows, double theta_star) { values_[{sidedness, n_rows}] = theta_star; }

  bool has(int sidedness, int n_rows) const { return values_.count({sidedness, n_rows}) != 0; }

  // 2-sided blocks default to the true theta when not calibrated.
  double get(int sidedness, int n_rows) const {
    auto it = values_.find({sidedness, n_rows});
    if (it != values_.end()) return it->second;
    if (sidedness == 2) return theta_;
    throw Error("missing_calibration", "no calibrated theta* for sidedness " + std::to_string(sidedness) +
                                           ", N_b = " + std::to_string(n_rows));
  }

  const std::map<std::pair<int, int>, double>& values() const { return values_; }

 private:
  double theta_ = 0.0;
  std::map<std::pair<int, int>, double> values_;
};

inline constexpr const char* kCalibrationCsvHeader = "sidedness,n_rows,theta_star,target,achieved,stderr";

inline std::string calibration_csv(double theta, const std::vector<CalibrationResult>& rows) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# theta=" << theta << "\n" << kCalibrationCsvHeader << "\n";
  for (const auto& r : rows)
    os << r.sidedness << ',' << r.n_rows << ',' << r.theta_star << ',' << r.target_moment << ','
       << r.achieved_moment << ',' << r.target_stderr << "\n";
  return os.str();
}

inline void write_calibration_csv(const std::string& path, double theta, const std::vector<CalibrationResult>& rows) {
  std::ofstream out(path);
  require(bool(out), "io_error", "cannot write " + path);
  out << calibration_csv(theta, rows);
}

inline ParameterTable read_calibration_csv(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), "io_error", "cannot open " + path);
  ParameterTable table;
  std::string line;
  bool have_theta = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# theta=", 0) == 0) {
      table.set_theta(std::stod(line.substr(8)));
      have_theta = true;
      continue;
    }
    if (line[0] == '#' || line.rfind("sidedness", 0) == 0) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    require(fields.size() >= 3, "bad_calibration", "malformed calibration row: " + line);
    table.set(std::stoi(fields[0]), std::stoi(fields[1]), std::stod(fields[2]));
  }
  require(have_theta, "bad_calibration", "calibration file lacks the '# theta=' line");
  return table;
}

}  // namespace rcmi
