#pragma once

#include <vector>

namespace pitmesh {

struct TimeRow {
  double t = 0.0;      // seconds
  double depth = 0.0;  // micrometers
  double width = 0.0;  // micrometers
};

struct TimeSeries {
  std::vector<TimeRow> rows;

  std::vector<double> times() const;
  std::vector<double> depths() const;
  std::vector<double> widths() const;
};

enum class SeriesColumn { Depth, Width };

}  // namespace pitmesh
