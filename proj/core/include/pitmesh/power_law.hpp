#pragma once

#include "pitmesh/series.hpp"

#include <span>

namespace pitmesh::fit {

struct PowerLawFit {
  double a = 0.0, b = 1.0, c = 0.0;
  double se_a = 0.0, se_b = 0.0, se_c = 0.0;
  double rss = 0.0;
  double r_squared = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // constant data: b pinned to 1, a = 0
};

// Least squares y = a t^b + c. The exponent starts from a log-log slope,
// a and c from the linear problem at that exponent, then Levenberg-Marquardt
// refines all three. Needs at least 4 samples with t > 0.
PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> y);

// Fits one column of a run with simulation time shifted so the initial
// state sits at t = 1.
PowerLawFit fit_power_law(const TimeSeries& series, SeriesColumn column);

}  // namespace pitmesh::fit
