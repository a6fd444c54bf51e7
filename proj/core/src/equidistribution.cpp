#include "pitmesh/error.hpp"
#include "pitmesh/mesh_adapt.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>

namespace pitmesh::adapt {

std::vector<double> solve_equidistribution_1d(const std::function<double(double)>& rho, double a,
                                              double b, int n) {
  if (n < 1) throw ValidationError("equidistribution needs N >= 1");
  if (!(b > a)) throw ValidationError("equidistribution needs a < b");

  // Zeros are accepted at isolated samples only (rho = 2x at x = 0).
  auto density = [&](double x) {
    const double r = rho(x);
    if (!(r >= 0.0) || !std::isfinite(r)) {
      std::ostringstream os;
      os << "density must be positive; rho(" << x << ") = " << r;
      throw ValidationError(os.str());
    }
    return r;
  };
  constexpr int kSamples = 1000;
  double previous = density(a);
  for (int k = 1; k <= kSamples; ++k) {
    const double x = a + (b - a) * k / kSamples;
    const double r = density(x);
    if (r == 0.0 && previous == 0.0) {
      std::ostringstream os;
      os << "density must be positive; rho vanishes on an interval ending at x = " << x;
      throw ValidationError(os.str());
    }
    previous = r;
  }

  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto integral = [&](double lo, double hi) {
    if (hi <= lo) return 0.0;
    return Quad::integrate(density, lo, hi, 15, 1e-12);
  };

  const double total = integral(a, b);
  const double share = total / n;
  std::vector<double> x(n + 1);
  x[0] = a;
  x[n] = b;
  for (int i = 1; i < n; ++i) {
    // Integrate from the origin each time so errors do not accumulate.
    const double target = share * i;
    auto f = [&](double s) { return integral(a, s) - target; };
    std::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::toms748_solve(
        f, x[i - 1], b, f(x[i - 1]), total - target,
        boost::math::tools::eps_tolerance<double>(52), iters);
    x[i] = 0.5 * (bracket.first + bracket.second);
  }
  return x;
}

}  // namespace pitmesh::adapt
