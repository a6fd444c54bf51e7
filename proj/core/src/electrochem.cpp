#include "pitmesh/electrochem.hpp"

#include "pitmesh/error.hpp"

#include <cmath>
#include <sstream>

namespace pitmesh::electrochem {

void ElectroParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string(name) + " must be finite and > 0");
    }
  };
  positive(z, "z");
  positive(faraday, "F");
  positive(gas_r, "R");
  positive(temperature, "T");
  positive(a_diss, "A_diss");
  positive(c_solid, "c_solid");
  positive(sigma_c, "sigma_c");
  if (!std::isfinite(v_app)) throw ValidationError("V_app must be finite");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
}

double overpotential(const ElectroParams& p, double v_corr, double phi) {
  return p.v_app - v_corr - phi;
}

double bv_exponent(const ElectroParams& p, double v_corr, double phi) {
  return p.zf_over_rt() * (v_corr + p.alpha * overpotential(p, v_corr, phi));
}

namespace {

double guarded_exp(const ElectroParams& p, double v_corr, double phi) {
  const double arg = bv_exponent(p, v_corr, phi);
  if (arg > kMaxExponent || std::isnan(arg)) {
    std::ostringstream os;
    os << "Butler-Volmer exponent " << arg << " out of range (v_corr=" << v_corr
       << " V, phi=" << phi << " V, alpha=" << p.alpha << ")";
    throw OverflowError(os.str());
  }
  return std::exp(arg);
}

}  // namespace

double current_density(const ElectroParams& p, double v_corr, double phi) {
  return p.z * p.faraday * p.a_diss_si() * guarded_exp(p, v_corr, phi);
}

double current_density_dphi(const ElectroParams& p, double v_corr, double phi) {
  return -p.alpha * p.zf_over_rt() * current_density(p, v_corr, phi);
}

double normal_velocity(const ElectroParams& p, double v_corr, double phi) {
  return p.a_diss_si() / p.c_solid_si() * guarded_exp(p, v_corr, phi);
}

}  // namespace pitmesh::electrochem
