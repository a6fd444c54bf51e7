#pragma once

namespace pitmesh::electrochem {

// Anodic dissolution kinetics. Inputs use the units people quote them in
// (mol/(cm^2 s), mol/L); everything returned is SI.
struct ElectroParams {
  double z = 2.19;          // average charge number
  double faraday = 96485;   // C/mol
  double gas_r = 8.315;     // J/(mol K)
  double temperature = 298.15;
  double v_app = -0.14;     // V
  double a_diss = 4.0;      // mol/(cm^2 s)
  double c_solid = 143.0;   // mol/L
  double alpha = 0.5;       // transfer coefficient
  double sigma_c = 1.0;     // S/m

  double a_diss_si() const { return a_diss * 1.0e4; }    // mol/(m^2 s)
  double c_solid_si() const { return c_solid * 1.0e3; }  // mol/m^3
  double zf_over_rt() const { return z * faraday / (gas_r * temperature); }

  // Throws ValidationError when a positivity or range invariant fails.
  void validate() const;
};

inline constexpr double kMaxExponent = 700.0;

double overpotential(const ElectroParams& p, double v_corr, double phi);

// z F (v_corr + alpha * eta) / (R T); the argument of the Butler-Volmer exponential.
double bv_exponent(const ElectroParams& p, double v_corr, double phi);

// A/m^2. Throws OverflowError when the exponent exceeds kMaxExponent.
double current_density(const ElectroParams& p, double v_corr, double phi);

// d i / d phi = -alpha z F / (R T) * i.
double current_density_dphi(const ElectroParams& p, double v_corr, double phi);

// Faraday front speed in m/s.
double normal_velocity(const ElectroParams& p, double v_corr, double phi);

}  // namespace pitmesh::electrochem
