#pragma once

#include "pitmesh/power_law.hpp"
#include "pitmesh/sim_driver.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace pitmesh::config {

// Flat "key = value" text with '#' comments. Vectors are quoted integer
// triples ("1 0 1"). Unknown keys, malformed values and invariant
// violations raise ValidationError naming the key and line. Keys that do
// not appear keep their defaults.
sim::SimConfig parse_config(std::istream& in, const std::string& source = "<config>");
sim::SimConfig parse_config_file(const std::string& path);

// Writes every key, so parse_config(write_config(c)) reproduces c exactly.
void write_config(const sim::SimConfig& config, std::ostream& out);

struct RunFits {
  std::optional<fit::PowerLawFit> depth;
  std::optional<fit::PowerLawFit> width;
};

// Human-readable run report: resolved config (including SI values of the
// kinetic constants), step count, events, final dimensions and fits.
void write_summary(const sim::SimConfig& config, const sim::RunResult& result,
                   const RunFits& fits, std::ostream& out);

}  // namespace pitmesh::config
