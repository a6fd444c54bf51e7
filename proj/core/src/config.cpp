#include "pitmesh/config.hpp"

#include "pitmesh/error.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace pitmesh::config {
namespace {

using sim::MaterialKind;
using sim::SimConfig;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

struct Context {
  std::string source;
  int line = 0;
  std::string key;

  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError(source + ":" + std::to_string(line) + ": key '" + key + "': " + why);
  }
};

// from_chars rejects a leading '+', which people write for signs.
const char* skip_plus(const std::string& v) {
  return v.size() > 1 && v[0] == '+' && v[1] != '-' ? v.data() + 1 : v.data();
}

double to_double(const std::string& v, const Context& ctx) {
  double out = 0.0;
  const auto r = std::from_chars(skip_plus(v), v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    ctx.fail("expected a number, got '" + v + "'");
  }
  return out;
}

long long to_integer(const std::string& v, const Context& ctx) {
  long long out = 0;
  const auto r = std::from_chars(skip_plus(v), v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    ctx.fail("expected an integer, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& v, const Context& ctx) {
  const long long x = to_integer(v, ctx);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    ctx.fail("integer out of range");
  }
  return static_cast<int>(x);
}

bool to_bool(const std::string& v, const Context& ctx) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  ctx.fail("expected true or false, got '" + v + "'");
}

crystal::Vec3i to_vec3i(const std::string& v, const Context& ctx) {
  std::istringstream is(v);
  std::string a, b, c, extra;
  if (!(is >> a >> b >> c) || (is >> extra)) ctx.fail("expected three integers, got '" + v + "'");
  return {to_int(a, ctx), to_int(b, ctx), to_int(c, ctx)};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

std::string fmt(const crystal::Vec3i& v) {
  return "\"" + std::to_string(v[0]) + " " + std::to_string(v[1]) + " " + std::to_string(v[2]) +
         "\"";
}

const char* material_name(MaterialKind k) {
  switch (k) {
    case MaterialKind::Homogeneous: return "homogeneous";
    case MaterialKind::Crystal: return "crystal";
    case MaterialKind::Bicrystal: return "bicrystal";
  }
  return "?";
}

struct Key {
  std::function<void(SimConfig&, const std::string&, const Context&)> set;
  std::function<std::string(const SimConfig&)> get;
};

// Each accessor is a generic lambda returning a reference to one field.
template <typename Member>
Key real_key(Member member) {
  return {[member](SimConfig& c, const std::string& v, const Context& ctx) {
            member(c) = to_double(v, ctx);
          },
          [member](const SimConfig& c) { return fmt(member(c)); }};
}

template <typename Member>
Key int_key(Member member) {
  return {[member](SimConfig& c, const std::string& v, const Context& ctx) {
            member(c) = to_int(v, ctx);
          },
          [member](const SimConfig& c) {
            return std::to_string(member(c));
          }};
}

template <typename Member>
Key vec_key(Member member) {
  return {[member](SimConfig& c, const std::string& v, const Context& ctx) {
            member(c) = to_vec3i(v, ctx);
          },
          [member](const SimConfig& c) { return fmt(member(c)); }};
}

template <typename Member>
Key bool_key(Member member) {
  return {[member](SimConfig& c, const std::string& v, const Context& ctx) {
            member(c) = to_bool(v, ctx);
          },
          [member](const SimConfig& c) {
            return std::string(member(c) ? "true" : "false");
          }};
}

#define PITMESH_FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> table = {
      // kinetics
      {"z", real_key(PITMESH_FIELD(electro.z))},
      {"faraday", real_key(PITMESH_FIELD(electro.faraday))},
      {"gas_constant", real_key(PITMESH_FIELD(electro.gas_r))},
      {"temperature", real_key(PITMESH_FIELD(electro.temperature))},
      {"v_app", real_key(PITMESH_FIELD(electro.v_app))},
      {"a_diss", real_key(PITMESH_FIELD(electro.a_diss))},
      {"c_solid", real_key(PITMESH_FIELD(electro.c_solid))},
      {"alpha", real_key(PITMESH_FIELD(electro.alpha))},
      {"sigma_c", real_key(PITMESH_FIELD(electro.sigma_c))},
      // material
      {"material",
       {[](SimConfig& c, const std::string& v, const Context& ctx) {
          if (v == "homogeneous") {
            c.material.kind = MaterialKind::Homogeneous;
          } else if (v == "crystal") {
            c.material.kind = MaterialKind::Crystal;
          } else if (v == "bicrystal") {
            c.material.kind = MaterialKind::Bicrystal;
          } else {
            ctx.fail("expected homogeneous, crystal or bicrystal, got '" + v + "'");
          }
        },
        [](const SimConfig& c) { return std::string(material_name(c.material.kind)); }}},
      {"vcorr_homogeneous", real_key(PITMESH_FIELD(material.vcorr_homogeneous))},
      {"zone_axis", vec_key(PITMESH_FIELD(material.zone_axis))},
      {"x_dir", vec_key(PITMESH_FIELD(material.x_dir))},
      {"zone_axis_left", vec_key(PITMESH_FIELD(material.zone_axis_left))},
      {"x_dir_left", vec_key(PITMESH_FIELD(material.x_dir_left))},
      {"zone_axis_right", vec_key(PITMESH_FIELD(material.zone_axis_right))},
      {"x_dir_right", vec_key(PITMESH_FIELD(material.x_dir_right))},
      {"x_interface", real_key(PITMESH_FIELD(material.x_interface))},
      {"vcorr_k", real_key(PITMESH_FIELD(vcorr.k_const))},
      {"vcorr_s", real_key(PITMESH_FIELD(vcorr.s_const))},
      // potential solve
      {"newton_abs_tol", real_key(PITMESH_FIELD(newton.abs_tol))},
      {"newton_rel_tol", real_key(PITMESH_FIELD(newton.rel_tol))},
      {"newton_max_iters", int_key(PITMESH_FIELD(newton.max_iters))},
      {"quad_points", int_key(PITMESH_FIELD(quad_points))},
      {"flux_sign", real_key(PITMESH_FIELD(flux_sign))},
      // mesh adaptation
      {"mu1", real_key(PITMESH_FIELD(adapt.mu1))},
      {"mu2", real_key(PITMESH_FIELD(adapt.mu2))},
      {"tau", real_key(PITMESH_FIELD(adapt.tau))},
      {"theta", real_key(PITMESH_FIELD(adapt.theta))},
      {"gamma", real_key(PITMESH_FIELD(adapt.gamma))},
      {"smoothing_tol", real_key(PITMESH_FIELD(adapt.smoothing_tol))},
      {"smoothing_max_iters", int_key(PITMESH_FIELD(adapt.smoothing_max_iters))},
      {"smoothing_interval", real_key(PITMESH_FIELD(adapt.smoothing_interval))},
      {"smooth_physics_every", int_key(PITMESH_FIELD(smooth_physics_every))},
      {"smooth_initial", bool_key(PITMESH_FIELD(smooth_initial))},
      {"equilateral_reference", bool_key(PITMESH_FIELD(adapt.equilateral_reference))},
      // front
      {"dt", real_key(PITMESH_FIELD(front.dt))},
      {"corner_close_factor", real_key(PITMESH_FIELD(front.corner_close_factor))},
      {"merge_gap_tol", real_key(PITMESH_FIELD(front.merge_gap_tol))},
      {"cfl", real_key(PITMESH_FIELD(front.cfl))},
      {"t_end", real_key(PITMESH_FIELD(t_end))},
      {"post_merge_smoothing_iters", int_key(PITMESH_FIELD(post_merge_smoothing_iters))},
      // geometry
      {"x_min", real_key(PITMESH_FIELD(domain.x_min))},
      {"x_max", real_key(PITMESH_FIELD(domain.x_max))},
      {"height", real_key(PITMESH_FIELD(domain.height))},
      {"pit_width", real_key(PITMESH_FIELD(pit_width))},
      {"pit_depth", real_key(PITMESH_FIELD(pit_depth))},
      {"pit_nodes", int_key(PITMESH_FIELD(pit_nodes))},
      {"pit_count", int_key(PITMESH_FIELD(pit_count))},
      {"pit_spacing", real_key(PITMESH_FIELD(pit_spacing))},
      {"mesh_h", real_key(PITMESH_FIELD(mesh_h))},
      {"mesh_jitter", real_key(PITMESH_FIELD(mesh_jitter))},
      {"seed",
       {[](SimConfig& c, const std::string& v, const Context& ctx) {
          std::uint64_t s = 0;
          const auto r = std::from_chars(skip_plus(v), v.data() + v.size(), s);
          if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size()) {
            ctx.fail("expected a non-negative integer, got '" + v + "'");
          }
          c.seed = s;
        },
        [](const SimConfig& c) { return std::to_string(c.seed); }}},
      // output
      {"vtk_every", int_key(PITMESH_FIELD(vtk_every))},
  };
  return table;
}

#undef PITMESH_FIELD

}  // namespace

sim::SimConfig parse_config(std::istream& in, const std::string& source) {
  std::map<std::string, const Key*> lookup;
  for (const auto& [name, key] : keys()) lookup[name] = &key;

  SimConfig cfg;
  std::map<std::string, int> seen;
  Context ctx{source, 0, ""};
  std::string raw;
  while (std::getline(in, raw)) {
    ++ctx.line;
    std::string line = raw;
    // '#' starts a comment unless it sits inside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(source + ":" + std::to_string(ctx.line) +
                            ": expected 'key = value', got '" + line + "'");
    }
    ctx.key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    auto it = lookup.find(ctx.key);
    if (it == lookup.end()) ctx.fail("unknown key");
    if (seen.count(ctx.key)) {
      ctx.fail("repeated (first set on line " + std::to_string(seen[ctx.key]) + ")");
    }
    seen[ctx.key] = ctx.line;
    it->second->set(cfg, value, ctx);
  }
  cfg.validate();
  return cfg;
}

sim::SimConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

void write_config(const sim::SimConfig& config, std::ostream& out) {
  for (const auto& [name, key] : keys()) out << name << " = " << key.get(config) << '\n';
}

void write_summary(const sim::SimConfig& config, const sim::RunResult& result,
                   const RunFits& fits, std::ostream& out) {
  const auto& e = config.electro;
  out << std::setprecision(10);
  out << "# resolved configuration\n";
  write_config(config, out);
  out << "\n# kinetic constants (SI)\n";
  out << "a_diss_si_mol_per_m2_s = " << e.a_diss_si() << '\n';
  out << "c_solid_si_mol_per_m3 = " << e.c_solid_si() << '\n';
  out << "zf_over_rt_per_volt = " << e.zf_over_rt() << '\n';
  out << "faraday_speed_prefactor_m_per_s = " << e.a_diss_si() / e.c_solid_si() << '\n';
  out << "\n# run\n";
  out << "steps = " << result.steps << '\n';
  out << "merges = " << result.merges << '\n';
  out << "vertices = " << result.mesh.num_vertices() << '\n';
  out << "cells = " << result.mesh.num_cells() << '\n';
  out << "max_inverted_cells = " << result.max_inverted << '\n';
  if (!result.series.rows.empty()) {
    const auto& last = result.series.rows.back();
    out << "final_time_s = " << last.t << '\n';
    out << "final_depth_um = " << last.depth << '\n';
    out << "final_width_um = " << last.width << '\n';
  }
  for (const auto& ev : result.events) {
    out << "event = step " << ev.step << " t " << ev.t << " " << ev.kind << ": " << ev.detail
        << '\n';
  }
  auto report = [&](const char* name, const std::optional<fit::PowerLawFit>& f) {
    if (!f) return;
    out << "\n# power law fit of " << name << " (a t^b + c, t shifted by 1 s)\n";
    out << name << "_a = " << f->a << " +- " << f->se_a << '\n';
    out << name << "_b = " << f->b << " +- " << f->se_b << '\n';
    out << name << "_c = " << f->c << " +- " << f->se_c << '\n';
    out << name << "_r_squared = " << f->r_squared << '\n';
    out << name << "_converged = " << (f->converged ? "true" : "false") << '\n';
  };
  report("depth", fits.depth);
  report("width", fits.width);
}

}  // namespace pitmesh::config
