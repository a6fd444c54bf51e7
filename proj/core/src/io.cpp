#include "pitmesh/io.hpp"

#include "pitmesh/error.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace pitmesh::io {
namespace {

constexpr int kDigits = std::numeric_limits<double>::max_digits10;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

// Reads one section header and its count.
int section(std::istream& in, const std::string& name) {
  std::string word;
  if (!(in >> word) || word != name) {
    throw IoError("mesh file: expected section " + name + (word.empty() ? "" : ", got " + word));
  }
  long long n = -1;
  if (!(in >> n) || n < 0) throw IoError("mesh file: bad count after " + name);
  return static_cast<int>(n);
}

BoundaryTag tag_from_code(int code, int pit_id, int line) {
  switch (code) {
    case 1: return BoundaryTag::top();
    case 2: return BoundaryTag::left();
    case 3: return BoundaryTag::right();
    case 4: return BoundaryTag::bottom();
    case 5:
      if (pit_id < 0) {
        throw IoError("mesh file: boundary edge " + std::to_string(line) + " has a negative pit id");
      }
      return BoundaryTag::pit(pit_id);
    default:
      throw IoError("mesh file: boundary edge " + std::to_string(line) + " has unknown tag " +
                    std::to_string(code));
  }
}

}  // namespace

void write_mesh(const TriMesh& mesh, std::ostream& out) {
  out << std::setprecision(kDigits);
  out << "$Nodes\n" << mesh.vertices.size() << '\n';
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    out << i << ' ' << mesh.vertices[i].x() << ' ' << mesh.vertices[i].y() << '\n';
  }
  out << "$Elements\n" << mesh.triangles.size() << '\n';
  for (int i = 0; i < mesh.num_cells(); ++i) {
    const auto& t = mesh.triangles[i];
    out << i << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "$BoundaryEdges\n" << mesh.boundary_edges.size() << '\n';
  for (const auto& e : mesh.boundary_edges) {
    out << e.v[0] << ' ' << e.v[1] << ' ' << static_cast<int>(e.tag.kind);
    if (e.tag.is_pit()) out << ' ' << e.tag.pit_id;
    out << '\n';
  }
}

void write_mesh(const TriMesh& mesh, const std::string& path) {
  auto out = open_out(path);
  write_mesh(mesh, out);
  finish(out, path);
}

TriMesh read_mesh(std::istream& in) {
  TriMesh mesh;
  const int nv = section(in, "$Nodes");
  mesh.vertices.resize(nv);
  for (int i = 0; i < nv; ++i) {
    long long id = -1;
    double x = 0.0, y = 0.0;
    if (!(in >> id >> x >> y)) throw IoError("mesh file: truncated node " + std::to_string(i));
    if (id != i) throw IoError("mesh file: node ids must be consecutive from 0");
    mesh.vertices[i] = Vec2(x, y);
  }
  const int nc = section(in, "$Elements");
  mesh.triangles.resize(nc);
  for (int i = 0; i < nc; ++i) {
    long long id = -1;
    Triangle t{};
    if (!(in >> id >> t[0] >> t[1] >> t[2])) {
      throw IoError("mesh file: truncated element " + std::to_string(i));
    }
    if (id != i) throw IoError("mesh file: element ids must be consecutive from 0");
    for (int v : t) {
      if (v < 0 || v >= nv) {
        throw IoError("mesh file: element " + std::to_string(i) + " references vertex " +
                      std::to_string(v));
      }
    }
    mesh.triangles[i] = t;
  }
  const int ne = section(in, "$BoundaryEdges");
  std::string line;
  std::getline(in, line);
  for (int i = 0; i < ne; ++i) {
    if (!std::getline(in, line)) {
      throw IoError("mesh file: truncated boundary edge " + std::to_string(i));
    }
    std::istringstream ls(line);
    BoundaryEdge e;
    int code = 0, pit_id = -1;
    if (!(ls >> e.v[0] >> e.v[1] >> code)) {
      throw IoError("mesh file: malformed boundary edge " + std::to_string(i));
    }
    if (code == 5 && !(ls >> pit_id)) {
      throw IoError("mesh file: pit edge " + std::to_string(i) + " lacks a pit id");
    }
    for (int v : e.v) {
      if (v < 0 || v >= nv) {
        throw IoError("mesh file: boundary edge " + std::to_string(i) + " references vertex " +
                      std::to_string(v));
      }
    }
    e.tag = tag_from_code(code, pit_id, i);
    mesh.boundary_edges.push_back(e);
  }
  orient_ccw(mesh);
  return mesh;
}

TriMesh read_mesh(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_mesh(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_vtk(const TriMesh& mesh, const Eigen::VectorXd& phi, std::ostream& out) {
  if (phi.size() != mesh.num_vertices()) {
    throw ValidationError("write_vtk: field has " + std::to_string(phi.size()) +
                          " values for " + std::to_string(mesh.num_vertices()) + " vertices");
  }
  out << std::setprecision(kDigits);
  out << "# vtk DataFile Version 3.0\n";
  out << "pit electrolyte mesh\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices) out << p.x() << ' ' << p.y() << " 0\n";
  out << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (int i = 0; i < mesh.num_cells(); ++i) out << "5\n";
  out << "POINT_DATA " << mesh.num_vertices() << '\n';
  out << "SCALARS phi double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < phi.size(); ++i) out << phi[i] << '\n';
}

void write_vtk(const TriMesh& mesh, const Eigen::VectorXd& phi, const std::string& path) {
  auto out = open_out(path);
  write_vtk(mesh, phi, out);
  finish(out, path);
}

void write_timeseries(const TimeSeries& series, std::ostream& out) {
  if (series.rows.empty()) throw ValidationError("write_timeseries: series is empty");
  out << std::setprecision(kDigits);
  out << "t,depth_um,width_um\n";
  for (const auto& r : series.rows) out << r.t << ',' << r.depth << ',' << r.width << '\n';
}

void write_timeseries(const TimeSeries& series, const std::string& path) {
  auto out = open_out(path);
  write_timeseries(series, out);
  finish(out, path);
}

TimeSeries read_timeseries(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("time series: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,depth_um,width_um") throw IoError("time series: unexpected header '" + line + "'");
  TimeSeries series;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    TimeRow r;
    char c1 = 0, c2 = 0;
    if (!(ls >> r.t >> c1 >> r.depth >> c2 >> r.width) || c1 != ',' || c2 != ',') {
      throw IoError("time series: malformed line " + std::to_string(n));
    }
    series.rows.push_back(r);
  }
  return series;
}

TimeSeries read_timeseries(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_timeseries(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace pitmesh::io
