#pragma once

#include "pitmesh/mesh.hpp"
#include "pitmesh/series.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>

namespace pitmesh::io {

// Mesh exchange text: "$Nodes" count then "id x y"; "$Elements" count then
// "id v1 v2 v3"; "$BoundaryEdges" count then "v1 v2 tag [pit_id]" with tag
// codes 1..5 (top, left, right, bottom, pit). Ids are 0-based. Clockwise
// cells are reoriented on read.
void write_mesh(const TriMesh& mesh, std::ostream& out);
void write_mesh(const TriMesh& mesh, const std::string& path);
TriMesh read_mesh(std::istream& in);
TriMesh read_mesh(const std::string& path);

// Legacy ASCII VTK unstructured grid with the point field "phi".
void write_vtk(const TriMesh& mesh, const Eigen::VectorXd& phi, std::ostream& out);
void write_vtk(const TriMesh& mesh, const Eigen::VectorXd& phi, const std::string& path);

// CSV "t,depth_um,width_um".
void write_timeseries(const TimeSeries& series, std::ostream& out);
void write_timeseries(const TimeSeries& series, const std::string& path);
TimeSeries read_timeseries(std::istream& in);
TimeSeries read_timeseries(const std::string& path);

}  // namespace pitmesh::io
