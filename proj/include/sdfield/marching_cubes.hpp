#pragma once

#include "sdfield/mesh.hpp"
#include "sdfield/sdf_grid.hpp"

namespace sdfield {

constexpr double kWeldEpsilon = 1e-7;

// Table-driven marching cubes over the lattice. Corners with value < iso, or
// exactly equal to iso, count as inside. Vertices sit at the linear crossing
// on each cell edge and are shared between cells; vertices closer than
// kWeldEpsilon are merged and collapsed triangles dropped. Triangles face
// the outside (towards larger values). Returns an empty mesh when nothing
// crosses the iso value.
TriangleMesh marching_cubes(const SdfGrid& grid, double iso = 0.0);

}  // namespace sdfield
