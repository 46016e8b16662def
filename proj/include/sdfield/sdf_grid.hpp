#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdfield/distance.hpp"
#include "sdfield/mesh.hpp"

namespace sdfield {

// Regular lattice of signed-distance samples. Lattice point (i, j, k) sits at
// bbox_min + (i, j, k) * extent / (res - 1), endpoints included; values are
// stored x-fastest.
struct SdfGrid {
  std::array<int, 3> resolution{0, 0, 0};
  Vec3 bbox_min = Vec3::Zero();
  Vec3 bbox_max = Vec3::Zero();
  std::vector<float> values;

  SdfGrid() = default;
  SdfGrid(std::array<int, 3> res, const Box& box);

  std::size_t size() const {
    return static_cast<std::size_t>(resolution[0]) * resolution[1] * resolution[2];
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * resolution[1] + j) * resolution[0] + i;
  }
  std::array<int, 3> coords(std::size_t idx) const;
  Box box() const { return {bbox_min, bbox_max}; }
  Vec3 spacing() const;
  Vec3 lattice_point(int i, int j, int k) const;
  Vec3 lattice_point(std::size_t idx) const;
  float at(int i, int j, int k) const { return values[index(i, j, k)]; }

  // Trilinear interpolation, clamping p to the box.
  double sample(const Vec3& p) const;
};

struct GridStats {
  double min_value = 0.0;
  double max_value = 0.0;
  double negative_fraction = 0.0;
  std::size_t uncertain_signs = 0;
};

GridStats grid_stats(const SdfGrid& grid);

// Throws InvalidResolution for resolution < 2 and InvalidArgument for a
// degenerate box. Serial and parallel builds are bit-identical.
SdfGrid build_sdf_grid(const MeshSdf& sdf, int resolution, const Box& bbox, bool parallel = true,
                       std::size_t* uncertain_signs = nullptr);
SdfGrid build_sdf_grid(const TriangleMesh& mesh, int resolution, const Box& bbox,
                       bool parallel = true);
SdfGrid build_sdf_grid(const std::function<double(const Vec3&)>& field, int resolution,
                       const Box& bbox, bool parallel = true);

// Binary "SDFG" container, little-endian.
void write_sdf_grid(std::ostream& out, const SdfGrid& grid);
SdfGrid read_sdf_grid(std::istream& in);
void save_sdf_grid(const std::string& path, const SdfGrid& grid);
SdfGrid load_sdf_grid(const std::string& path);

}  // namespace sdfield
