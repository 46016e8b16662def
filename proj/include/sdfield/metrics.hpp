#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "sdfield/camera.hpp"
#include "sdfield/mesh.hpp"

namespace sdfield {

constexpr std::size_t kDefaultEvalPoints = 2048;
constexpr std::size_t kDefaultEmdCap = 512;
constexpr int kDefaultIouResolution = 32;

// n points, triangles picked proportionally to area, uniform barycentric
// placement. Throws DegenerateMesh for meshes without area.
PointCloud sample_surface_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

// Mean over a of the squared distance to the nearest point of b, plus the
// same from b to a.
double chamfer(const PointCloud& a, const PointCloud& b);

struct EmdOptions {
  std::size_t exact_cap = kDefaultEmdCap;
  // Above the cap, fall back to greedy matching instead of throwing TooLarge.
  bool approximate = false;
};

struct EmdResult {
  double value = 0.0;
  bool approximate = false;
  // Lower bound on the optimum (largest directional mean nearest-neighbour
  // distance); value - lower_bound bounds the greedy suboptimality.
  double lower_bound = 0.0;
};

// Minimum over perfect matchings of the mean Euclidean distance between
// matched points.
EmdResult emd(const PointCloud& a, const PointCloud& b, const EmdOptions& opts = {});

struct IouResult {
  double iou = 1.0;
  double uncertain_fraction = 0.0;
  // More than 1% of voxel-center inside tests fell back to ray parity.
  bool unreliable = false;
};

// Occupancy of voxel centers over the union of both bounding boxes, split
// into resolution^3 voxels.
IouResult voxel_iou(const TriangleMesh& mesh_a, const TriangleMesh& mesh_b, int resolution);

struct MetricReport {
  std::optional<double> cd;
  std::optional<double> emd;
  std::optional<double> iou;
  std::size_t n_points = 0;
  std::string notes;
};

// key=value lines (cd=, emd=, iou=, n_points=, notes=); missing metrics are
// written as `unavailable`.
void write_report(std::ostream& out, const MetricReport& report);
// Columns scaled as CD x 1e3, EMD x 1e2, IoU in percent.
void write_report_table(std::ostream& out, const MetricReport& report);

}  // namespace sdfield
