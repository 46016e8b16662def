#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sdfield {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return extent().norm(); }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  static Box cube(double half) { return {Vec3::Constant(-half), Vec3::Constant(half)}; }
};

using Face = std::array<std::uint32_t, 3>;

// Indexed triangle surface. Faces are expected counter-clockwise seen from
// outside, which makes the winding number +1 inside.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  bool empty() const { return faces.empty(); }
  Box bounds() const;
  // Throws InvalidMesh on out-of-range or repeated face indices.
  void validate() const;
  double area() const;
  // Signed enclosed volume (positive for outward-oriented closed meshes).
  double volume() const;
};

// v_normalized = (v - offset) * scale
struct NormalizationRecord {
  double scale = 1.0;
  Vec3 offset = Vec3::Zero();

  Vec3 apply(const Vec3& v) const { return (v - offset) * scale; }
  Vec3 invert(const Vec3& v) const { return v / scale + offset; }
};

constexpr double kDefaultNormalizationMargin = 0.05;

// Centers the bounding box at the origin and scales uniformly so that the
// longest bounding-box edge equals 1 - 2 * margin.
std::pair<TriangleMesh, NormalizationRecord> normalize_mesh(
    const TriangleMesh& mesh, double margin = kDefaultNormalizationMargin);

TriangleMesh transformed(const TriangleMesh& mesh, double scale, const Vec3& translation);

// Every undirected edge is shared by exactly two faces, and each directed
// edge appears once (consistent orientation).
bool is_closed_manifold(const TriangleMesh& mesh);
// V - E + F over the referenced vertices.
long euler_characteristic(const TriangleMesh& mesh);

// Procedural test shapes, all outward oriented and watertight.
TriangleMesh make_box(const Vec3& min, const Vec3& max);
TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());
TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments,
                        int minor_segments);

// Torus in the xy-plane with a Gaussian bump pushed out along the surface
// normal around the given angles (radians).
struct BumpSpec {
  double height = 0.08;
  double width = 0.25;
  double major_angle = -1.5707963267948966;
  double minor_angle = 0.0;
};
TriangleMesh make_torus_with_bump(double major_radius, double minor_radius, int major_segments,
                                  int minor_segments, const BumpSpec& bump);

}  // namespace sdfield
