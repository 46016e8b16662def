#pragma once

#include <cstdint>
#include <vector>

#include "sdfield/mesh.hpp"

namespace sdfield {

// Closest point on the closed triangle abc. Degenerate triangles reduce to
// their longest segment (or point).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Solid angle subtended by triangle abc seen from p, signed by orientation.
double triangle_solid_angle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct SignedDistance {
  double value = 0.0;
  double winding = 0.0;
  // Winding number was within 0.1 of the 0.5 threshold; the sign comes from
  // the ray-parity vote instead.
  bool uncertain_sign = false;
};

// Distance and inside queries over an immutable mesh. Holds a bounding-volume
// hierarchy; safe to share between threads.
class MeshSdf {
 public:
  struct Options {
    // Far-field clusters whose distance exceeds accuracy * radius use their
    // dipole moment in the winding-number sum. 0 disables the approximation.
    double winding_accuracy = 4.0;
  };

  explicit MeshSdf(TriangleMesh mesh);
  MeshSdf(TriangleMesh mesh, Options options);

  const TriangleMesh& mesh() const { return mesh_; }

  double unsigned_distance(const Vec3& p) const;
  double winding_number(const Vec3& p) const;
  // Majority vote of crossing parity over three near-axis rays.
  bool ray_parity_inside(const Vec3& p) const;
  struct Side {
    bool inside = false;
    bool uncertain = false;
  };
  // Inside test alone: winding number > 0.5, ray parity near the threshold.
  Side side(const Vec3& p) const;
  SignedDistance query(const Vec3& p) const;
  double signed_distance(const Vec3& p) const { return query(p).value; }

 private:
  struct Node {
    Box box;
    Vec3 area_normal = Vec3::Zero();  // sum of area-weighted normals
    Vec3 centroid = Vec3::Zero();     // area-weighted triangle centroid
    double radius = 0.0;              // bound on |x - centroid| over the cluster
    std::uint32_t first = 0;          // into order_
    std::uint32_t count = 0;          // leaf when > 0
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t first, std::uint32_t count);
  double winding_node(std::uint32_t node, const Vec3& p) const;
  bool ray_parity(const Vec3& p, const Vec3& dir) const;

  TriangleMesh mesh_;
  Options options_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<double> face_area_;
};

// One-shot convenience; builds a MeshSdf per call.
double signed_distance(const TriangleMesh& mesh, const Vec3& p);

}  // namespace sdfield
