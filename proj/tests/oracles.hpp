#pragma once

// Independent reference computations shared by the tests. Nothing here calls
// into the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "sdfield/mesh.hpp"

namespace oracle {

using sdfield::Vec3;

inline Vec3 random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

// Distance from p to triangle abc by dense barycentric sampling plus the
// three edges sampled finely; an upper bound that converges from above.
inline double dense_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c, int n = 400) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; i + j <= n; ++j) {
      const double u = static_cast<double>(i) / n, v = static_cast<double>(j) / n;
      best = std::min(best, (a + u * (b - a) + v * (c - a) - p).norm());
    }
  }
  return best;
}

// Moller-Trumbore crossing count along a ray, written out long-hand.
inline int ray_crossings(const sdfield::TriangleMesh& mesh, const Vec3& o, const Vec3& d) {
  int hits = 0;
  for (const auto& f : mesh.faces) {
    const Vec3& v0 = mesh.vertices[f[0]];
    const Vec3 e1 = mesh.vertices[f[1]] - v0, e2 = mesh.vertices[f[2]] - v0;
    const Vec3 h = d.cross(e2);
    const double det = e1.dot(h);
    if (std::abs(det) < 1e-14) continue;
    const Vec3 s = o - v0;
    const double u = s.dot(h) / det;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 q = s.cross(e1);
    const double v = d.dot(q) / det;
    if (v < 0.0 || u + v > 1.0) continue;
    if (e2.dot(q) / det > 0.0) ++hits;
  }
  return hits;
}

// Majority vote of +x, +y, +z ray parities.
inline bool ray_parity_inside(const sdfield::TriangleMesh& mesh, const Vec3& p) {
  int votes = 0;
  for (int a = 0; a < 3; ++a) votes += ray_crossings(mesh, p, Vec3::Unit(a)) % 2;
  return votes >= 2;
}

// Rotation from a normalized random quaternion.
inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Finite-difference relative error with a floor for entries that are both
// essentially zero.
inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace oracle
