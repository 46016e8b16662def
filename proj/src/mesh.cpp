#include "sdfield/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <string>

#include "sdfield/error.hpp"

namespace sdfield {

Box TriangleMesh::bounds() const {
  if (vertices.empty()) return {};
  Box box{vertices.front(), vertices.front()};
  for (const auto& v : vertices) {
    box.min = box.min.cwiseMin(v);
    box.max = box.max.cwiseMax(v);
  }
  return box;
}

void TriangleMesh::validate() const {
  const auto n = vertices.size();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    for (auto idx : face) {
      if (idx >= n) {
        throw Error(ErrorKind::InvalidMesh, "face " + std::to_string(f) + " references vertex " +
                                                std::to_string(idx) + " of " + std::to_string(n));
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw Error(ErrorKind::InvalidMesh, "face " + std::to_string(f) + " repeats a vertex");
    }
  }
}

double TriangleMesh::area() const {
  double total = 0.0;
  for (const auto& f : faces) {
    total += 0.5 * (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]).norm();
  }
  return total;
}

double TriangleMesh::volume() const {
  double total = 0.0;
  for (const auto& f : faces) {
    total += vertices[f[0]].dot(vertices[f[1]].cross(vertices[f[2]]));
  }
  return total / 6.0;
}

std::pair<TriangleMesh, NormalizationRecord> normalize_mesh(const TriangleMesh& mesh,
                                                            double margin) {
  if (mesh.faces.empty()) throw Error(ErrorKind::InvalidMesh, "mesh has no faces");
  if (!(margin >= 0.0 && margin < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "margin must lie in [0, 0.5)");
  }
  mesh.validate();
  const Box box = mesh.bounds();
  const double longest = box.extent().maxCoeff();
  if (!(longest > 0.0)) throw Error(ErrorKind::InvalidMesh, "mesh bounding box is a point");

  NormalizationRecord record;
  record.offset = box.center();
  record.scale = (1.0 - 2.0 * margin) / longest;

  TriangleMesh out;
  out.faces = mesh.faces;
  out.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) out.vertices.push_back(record.apply(v));
  return {std::move(out), record};
}

TriangleMesh transformed(const TriangleMesh& mesh, double scale, const Vec3& translation) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = v * scale + translation;
  return out;
}

bool is_closed_manifold(const TriangleMesh& mesh) {
  if (mesh.faces.empty()) return false;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      if (++directed[{f[k], f[(k + 1) % 3]}] > 1) return false;
    }
  }
  for (const auto& [edge, count] : directed) {
    if (directed.find({edge.second, edge.first}) == directed.end()) return false;
  }
  return true;
}

long euler_characteristic(const TriangleMesh& mesh) {
  std::set<std::uint32_t> used;
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      used.insert(f[k]);
      const auto a = f[k];
      const auto b = f[(k + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return static_cast<long>(used.size()) - static_cast<long>(edges.size()) +
         static_cast<long>(mesh.faces.size());
}

TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                            (i & 4) ? hi.z() : lo.z());
  }
  // Two triangles per side, counter-clockwise seen from outside.
  m.faces = {{0, 2, 3}, {0, 3, 1},   // z = lo
             {4, 5, 7}, {4, 7, 6},   // z = hi
             {0, 1, 5}, {0, 5, 4},   // y = lo
             {2, 6, 7}, {2, 7, 3},   // y = hi
             {0, 4, 6}, {0, 6, 2},   // x = lo
             {1, 3, 7}, {1, 7, 5}};  // x = hi
  return m;
}

TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7}, {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto idx = static_cast<std::uint32_t>(v.size() - 1);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const auto a = mid(f[0], f[1]);
      const auto b = mid(f[1], f[2]);
      const auto c = mid(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }
  TriangleMesh m;
  m.faces = std::move(faces);
  m.vertices.reserve(v.size());
  for (const auto& p : v) m.vertices.push_back(center + radius * p);
  return m;
}

namespace {

TriangleMesh torus_impl(double R, double r, int nu, int nv, const BumpSpec* bump) {
  if (nu < 3 || nv < 3) throw Error(ErrorKind::InvalidArgument, "torus needs >= 3 segments");
  TriangleMesh m;
  const double two_pi = 2.0 * std::numbers::pi;
  auto wrap = [](double a) { return std::remainder(a, 2.0 * std::numbers::pi); };
  for (int i = 0; i < nu; ++i) {
    const double u = two_pi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double w = two_pi * j / nv;
      const Vec3 ring(std::cos(u), std::sin(u), 0.0);
      const Vec3 normal = std::cos(w) * ring + Vec3(0, 0, std::sin(w));
      double radius = r;
      if (bump != nullptr) {
        const double du = wrap(u - bump->major_angle) * R;
        const double dw = wrap(w - bump->minor_angle) * r;
        radius += bump->height *
                  std::exp(-(du * du + dw * dw) / (2.0 * bump->width * bump->width * r * r));
      }
      m.vertices.push_back(R * ring + radius * normal);
    }
  }
  auto idx = [&](int i, int j) {
    return static_cast<std::uint32_t>(((i + nu) % nu) * nv + ((j + nv) % nv));
  };
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      m.faces.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
      m.faces.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
    }
  }
  return m;
}

}  // namespace

TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments,
                        int minor_segments) {
  return torus_impl(major_radius, minor_radius, major_segments, minor_segments, nullptr);
}

TriangleMesh make_torus_with_bump(double major_radius, double minor_radius, int major_segments,
                                  int minor_segments, const BumpSpec& bump) {
  return torus_impl(major_radius, minor_radius, major_segments, minor_segments, &bump);
}

}  // namespace sdfield
