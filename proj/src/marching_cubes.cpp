#include "sdfield/marching_cubes.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace sdfield {

namespace {

#include "mc_tables.inc"

constexpr std::array<std::array<int, 3>, 8> kCornerOffset = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

constexpr std::array<std::array<int, 2>, 12> kEdgeCorners = {{
    {0, 1}, {1, 2}, {3, 2}, {0, 3}, {4, 5}, {5, 6}, {7, 6}, {4, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

// Merges vertices within eps (grid hashing over 27 neighbour buckets), then
// drops faces that collapsed and vertices no face references.
TriangleMesh weld(const TriangleMesh& in, double eps) {
  struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& k) const {
      std::size_t h = 1469598103934665603ull;
      for (auto v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
      return h;
    }
  };
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<std::uint32_t>, KeyHash> buckets;
  std::vector<std::uint32_t> remap(in.vertices.size());
  std::vector<Vec3> kept;
  for (std::size_t i = 0; i < in.vertices.size(); ++i) {
    const Vec3& v = in.vertices[i];
    const std::array<std::int64_t, 3> key = {static_cast<std::int64_t>(std::floor(v.x() / eps)),
                                             static_cast<std::int64_t>(std::floor(v.y() / eps)),
                                             static_cast<std::int64_t>(std::floor(v.z() / eps))};
    std::int64_t found = -1;
    for (int dx = -1; dx <= 1 && found < 0; ++dx) {
      for (int dy = -1; dy <= 1 && found < 0; ++dy) {
        for (int dz = -1; dz <= 1 && found < 0; ++dz) {
          const auto it = buckets.find({key[0] + dx, key[1] + dy, key[2] + dz});
          if (it == buckets.end()) continue;
          for (auto k : it->second) {
            if ((kept[k] - v).norm() <= eps) {
              found = k;
              break;
            }
          }
        }
      }
    }
    if (found < 0) {
      found = static_cast<std::int64_t>(kept.size());
      kept.push_back(v);
      buckets[key].push_back(static_cast<std::uint32_t>(found));
    }
    remap[i] = static_cast<std::uint32_t>(found);
  }

  TriangleMesh out;
  std::vector<std::int64_t> compact(kept.size(), -1);
  for (const auto& f : in.faces) {
    const Face g = {remap[f[0]], remap[f[1]], remap[f[2]]};
    if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) continue;
    Face h{};
    for (int k = 0; k < 3; ++k) {
      if (compact[g[k]] < 0) {
        compact[g[k]] = static_cast<std::int64_t>(out.vertices.size());
        out.vertices.push_back(kept[g[k]]);
      }
      h[k] = static_cast<std::uint32_t>(compact[g[k]]);
    }
    out.faces.push_back(h);
  }
  return out;
}

}  // namespace

TriangleMesh marching_cubes(const SdfGrid& grid, double iso) {
  const auto& res = grid.resolution;
  TriangleMesh raw;
  if (res[0] < 2 || res[1] < 2 || res[2] < 2) return raw;

  // Vertex per lattice edge, keyed by (lower lattice point, axis).
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  auto vertex_on_edge = [&](int i, int j, int k, int axis, double va, double vb) {
    const std::uint64_t key = static_cast<std::uint64_t>(grid.index(i, j, k)) * 3 + axis;
    const auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const Vec3 pa = grid.lattice_point(i, j, k);
    const Vec3 pb = grid.lattice_point(i + (axis == 0), j + (axis == 1), k + (axis == 2));
    const double t = (iso - va) / (vb - va);
    raw.vertices.push_back(pa + t * (pb - pa));
    const auto idx = static_cast<std::uint32_t>(raw.vertices.size() - 1);
    edge_vertex.emplace(key, idx);
    return idx;
  };

  std::array<double, 8> v{};
  std::array<std::uint32_t, 12> ev{};
  for (int k = 0; k + 1 < res[2]; ++k) {
    for (int j = 0; j + 1 < res[1]; ++j) {
      for (int i = 0; i + 1 < res[0]; ++i) {
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          v[c] = grid.at(i + kCornerOffset[c][0], j + kCornerOffset[c][1], k + kCornerOffset[c][2]);
          if (v[c] <= iso) cube |= 1 << c;
        }
        const auto edges = kEdgeTable[cube];
        if (edges == 0) continue;
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          const int a = kEdgeCorners[e][0];
          const int b = kEdgeCorners[e][1];
          int axis = 0;
          while (kCornerOffset[a][axis] == kCornerOffset[b][axis]) ++axis;
          ev[e] = vertex_on_edge(i + kCornerOffset[a][0], j + kCornerOffset[a][1], k + kCornerOffset[a][2],
                                 axis, v[a], v[b]);
        }
        for (int t = 0; kTriTable[cube][t] >= 0; t += 3) {
          raw.faces.push_back({ev[kTriTable[cube][t]], ev[kTriTable[cube][t + 2]], ev[kTriTable[cube][t + 1]]});
        }
      }
    }
  }
  return weld(raw, kWeldEpsilon);
}

}  // namespace sdfield
