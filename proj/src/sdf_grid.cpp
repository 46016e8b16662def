#include "sdfield/sdf_grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>

#include "sdfield/binary_io.hpp"
#include "sdfield/error.hpp"
#include "sdfield/parallel.hpp"

namespace sdfield {

namespace {

constexpr char kGridMagic[4] = {'S', 'D', 'F', 'G'};
constexpr std::uint32_t kGridVersion = 1;

void check_grid_args(int resolution, const Box& bbox) {
  if (resolution < 2) {
    throw Error(ErrorKind::InvalidResolution,
                "resolution must be >= 2, got " + std::to_string(resolution));
  }
  if (!((bbox.max.array() > bbox.min.array()).all())) {
    throw Error(ErrorKind::InvalidArgument, "bounding box is degenerate");
  }
}

}  // namespace

// The box is held at f32 precision so that it survives the file format.
SdfGrid::SdfGrid(std::array<int, 3> res, const Box& box)
    : resolution(res),
      bbox_min(box.min.cast<float>().cast<double>()),
      bbox_max(box.max.cast<float>().cast<double>()),
      values(size(), 0.0f) {}

std::array<int, 3> SdfGrid::coords(std::size_t idx) const {
  const int i = static_cast<int>(idx % resolution[0]);
  idx /= resolution[0];
  const int j = static_cast<int>(idx % resolution[1]);
  const int k = static_cast<int>(idx / resolution[1]);
  return {i, j, k};
}

Vec3 SdfGrid::spacing() const {
  const Vec3 extent = bbox_max - bbox_min;
  return {extent.x() / (resolution[0] - 1), extent.y() / (resolution[1] - 1),
          extent.z() / (resolution[2] - 1)};
}

Vec3 SdfGrid::lattice_point(int i, int j, int k) const {
  const Vec3 extent = bbox_max - bbox_min;
  return {bbox_min.x() + i * (extent.x() / (resolution[0] - 1)),
          bbox_min.y() + j * (extent.y() / (resolution[1] - 1)),
          bbox_min.z() + k * (extent.z() / (resolution[2] - 1))};
}

Vec3 SdfGrid::lattice_point(std::size_t idx) const {
  const auto c = coords(idx);
  return lattice_point(c[0], c[1], c[2]);
}

double SdfGrid::sample(const Vec3& p) const {
  const Vec3 h = spacing();
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  for (int a = 0; a < 3; ++a) {
    const double u = std::clamp((p[a] - bbox_min[a]) / h[a], 0.0, resolution[a] - 1.0);
    base[a] = std::min(static_cast<int>(std::floor(u)), resolution[a] - 2);
    frac[a] = u - base[a];
  }
  double result = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    const int di = corner & 1;
    const int dj = (corner >> 1) & 1;
    const int dk = (corner >> 2) & 1;
    const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                     (dk ? frac[2] : 1.0 - frac[2]);
    result += w * at(base[0] + di, base[1] + dj, base[2] + dk);
  }
  return result;
}

GridStats grid_stats(const SdfGrid& grid) {
  GridStats s;
  if (grid.values.empty()) return s;
  const auto [lo, hi] = std::minmax_element(grid.values.begin(), grid.values.end());
  s.min_value = *lo;
  s.max_value = *hi;
  const auto negative = std::count_if(grid.values.begin(), grid.values.end(),
                                      [](float v) { return v < 0.0f; });
  s.negative_fraction = static_cast<double>(negative) / grid.values.size();
  return s;
}

SdfGrid build_sdf_grid(const MeshSdf& sdf, int resolution, const Box& bbox, bool parallel,
                       std::size_t* uncertain_signs) {
  check_grid_args(resolution, bbox);
  SdfGrid grid({resolution, resolution, resolution}, bbox);
  std::atomic<std::size_t> uncertain{0};
  parallel_for(
      grid.size(),
      [&](std::size_t begin, std::size_t end) {
        std::size_t local = 0;
        for (std::size_t i = begin; i < end; ++i) {
          const auto q = sdf.query(grid.lattice_point(i));
          grid.values[i] = static_cast<float>(q.value);
          local += q.uncertain_sign ? 1 : 0;
        }
        uncertain += local;
      },
      parallel);
  if (uncertain_signs != nullptr) *uncertain_signs = uncertain.load();
  return grid;
}

SdfGrid build_sdf_grid(const TriangleMesh& mesh, int resolution, const Box& bbox, bool parallel) {
  check_grid_args(resolution, bbox);
  return build_sdf_grid(MeshSdf(mesh), resolution, bbox, parallel);
}

SdfGrid build_sdf_grid(const std::function<double(const Vec3&)>& field, int resolution,
                       const Box& bbox, bool parallel) {
  check_grid_args(resolution, bbox);
  SdfGrid grid({resolution, resolution, resolution}, bbox);
  parallel_for(
      grid.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          grid.values[i] = static_cast<float>(field(grid.lattice_point(i)));
        }
      },
      parallel);
  return grid;
}

void write_sdf_grid(std::ostream& out, const SdfGrid& grid) {
  out.write(kGridMagic, 4);
  binary::write_u32(out, kGridVersion);
  for (int r : grid.resolution) binary::write_u32(out, static_cast<std::uint32_t>(r));
  for (int a = 0; a < 3; ++a) binary::write_f32(out, static_cast<float>(grid.bbox_min[a]));
  for (int a = 0; a < 3; ++a) binary::write_f32(out, static_cast<float>(grid.bbox_max[a]));
  for (float v : grid.values) binary::write_f32(out, v);
  if (!out) throw Error(ErrorKind::IoError, "failed writing SDFG stream");
}

SdfGrid read_sdf_grid(std::istream& in) {
  char magic[4] = {};
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kGridMagic)) {
    throw Error(ErrorKind::ParseError, "missing SDFG magic");
  }
  const auto version = binary::read_u32(in);
  if (version != kGridVersion) {
    throw Error(ErrorKind::ParseError, "unsupported SDFG version " + std::to_string(version));
  }
  SdfGrid grid;
  for (auto& r : grid.resolution) {
    const auto v = binary::read_u32(in);
    if (v < 2 || v > 4096) throw Error(ErrorKind::ParseError, "bad SDFG resolution");
    r = static_cast<int>(v);
  }
  for (int a = 0; a < 3; ++a) grid.bbox_min[a] = binary::read_f32(in);
  for (int a = 0; a < 3; ++a) grid.bbox_max[a] = binary::read_f32(in);
  grid.values.resize(grid.size());
  for (auto& v : grid.values) v = binary::read_f32(in);
  return grid;
}

void save_sdf_grid(const std::string& path, const SdfGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write_sdf_grid(out, grid);
}

SdfGrid load_sdf_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return read_sdf_grid(in);
}

}  // namespace sdfield
