#include "sdfield/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "sdfield/assignment.hpp"
#include "sdfield/distance.hpp"
#include "sdfield/error.hpp"
#include "sdfield/parallel.hpp"

namespace sdfield {

namespace {

// For each point of a, squared distance to its nearest point of b.
std::vector<double> nearest_sq(const PointCloud& a, const PointCloud& b) {
  std::vector<double> out(a.size());
  parallel_for(a.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : b) best = std::min(best, (a[i] - q).squaredNorm());
      out[i] = best;
    }
  });
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void require_nonempty(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyCloud, "point cloud is empty");
}

double greedy_matching(const PointCloud& a, const PointCloud& b) {
  const std::size_t n = a.size();
  struct Pair {
    double d;
    std::uint32_t i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      pairs.push_back({(a[i] - b[j]).norm(), static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.d != y.d) return x.d < y.d;
    return x.i != y.i ? x.i < y.i : x.j < y.j;
  });
  std::vector<char> used_a(n, 0), used_b(n, 0);
  double total = 0.0;
  std::size_t matched = 0;
  for (const Pair& p : pairs) {
    if (used_a[p.i] || used_b[p.j]) continue;
    used_a[p.i] = used_b[p.j] = 1;
    total += p.d;
    if (++matched == n) break;
  }
  return total / static_cast<double>(n);
}

std::vector<char> occupancy(const TriangleMesh& mesh, const Box& box, int res, std::size_t& uncertain) {
  const std::size_t total = static_cast<std::size_t>(res) * res * res;
  std::vector<char> occ(total, 0);
  uncertain = 0;
  if (mesh.faces.empty()) return occ;
  const MeshSdf sdf(mesh);
  const Vec3 step = box.extent() / res;
  std::vector<char> unsure(total, 0);
  parallel_for(total, [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t i = idx % res, j = (idx / res) % res, k = idx / (static_cast<std::size_t>(res) * res);
      const Vec3 c = box.min + Vec3((i + 0.5) * step.x(), (j + 0.5) * step.y(), (k + 0.5) * step.z());
      const MeshSdf::Side s = sdf.side(c);
      occ[idx] = s.inside;
      unsure[idx] = s.uncertain;
    }
  });
  for (char u : unsure) uncertain += u;
  return occ;
}

}  // namespace

PointCloud sample_surface_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidCount, "need at least one sample point");
  if (mesh.faces.empty()) throw Error(ErrorKind::DegenerateMesh, "mesh has no faces");
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    const Vec3& a = mesh.vertices[face[0]];
    total += 0.5 * (mesh.vertices[face[1]] - a).cross(mesh.vertices[face[2]] - a).norm();
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::DegenerateMesh, "mesh has zero surface area");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  PointCloud out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double pick = uniform(rng) * total;
    std::size_t f = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                             cumulative.begin());
    f = std::min(f, cumulative.size() - 1);
    double u = uniform(rng), v = uniform(rng);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const auto& face = mesh.faces[f];
    const Vec3& a = mesh.vertices[face[0]];
    out.push_back(a + u * (mesh.vertices[face[1]] - a) + v * (mesh.vertices[face[2]] - a));
  }
  return out;
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  require_nonempty(a, b);
  return mean(nearest_sq(a, b)) + mean(nearest_sq(b, a));
}

EmdResult emd(const PointCloud& a, const PointCloud& b, const EmdOptions& opts) {
  require_nonempty(a, b);
  if (a.size() != b.size())
    throw Error(ErrorKind::CorrespondenceMismatch, "emd needs equal-size clouds (" + std::to_string(a.size()) +
                                                       " vs " + std::to_string(b.size()) + ")");
  const std::size_t n = a.size();
  EmdResult out;
  if (n > opts.exact_cap) {
    if (!opts.approximate)
      throw Error(ErrorKind::TooLarge, std::to_string(n) + " points exceed the exact emd cap of " +
                                           std::to_string(opts.exact_cap));
    out.approximate = true;
    out.value = greedy_matching(a, b);
    double da = 0.0, db = 0.0;
    for (double d : nearest_sq(a, b)) da += std::sqrt(d);
    for (double d : nearest_sq(b, a)) db += std::sqrt(d);
    out.lower_bound = std::max(da, db) / static_cast<double>(n);
    return out;
  }
  Eigen::MatrixXd cost(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost(i, j) = (a[i] - b[j]).norm();
  out.value = solve_assignment(cost).cost / static_cast<double>(n);
  out.lower_bound = out.value;
  return out;
}

IouResult voxel_iou(const TriangleMesh& mesh_a, const TriangleMesh& mesh_b, int resolution) {
  if (resolution < 2) throw Error(ErrorKind::InvalidResolution, "iou resolution must be >= 2");
  IouResult out;
  const bool ea = mesh_a.faces.empty(), eb = mesh_b.faces.empty();
  if (ea && eb) return out;
  Box box;
  if (ea) {
    box = mesh_b.bounds();
  } else if (eb) {
    box = mesh_a.bounds();
  } else {
    const Box ba = mesh_a.bounds(), bb = mesh_b.bounds();
    box = {ba.min.cwiseMin(bb.min), ba.max.cwiseMax(bb.max)};
  }
  std::size_t ua = 0, ub = 0;
  const std::vector<char> oa = occupancy(mesh_a, box, resolution, ua);
  const std::vector<char> ob = occupancy(mesh_b, box, resolution, ub);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < oa.size(); ++i) {
    inter += oa[i] && ob[i];
    uni += oa[i] || ob[i];
  }
  out.iou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  out.uncertain_fraction = static_cast<double>(ua + ub) / static_cast<double>(2 * oa.size());
  out.unreliable = out.uncertain_fraction > 0.01;
  return out;
}

void write_report(std::ostream& out, const MetricReport& r) {
  const auto field = [&](const char* key, const std::optional<double>& v) {
    out << key << '=';
    if (v) out << *v;
    else out << "unavailable";
    out << '\n';
  };
  const auto old = out.precision(10);
  field("cd", r.cd);
  field("emd", r.emd);
  field("iou", r.iou);
  out << "n_points=" << r.n_points << '\n';
  out << "notes=" << r.notes << '\n';
  out.precision(old);
}

void write_report_table(std::ostream& out, const MetricReport& r) {
  const auto cell = [&](const std::optional<double>& v, double scale) {
    if (v) out << *v * scale;
    else out << '-';
  };
  out << "# CD(x1e-3)\tEMD(x1e-2)\tIoU(%)\n";
  cell(r.cd, 1e3);
  out << '\t';
  cell(r.emd, 1e2);
  out << '\t';
  cell(r.iou, 1e2);
  out << '\n';
}

}  // namespace sdfield
