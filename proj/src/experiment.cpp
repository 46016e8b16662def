#include "sdfield/experiment.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "sdfield/error.hpp"
#include "sdfield/mesh_io.hpp"
#include "sdfield/render.hpp"
#include "sdfield/sampling.hpp"

namespace sdfield {

CameraPose orbit_pose(double distance, double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * std::numbers::pi / 180.0;
  const double el = elevation_deg * std::numbers::pi / 180.0;
  const Vec3 eye = distance * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  return CameraPose::look_at(eye, Vec3::Zero(), Vec3(0.0, 0.0, 1.0));
}

void make_shape(const RunConfig& cfg, TriangleMesh& surface, std::function<double(const Vec3&)>& truth) {
  if (cfg.shape == "sphere") {
    const double r = cfg.sphere_radius;
    surface = make_icosphere(r, 5);
    truth = [r](const Vec3& p) { return p.norm() - r; };
    return;
  }
  TriangleMesh raw;
  if (cfg.shape == "mesh") raw = load_mesh(cfg.mesh_path);
  else if (cfg.shape == "cube") raw = make_box(Vec3(-1, -1, -1), Vec3(1, 1, 1));
  else if (cfg.shape == "torus") raw = make_torus(cfg.torus_major, cfg.torus_minor, 96, 48);
  else raw = make_torus_with_bump(cfg.torus_major, cfg.torus_minor, 160, 64, cfg.bump);
  surface = normalize_mesh(raw, cfg.normalize_margin).first;
  auto sdf = std::make_shared<const MeshSdf>(surface);
  truth = [sdf](const Vec3& p) { return sdf->signed_distance(p); };
}

Image render_view(const SdfGrid& grid, const CameraPose& pose, const Intrinsics& intr) {
  const Image depth = render_depth_image(grid, pose, intr, intr.width, intr.height);
  const auto [near_depth, far_depth] = depth_range(grid.box(), pose);
  return normalize_depth(depth, near_depth, far_depth);
}

Experiment prepare_experiment(const RunConfig& cfg) {
  cfg.validate();
  Experiment ex;
  make_shape(cfg, ex.surface, ex.truth);
  const Box box = Box::cube(cfg.grid_half_extent);
  ex.grid = build_sdf_grid(ex.truth, cfg.grid_resolution, box);

  ex.view.pose = orbit_pose(cfg.camera_distance, cfg.camera_azimuth_deg, cfg.camera_elevation_deg);
  ex.view.intrinsics = cfg.intrinsics;
  ex.view.image = render_view(ex.grid, ex.view.pose, cfg.intrinsics);

  ex.train.views = {ex.view};
  for (const PointSample& s : sample_training_points(ex.grid, cfg.sample_count, cfg.sample_sigma, cfg.sample_seed))
    ex.train.examples.push_back({s, 0});

  ex.heldout.views = {ex.view};
  std::mt19937_64 rng(cfg.heldout_seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  const Vec3 cell = ex.grid.spacing();
  for (PointSample s : sample_training_points(ex.grid, cfg.heldout_count, cfg.sample_sigma, cfg.heldout_seed)) {
    for (int a = 0; a < 3; ++a) s.p[a] += jitter(rng) * cell[a];
    s.s = ex.truth(s.p);
    ex.heldout.examples.push_back({s, 0});
  }
  return ex;
}

SdfModel initial_model(const RunConfig& cfg) {
  SdfModel m = make_model(cfg.dims, cfg.variant, cfg.model_seed);
  if (!cfg.local_stream) m = restrict_to_global(m);
  return m;
}

}  // namespace sdfield
