#include "sdfield/reconstruct.hpp"

#include <atomic>

#include "sdfield/error.hpp"
#include "sdfield/marching_cubes.hpp"
#include "sdfield/parallel.hpp"

namespace sdfield {

void IsoSurfaceConfig::validate() const {
  if (resolution < 2) {
    throw Error(ErrorKind::InvalidResolution, "extraction resolution must be >= 2");
  }
  if (!((bbox.max.array() > bbox.min.array()).all())) {
    throw Error(ErrorKind::InvalidArgument, "extraction box is degenerate");
  }
}

FieldResult evaluate_field(const SdfModel& model, std::span<const ViewFeatures> views,
                           const IsoSurfaceConfig& cfg) {
  cfg.validate();
  model.validate();
  if (views.empty()) throw Error(ErrorKind::ShapeError, "evaluate_field needs at least one view");
  for (const auto& v : views) {
    if (v.stack == nullptr) throw Error(ErrorKind::ShapeError, "view without features");
  }

  FieldResult result;
  result.grid = SdfGrid({cfg.resolution, cfg.resolution, cfg.resolution}, cfg.bbox);
  SdfGrid& grid = result.grid;
  constexpr std::size_t kChunk = 2048;
  const std::size_t n_chunks = (grid.size() + kChunk - 1) / kChunk;
  std::atomic<std::size_t> fallbacks{0};

  std::vector<FeatureMapStack> stacks;
  for (const auto& v : views) stacks.push_back(*v.stack);

  parallel_for(n_chunks, [&](std::size_t c0, std::size_t c1) {
    std::vector<Vec2> qs(views.size());
    for (std::size_t chunk = c0; chunk < c1; ++chunk) {
      const std::size_t begin = chunk * kChunk;
      const std::size_t end = std::min(grid.size(), begin + kChunk);
      const auto n = static_cast<Eigen::Index>(end - begin);
      BatchInputs in{Eigen::MatrixXd(3, n), Eigen::MatrixXd(model.global_dim(), n),
                     Eigen::MatrixXd(model.local_dim(), n)};
      std::size_t local_fallbacks = 0;
      for (Eigen::Index col = 0; col < n; ++col) {
        const Vec3 p = grid.lattice_point(begin + static_cast<std::size_t>(col));
        for (std::size_t v = 0; v < views.size(); ++v) {
          const Vec3 pc = views[v].pose.apply(p);
          if (pc.z() > 1e-9) {
            qs[v] = project_point(views[v].intrinsics, pc);
          } else {
            qs[v] = Vec2(views[v].intrinsics.cx, views[v].intrinsics.cy);
            ++local_fallbacks;
          }
        }
        const PooledFeatures f = pool_multiview(stacks, qs);
        in.points.col(col) = p;
        in.global.col(col) = f.global;
        in.local.col(col) = f.local;
      }
      const Eigen::RowVectorXd values = field_values(model, in);
      for (Eigen::Index col = 0; col < n; ++col) {
        grid.values[begin + static_cast<std::size_t>(col)] = static_cast<float>(values[col]);
      }
      fallbacks += local_fallbacks;
    }
  });
  result.projection_fallbacks = fallbacks.load();
  return result;
}

FieldResult evaluate_field(const SdfModel& model, const FeatureMapStack& stack, const CameraPose& pose,
                           const Intrinsics& intr, const IsoSurfaceConfig& cfg) {
  const ViewFeatures view{&stack, pose, intr};
  return evaluate_field(model, std::span<const ViewFeatures>(&view, 1), cfg);
}

TriangleMesh reconstruct(const SdfModel& model, const Image& image, const CameraPose& pose,
                         const Intrinsics& intr, const IsoSurfaceConfig& cfg) {
  const FeatureMapStack stack = encode_image(image, model.encoder);
  return marching_cubes(evaluate_field(model, stack, pose, intr, cfg).grid, cfg.iso_value);
}

}  // namespace sdfield
