#pragma once

#include <cstddef>
#include <span>

#include "sdfield/camera.hpp"
#include "sdfield/encoder.hpp"
#include "sdfield/model.hpp"
#include "sdfield/sdf_grid.hpp"

namespace sdfield {

struct IsoSurfaceConfig {
  int resolution = 64;
  double iso_value = 0.0;
  Box bbox = Box::cube(0.5);

  void validate() const;
};

// An encoded view and the camera used to project lattice points into it.
struct ViewFeatures {
  const FeatureMapStack* stack = nullptr;
  CameraPose pose;
  Intrinsics intrinsics;
};

struct FieldResult {
  SdfGrid grid;
  // Lattice points that projected at or behind a camera and were sampled at
  // the principal point instead.
  std::size_t projection_fallbacks = 0;
};

// Model field at every lattice point. With several views the global and
// local features are max-pooled across views before decoding.
FieldResult evaluate_field(const SdfModel& model, std::span<const ViewFeatures> views,
                           const IsoSurfaceConfig& cfg);
FieldResult evaluate_field(const SdfModel& model, const FeatureMapStack& stack, const CameraPose& pose,
                           const Intrinsics& intr, const IsoSurfaceConfig& cfg);

// encode -> evaluate_field -> marching_cubes at cfg.iso_value.
TriangleMesh reconstruct(const SdfModel& model, const Image& image, const CameraPose& pose,
                         const Intrinsics& intr, const IsoSurfaceConfig& cfg);

}  // namespace sdfield
