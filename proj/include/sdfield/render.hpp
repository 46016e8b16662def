#pragma once

#include "sdfield/camera.hpp"
#include "sdfield/image.hpp"
#include "sdfield/sdf_grid.hpp"

namespace sdfield {

struct RenderOptions {
  int max_steps = 512;
  // Surface hit when the interpolated field drops below this fraction of the
  // smallest cell spacing.
  double hit_fraction = 1e-3;
  // Conservative step scale; trilinear interpolation is not exactly 1-Lipschitz.
  double step_scale = 0.9;
};

// Sphere-traces the trilinearly interpolated field. Hit pixels hold the
// positive camera-space depth (z), misses hold 0. Throws InvalidPose when the
// camera center lies inside the grid box.
Image render_depth_image(const SdfGrid& grid, const CameraPose& pose, const Intrinsics& intr,
                         int width, int height, const RenderOptions& opts = {});

// Maps depth into [0, 1] for the encoder: hits become
// (far - depth) / (far - near) clamped to [0, 1], background stays 0.
Image normalize_depth(const Image& depth, double near_depth, double far_depth);
// near/far bracketing a box seen from a pose: center distance -+ half diagonal.
std::pair<double, double> depth_range(const Box& box, const CameraPose& pose);

}  // namespace sdfield
