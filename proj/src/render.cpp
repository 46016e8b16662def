#include "sdfield/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdfield/error.hpp"
#include "sdfield/parallel.hpp"

namespace sdfield {

namespace {

// Slab test; returns false on a miss.
bool intersect_box(const Box& box, const Vec3& origin, const Vec3& dir, double& t0, double& t1) {
  t0 = 0.0;
  t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-300) {
      if (origin[a] < box.min[a] || origin[a] > box.max[a]) return false;
      continue;
    }
    double lo = (box.min[a] - origin[a]) / dir[a];
    double hi = (box.max[a] - origin[a]) / dir[a];
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

Image render_depth_image(const SdfGrid& grid, const CameraPose& pose, const Intrinsics& intr,
                         int width, int height, const RenderOptions& opts) {
  intr.validate();
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "bad image size");
  const Box box = grid.box();
  const Vec3 eye = pose.center();
  if (box.contains(eye)) throw Error(ErrorKind::InvalidPose, "camera center lies inside the grid box");

  const double hit_eps = opts.hit_fraction * grid.spacing().minCoeff();
  const Mat3 Rt = pose.R.transpose();
  Image img(width, height, 1);
  parallel_for(static_cast<std::size_t>(height), [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      for (int x = 0; x < width; ++x) {
        const Vec3 dir_cam((x - intr.cx) / intr.focal, (static_cast<double>(y) - intr.cy) / intr.focal,
                           1.0);
        const Vec3 dir = (Rt * dir_cam).normalized();
        double t = 0.0;
        double t_exit = 0.0;
        if (!intersect_box(box, eye, dir, t, t_exit)) continue;
        for (int step = 0; step < opts.max_steps && t <= t_exit; ++step) {
          const Vec3 p = eye + t * dir;
          const double d = grid.sample(p);
          if (d < hit_eps) {
            img.at(x, static_cast<int>(y)) = static_cast<float>((pose.R * p + pose.t).z());
            break;
          }
          t += std::max(opts.step_scale * d, hit_eps);
        }
      }
    }
  });
  return img;
}

Image normalize_depth(const Image& depth, double near_depth, double far_depth) {
  if (!(far_depth > near_depth)) throw Error(ErrorKind::InvalidArgument, "far must exceed near");
  Image out(depth.width, depth.height, depth.channels);
  for (std::size_t i = 0; i < depth.pixels.size(); ++i) {
    const double d = depth.pixels[i];
    out.pixels[i] =
        d > 0.0 ? static_cast<float>(std::clamp((far_depth - d) / (far_depth - near_depth), 0.0, 1.0))
                : 0.0f;
  }
  return out;
}

std::pair<double, double> depth_range(const Box& box, const CameraPose& pose) {
  const double center = pose.apply(box.center()).z();
  const double half = 0.5 * box.diagonal();
  return {std::max(center - half, 1e-6), center + half};
}

}  // namespace sdfield
