#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "sdfield/mesh.hpp"

namespace sdfield {

using Mat3 = Eigen::Matrix3d;
using PointCloud = std::vector<Vec3>;

// Continuous 6D rotation parameterization: two unconstrained 3-vectors.
struct Rotation6D {
  Vec3 bx = Vec3::UnitX();
  Vec3 by = Vec3::UnitY();
};

// World-to-camera extrinsics; R has rows (Rx, Ry, Rz) and maps column
// vectors, p_cam = R * p_world + t. The camera looks down +z, +y points down
// in the image.
struct CameraPose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return R * p + t; }
  Vec3 center() const { return -R.transpose() * t; }
  // Camera at eye looking at target; `up` fixes the roll (image up).
  static CameraPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up);
};

struct Intrinsics {
  double focal = 128.0;
  double cx = 64.0;
  double cy = 64.0;
  int width = 128;
  int height = 128;

  // focal = width, principal point at the image center.
  static Intrinsics defaults(int width = 128, int height = 128);
  void validate() const;
};

Mat3 rotation_from_6d(const Rotation6D& b);
Rotation6D six_d_from_rotation(const Mat3& R);
CameraPose pose_from_6d(const Rotation6D& b, const Vec3& t);

Vec3 transform_world_to_camera(const CameraPose& pose, const Vec3& p);
// Throws BehindCamera when the depth is not positive.
Vec2 project_point(const Intrinsics& intr, const Vec3& p_cam);

// Mean squared distance between pc_g and the transformed pc_w.
double camera_loss(const Rotation6D& b, const Vec3& t, const PointCloud& pc_w,
                   const PointCloud& pc_g);

struct CameraLossGradient {
  double loss = 0.0;
  Vec3 d_bx = Vec3::Zero();
  Vec3 d_by = Vec3::Zero();
  Vec3 d_t = Vec3::Zero();
};

CameraLossGradient camera_loss_gradient(const Rotation6D& b, const Vec3& t, const PointCloud& pc_w,
                                        const PointCloud& pc_g);

struct PoseFitOptions {
  double learning_rate = 1e-2;
  // Cosine decay towards this rate over the second half of each run.
  double final_learning_rate = 1e-7;
  int restarts = 20;
  int max_steps = 2000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-12;
  double tolerance = 1e-20;
  bool parallel = true;
};

struct PoseFitResult {
  CameraPose pose;
  Rotation6D rotation;
  double loss = 0.0;
  int best_restart = 0;
  // Best loss seen so far, one entry per step, restarts concatenated in index
  // order.
  std::vector<double> history;
};

PoseFitResult fit_pose(const PointCloud& pc_w, const PointCloud& pc_g, std::uint64_t seed,
                       const PoseFitOptions& opts = {});

struct PoseMetrics {
  double d3d = 0.0;
  double d2d = 0.0;
};

PoseMetrics pose_metrics(const CameraPose& pred, const CameraPose& gt, const PointCloud& pc_w,
                         const Intrinsics& intr);

// 2D-free correspondences for pose fitting: one `xw yw zw xc yc zc` line per
// point (world coordinates, then the same point in camera coordinates).
struct Correspondences {
  PointCloud world;
  PointCloud camera;
};
void write_correspondences(std::ostream& out, const Correspondences& c);
Correspondences read_correspondences(std::istream& in);
Correspondences load_correspondences(const std::string& path);

// `bx1 bx2 bx3 by1 by2 by3 t1 t2 t3` on one line.
void write_pose(std::ostream& out, const Rotation6D& b, const Vec3& t);
CameraPose read_pose(std::istream& in);
void save_pose(const std::string& path, const CameraPose& pose);
CameraPose load_pose(const std::string& path);

}  // namespace sdfield
