#include "sdfield/camera.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "sdfield/error.hpp"
#include "sdfield/parallel.hpp"

namespace sdfield {

namespace {

constexpr double kDegenerate = 1e-9;

void check_clouds(const PointCloud& pc_w, const PointCloud& pc_g) {
  if (pc_w.size() != pc_g.size()) {
    throw Error(ErrorKind::CorrespondenceMismatch,
                std::to_string(pc_w.size()) + " world points vs " + std::to_string(pc_g.size()) +
                    " camera points");
  }
  if (pc_w.empty()) throw Error(ErrorKind::CorrespondenceMismatch, "empty point cloud");
}

// Gradient of y = x / |x| pulled back to x.
Vec3 normalize_backward(const Vec3& x, const Vec3& grad_y) {
  const double n = x.norm();
  const Vec3 y = x / n;
  return (grad_y - y * y.dot(grad_y)) / n;
}

}  // namespace

CameraPose CameraPose::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 z = (target - eye).normalized();
  const Vec3 y = -(up - up.dot(z) * z).normalized();
  const Vec3 x = y.cross(z);
  CameraPose pose;
  pose.R.row(0) = x.transpose();
  pose.R.row(1) = y.transpose();
  pose.R.row(2) = z.transpose();
  pose.t = -pose.R * eye;
  return pose;
}

Intrinsics Intrinsics::defaults(int width, int height) {
  return {static_cast<double>(width), width / 2.0, height / 2.0, width, height};
}

void Intrinsics::validate() const {
  if (!(focal > 0.0) || width <= 0 || height <= 0 || cx < 0.0 || cx > width || cy < 0.0 ||
      cy > height) {
    throw Error(ErrorKind::InvalidArgument, "invalid camera intrinsics");
  }
}

Mat3 rotation_from_6d(const Rotation6D& b) {
  const double nx = b.bx.norm();
  if (!(nx > kDegenerate) || !(b.bx.cross(b.by).norm() > kDegenerate)) {
    throw Error(ErrorKind::DegenerateRotation, "bx and by must be non-zero and non-parallel");
  }
  const Vec3 rx = b.bx / nx;
  const Vec3 rz = rx.cross(b.by).normalized();
  const Vec3 ry = rz.cross(rx);
  Mat3 R;
  R.row(0) = rx.transpose();
  R.row(1) = ry.transpose();
  R.row(2) = rz.transpose();
  return R;
}

Rotation6D six_d_from_rotation(const Mat3& R) {
  const double ortho = (R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho <= 1e-6) || !(std::abs(R.determinant() - 1.0) <= 1e-6)) {
    throw Error(ErrorKind::InvalidRotation, "matrix is not a proper rotation");
  }
  return {R.row(0).transpose(), R.row(1).transpose()};
}

CameraPose pose_from_6d(const Rotation6D& b, const Vec3& t) { return {rotation_from_6d(b), t}; }

Vec3 transform_world_to_camera(const CameraPose& pose, const Vec3& p) { return pose.R * p + pose.t; }

Vec2 project_point(const Intrinsics& intr, const Vec3& p_cam) {
  if (!(p_cam.z() > kDegenerate)) {
    throw Error(ErrorKind::BehindCamera, "point depth " + std::to_string(p_cam.z()));
  }
  return {intr.focal * p_cam.x() / p_cam.z() + intr.cx, intr.focal * p_cam.y() / p_cam.z() + intr.cy};
}

double camera_loss(const Rotation6D& b, const Vec3& t, const PointCloud& pc_w,
                   const PointCloud& pc_g) {
  check_clouds(pc_w, pc_g);
  const Mat3 R = rotation_from_6d(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < pc_w.size(); ++i) sum += (pc_g[i] - (R * pc_w[i] + t)).squaredNorm();
  return sum / static_cast<double>(pc_w.size());
}

CameraLossGradient camera_loss_gradient(const Rotation6D& b, const Vec3& t, const PointCloud& pc_w,
                                        const PointCloud& pc_g) {
  check_clouds(pc_w, pc_g);
  const Mat3 R = rotation_from_6d(b);
  const double inv_n = 1.0 / static_cast<double>(pc_w.size());

  CameraLossGradient g;
  Mat3 dR = Mat3::Zero();
  for (std::size_t i = 0; i < pc_w.size(); ++i) {
    const Vec3 r = pc_g[i] - (R * pc_w[i] + t);
    g.loss += r.squaredNorm();
    dR -= 2.0 * r * pc_w[i].transpose();
    g.d_t -= 2.0 * r;
  }
  g.loss *= inv_n;
  dR *= inv_n;
  g.d_t *= inv_n;

  // Reverse through Rx = N(bx), u = Rx x by, Rz = N(u), Ry = Rz x Rx.
  const Vec3 rx = R.row(0).transpose();
  const Vec3 rz = R.row(2).transpose();
  Vec3 g_rx = dR.row(0).transpose();
  const Vec3 g_ry = dR.row(1).transpose();
  Vec3 g_rz = dR.row(2).transpose();
  g_rz += rx.cross(g_ry);
  g_rx += g_ry.cross(rz);
  const Vec3 u = rx.cross(b.by);
  const Vec3 g_u = normalize_backward(u, g_rz);
  g_rx += b.by.cross(g_u);
  g.d_by = g_u.cross(rx);
  g.d_bx = normalize_backward(b.bx, g_rx);
  return g;
}

PoseFitResult fit_pose(const PointCloud& pc_w, const PointCloud& pc_g, std::uint64_t seed,
                       const PoseFitOptions& opts) {
  check_clouds(pc_w, pc_g);
  if (pc_w.size() < 3) throw Error(ErrorKind::DegenerateCloud, "need >= 3 correspondences");
  {
    Vec3 mean = Vec3::Zero();
    for (const auto& p : pc_w) mean += p;
    mean /= static_cast<double>(pc_w.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : pc_w) cov += (p - mean) * (p - mean).transpose();
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const auto ev = eig.eigenvalues();  // ascending
    if (!(ev(1) > 1e-12 * std::max(ev(2), 1e-300))) {
      throw Error(ErrorKind::DegenerateCloud, "world points are collinear");
    }
  }
  if (opts.restarts < 1 || opts.max_steps < 0) {
    throw Error(ErrorKind::InvalidArgument, "pose fit needs >= 1 restart");
  }

  struct Run {
    Rotation6D b;
    Vec3 t = Vec3::Zero();
    double loss = std::numeric_limits<double>::infinity();
    std::vector<double> losses;
  };
  std::vector<Run> runs(static_cast<std::size_t>(opts.restarts));

  auto run_one = [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    Rotation6D b;
    do {
      b.bx = Vec3(normal(rng), normal(rng), normal(rng));
      b.by = Vec3(normal(rng), normal(rng), normal(rng));
    } while (b.bx.norm() < 1e-3 || b.bx.cross(b.by).norm() < 1e-3);
    Vec3 t(normal(rng), normal(rng), normal(rng));

    Eigen::Matrix<double, 9, 1> m = Eigen::Matrix<double, 9, 1>::Zero();
    Eigen::Matrix<double, 9, 1> v = Eigen::Matrix<double, 9, 1>::Zero();
    Run& run = runs[r];
    run.losses.reserve(static_cast<std::size_t>(opts.max_steps));
    const int warm = opts.max_steps / 2;
    for (int step = 0; step < opts.max_steps; ++step) {
      const auto g = camera_loss_gradient(b, t, pc_w, pc_g);
      if (g.loss < run.loss) {
        run.loss = g.loss;
        run.b = b;
        run.t = t;
      }
      run.losses.push_back(run.loss);
      if (g.loss <= opts.tolerance) break;

      double lr = opts.learning_rate;
      if (step >= warm && opts.max_steps > warm) {
        const double frac = static_cast<double>(step - warm) / (opts.max_steps - warm);
        lr = opts.final_learning_rate +
             0.5 * (opts.learning_rate - opts.final_learning_rate) *
                 (1.0 + std::cos(std::numbers::pi * frac));
      }
      Eigen::Matrix<double, 9, 1> grad;
      grad << g.d_bx, g.d_by, g.d_t;
      m = opts.beta1 * m + (1.0 - opts.beta1) * grad;
      v = opts.beta2 * v + (1.0 - opts.beta2) * grad.cwiseProduct(grad);
      const double c1 = 1.0 - std::pow(opts.beta1, step + 1);
      const double c2 = 1.0 - std::pow(opts.beta2, step + 1);
      const Eigen::Matrix<double, 9, 1> delta =
          lr * (m / c1).array() / ((v / c2).array().sqrt() + opts.epsilon);
      b.bx -= delta.segment<3>(0);
      b.by -= delta.segment<3>(3);
      t -= delta.segment<3>(6);
      if (b.bx.norm() < kDegenerate || b.bx.cross(b.by).norm() < kDegenerate) break;
    }
    if (run.losses.empty()) {
      run.b = b;
      run.t = t;
      run.loss = camera_loss(b, t, pc_w, pc_g);
      run.losses.push_back(run.loss);
    }
  };

  parallel_for(
      runs.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) run_one(r);
      },
      opts.parallel);

  PoseFitResult result;
  result.loss = std::numeric_limits<double>::infinity();
  double best_so_far = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].loss < result.loss) {
      result.loss = runs[r].loss;
      result.best_restart = static_cast<int>(r);
    }
    for (double l : runs[r].losses) {
      best_so_far = std::min(best_so_far, l);
      result.history.push_back(best_so_far);
    }
  }
  const Run& best = runs[static_cast<std::size_t>(result.best_restart)];
  result.rotation = best.b;
  result.pose = pose_from_6d(best.b, best.t);
  return result;
}

PoseMetrics pose_metrics(const CameraPose& pred, const CameraPose& gt, const PointCloud& pc_w,
                         const Intrinsics& intr) {
  if (pc_w.empty()) throw Error(ErrorKind::EmptyCloud, "pose metrics need points");
  PoseMetrics m;
  for (const auto& p : pc_w) {
    const Vec3 a = pred.apply(p);
    const Vec3 b = gt.apply(p);
    m.d3d += (a - b).norm();
    m.d2d += (project_point(intr, a) - project_point(intr, b)).norm();
  }
  m.d3d /= static_cast<double>(pc_w.size());
  m.d2d /= static_cast<double>(pc_w.size());
  return m;
}

void write_pose(std::ostream& out, const Rotation6D& b, const Vec3& t) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << b.bx.x() << ' ' << b.bx.y() << ' ' << b.bx.z() << ' ' << b.by.x() << ' ' << b.by.y()
      << ' ' << b.by.z() << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << '\n';
}

CameraPose read_pose(std::istream& in) {
  Rotation6D b;
  Vec3 t;
  if (!(in >> b.bx.x() >> b.bx.y() >> b.bx.z() >> b.by.x() >> b.by.y() >> b.by.z() >> t.x() >>
        t.y() >> t.z())) {
    throw Error(ErrorKind::ParseError, "pose file needs 9 numbers: bx by t");
  }
  return pose_from_6d(b, t);
}

void save_pose(const std::string& path, const CameraPose& pose) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write_pose(out, six_d_from_rotation(pose.R), pose.t);
}

CameraPose load_pose(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return read_pose(in);
}

void write_correspondences(std::ostream& out, const Correspondences& c) {
  if (c.world.size() != c.camera.size())
    throw Error(ErrorKind::CorrespondenceMismatch, "world and camera clouds differ in size");
  out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < c.world.size(); ++i) {
    const Vec3& w = c.world[i];
    const Vec3& g = c.camera[i];
    out << w.x() << ' ' << w.y() << ' ' << w.z() << ' ' << g.x() << ' ' << g.y() << ' ' << g.z() << '\n';
  }
}

Correspondences read_correspondences(std::istream& in) {
  Correspondences c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double v[6];
    int n = 0;
    while (n < 6 && ls >> v[n]) ++n;
    if (n == 0 && ls.eof()) continue;
    std::string rest;
    if (n != 6 || (ls >> rest))
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected 6 numbers");
    c.world.emplace_back(v[0], v[1], v[2]);
    c.camera.emplace_back(v[3], v[4], v[5]);
  }
  return c;
}

Correspondences load_correspondences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return read_correspondences(in);
}

}  // namespace sdfield
