#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sdfield/assignment.hpp"
#include "sdfield/error.hpp"
#include "sdfield/metrics.hpp"

using namespace sdfield;

namespace {

PointCloud random_cloud(std::mt19937_64& rng, int n) {
  PointCloud pc;
  for (int i = 0; i < n; ++i) pc.push_back(oracle::random_point(rng, -1, 1));
  return pc;
}

double brute_chamfer(const PointCloud& a, const PointCloud& b) {
  const auto directional = [](const PointCloud& x, const PointCloud& y) {
    double sum = 0.0;
    for (const Vec3& p : x) {
      double best = 1e300;
      for (const Vec3& q : y) best = std::min(best, (p - q).squaredNorm());
      sum += best;
    }
    return sum / x.size();
  };
  return directional(a, b) + directional(b, a);
}

double brute_emd(const PointCloud& a, const PointCloud& b) {
  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[perm[i]]).norm();
    best = std::min(best, s / a.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(SurfaceSampling, SingleTriangleBarycentric) {
  TriangleMesh tri;
  tri.vertices = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0)};
  tri.faces = {{0, 1, 2}};
  for (const Vec3& p : sample_surface_points(tri, 500, 1)) {
    const double u = p.x() / 2, v = p.y();
    EXPECT_GE(u, 0.0);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(u + v, 1.0 + 1e-12);
    EXPECT_EQ(p.z(), 0.0);
  }
}

TEST(SurfaceSampling, AreaProportional) {
  TriangleMesh m;
  // Areas 1 and 3, far apart so membership is unambiguous.
  m.vertices = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0), Vec3(10, 0, 0), Vec3(16, 0, 0), Vec3(10, 1, 0)};
  m.faces = {{0, 1, 2}, {3, 4, 5}};
  const PointCloud pc = sample_surface_points(m, 10000, 2);
  const double frac = std::count_if(pc.begin(), pc.end(), [](const Vec3& p) { return p.x() >= 10; }) / 10000.0;
  // Binomial standard deviation is sqrt(0.75 * 0.25 / 1e4) ~ 0.0043.
  EXPECT_NEAR(frac, 0.75, 0.03);
}

TEST(SurfaceSampling, DeterministicAndErrors) {
  const TriangleMesh s = make_icosphere(0.4, 2);
  EXPECT_EQ(sample_surface_points(s, 100, 7), sample_surface_points(s, 100, 7));
  TriangleMesh flat;
  flat.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  flat.faces = {{0, 1, 2}};
  EXPECT_EQ(kind_of([&] { sample_surface_points(flat, 10, 1); }), ErrorKind::DegenerateMesh);
  EXPECT_EQ(kind_of([&] { sample_surface_points(s, 0, 1); }), ErrorKind::InvalidCount);
}

TEST(Chamfer, Cases) {
  std::mt19937_64 rng(3);
  const PointCloud a = random_cloud(rng, 30);
  EXPECT_EQ(chamfer(a, a), 0.0);
  EXPECT_EQ(chamfer({Vec3(0, 0, 0)}, {Vec3(1, 0, 0)}), 2.0);
  EXPECT_EQ(kind_of([&] { chamfer(a, {}); }), ErrorKind::EmptyCloud);
}

TEST(Chamfer, MatchesBruteForceAndScalesQuadratically) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const PointCloud a = random_cloud(rng, 50), b = random_cloud(rng, 37);
    const double c = chamfer(a, b);
    EXPECT_NEAR(c, brute_chamfer(a, b), 1e-9);
    EXPECT_NEAR(c, chamfer(b, a), 1e-12);
    PointCloud a3 = a, b3 = b;
    for (Vec3& p : a3) p *= 3;
    for (Vec3& p : b3) p *= 3;
    EXPECT_NEAR(chamfer(a3, b3), 9 * c, 1e-9);
  }
}

TEST(Emd, Cases) {
  std::mt19937_64 rng(5);
  const PointCloud a = random_cloud(rng, 20);
  EXPECT_NEAR(emd(a, a).value, 0.0, 1e-15);
  EXPECT_EQ(emd({Vec3(0, 0, 0)}, {Vec3(1, 0, 0)}).value, 1.0);
  EXPECT_EQ(kind_of([&] { emd(a, random_cloud(rng, 19)); }), ErrorKind::CorrespondenceMismatch);
  EXPECT_EQ(kind_of([&] { emd(random_cloud(rng, 513), random_cloud(rng, 513)); }), ErrorKind::TooLarge);
}

TEST(Emd, MatchesPermutationBruteForce) {
  std::mt19937_64 rng(6);
  for (int n = 1; n <= 6; ++n)
    for (int t = 0; t < 10; ++t) {
      const PointCloud a = random_cloud(rng, n), b = random_cloud(rng, n);
      const EmdResult r = emd(a, b);
      EXPECT_FALSE(r.approximate);
      EXPECT_NEAR(r.value, brute_emd(a, b), 1e-9);
      EXPECT_NEAR(r.value, emd(b, a).value, 1e-12);
    }
}

TEST(Emd, TranslationAndScaling) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const PointCloud a = random_cloud(rng, 40);
    const Vec3 v = oracle::random_point(rng, -0.05, 0.05);
    PointCloud b = a;
    for (Vec3& p : b) p += v;
    EXPECT_NEAR(emd(a, b).value, v.norm(), 1e-12);
    PointCloud c = random_cloud(rng, 40), a2 = a, c2 = c;
    for (Vec3& p : a2) p *= 2.5;
    for (Vec3& p : c2) p *= 2.5;
    EXPECT_NEAR(emd(a2, c2).value, 2.5 * emd(a, c).value, 1e-9);
    // Matching triangle inequality: emd >= |mean(a) - mean(c)|.
    Vec3 ma = Vec3::Zero(), mc = Vec3::Zero();
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i] / a.size(), mc += c[i] / c.size();
    EXPECT_GE(emd(a, c).value, (ma - mc).norm() - 1e-12);
  }
}

TEST(Emd, ApproximateModeIsFlaggedAndBounded) {
  std::mt19937_64 rng(8);
  const PointCloud a = random_cloud(rng, 300), b = random_cloud(rng, 300);
  const double exact = emd(a, b).value;
  EmdOptions opts;
  opts.exact_cap = 100;
  opts.approximate = true;
  const EmdResult r = emd(a, b, opts);
  EXPECT_TRUE(r.approximate);
  EXPECT_GE(r.value, exact - 1e-12);
  EXPECT_LE(r.lower_bound, exact + 1e-12);
}

TEST(Assignment, SmallMatrixByHand) {
  Eigen::MatrixXd c(3, 3);
  c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const Assignment a = solve_assignment(c);
  EXPECT_EQ(a.cost, 5.0);
  EXPECT_EQ(a.row_to_col, (std::vector<int>{1, 0, 2}));
}

TEST(VoxelIou, IdenticalDisjointAndEmpty) {
  const TriangleMesh cube = make_box(Vec3(0, 0, 0), Vec3(1, 1, 1));
  EXPECT_EQ(voxel_iou(cube, cube, 16).iou, 1.0);
  const TriangleMesh far = make_box(Vec3(3, 0, 0), Vec3(4, 1, 1));
  EXPECT_EQ(voxel_iou(cube, far, 16).iou, 0.0);
  EXPECT_EQ(voxel_iou(TriangleMesh{}, TriangleMesh{}, 8).iou, 1.0);
  EXPECT_EQ(kind_of([&] { voxel_iou(cube, cube, 1); }), ErrorKind::InvalidResolution);
}

TEST(VoxelIou, HalfOverlapCubes) {
  const TriangleMesh a = make_box(Vec3(0, 0, 0), Vec3(1, 1, 1));
  const TriangleMesh b = make_box(Vec3(0.5, 0, 0), Vec3(1.5, 1, 1));
  const IouResult r = voxel_iou(a, b, 64);
  EXPECT_NEAR(r.iou, 1.0 / 3.0, 0.02);
  EXPECT_NEAR(voxel_iou(b, a, 64).iou, r.iou, 1e-12);
  EXPECT_FALSE(r.unreliable);
}

TEST(VoxelIou, OpenMeshFlagsUnreliable) {
  TriangleMesh open = make_box(Vec3(0, 0, 0), Vec3(1, 1, 1));
  open.faces.resize(open.faces.size() - 2);
  const IouResult r = voxel_iou(open, make_box(Vec3(0, 0, 0), Vec3(1, 1, 1)), 16);
  EXPECT_GT(r.uncertain_fraction, 0.0);
  EXPECT_EQ(r.unreliable, r.uncertain_fraction > 0.01);
}

TEST(Report, KeyValueAndTable) {
  MetricReport r;
  r.cd = 0.002;
  r.iou = 0.5;
  r.n_points = 2048;
  r.notes = "emd: too large";
  std::stringstream kv, table;
  write_report(kv, r);
  EXPECT_EQ(kv.str(), "cd=0.002\nemd=unavailable\niou=0.5\nn_points=2048\nnotes=emd: too large\n");
  write_report_table(table, r);
  EXPECT_NE(table.str().find("2\t-\t50"), std::string::npos);
}
