// Acceptance run: one PASS/FAIL line per criterion 1-10. Pass criterion
// numbers as arguments to run a subset. Exit status is the number of FAILs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "model_fixture.hpp"
#include "oracles.hpp"
#include "sdfield/camera.hpp"
#include "sdfield/config.hpp"
#include "sdfield/distance.hpp"
#include "sdfield/experiment.hpp"
#include "sdfield/marching_cubes.hpp"
#include "sdfield/mesh.hpp"
#include "sdfield/metrics.hpp"
#include "sdfield/model_io.hpp"
#include "sdfield/reconstruct.hpp"
#include "sdfield/sdf_grid.hpp"
#include "sdfield/train.hpp"

using namespace sdfield;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAIL]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---- 1. rotation representation ---------------------------------------------

Outcome rotation_representation() {
  Outcome o;
  std::mt19937_64 rng(101);
  double round_trip = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Mat3 R = oracle::random_rotation(rng);
    round_trip = std::max(round_trip, (rotation_from_6d(six_d_from_rotation(R)) - R).cwiseAbs().maxCoeff());
  }
  o.check(round_trip < 1e-9, "round-trip max err " + fmt("%.2e", round_trip) + " < 1e-9");

  double ortho = 0.0, det = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Mat3 R = rotation_from_6d({oracle::random_point(rng, -1, 1), oracle::random_point(rng, -1, 1)});
    ortho = std::max(ortho, (R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff());
    det = std::max(det, std::abs(R.determinant() - 1.0));
  }
  o.check(ortho < 1e-12 && det < 1e-12,
          "|RR^T-I| " + fmt("%.2e", ortho) + ", |det-1| " + fmt("%.2e", det) + " < 1e-12");

  // Power-of-two scales leave every rounding step unchanged, so those must be
  // bit-identical; general scales and shears agree to rounding.
  bool pow2_identical = true;
  double scale_dev = 0.0, shear_dev = 0.0;
  std::uniform_real_distribution<double> alpha(0.05, 20.0);
  std::uniform_int_distribution<int> exponent(-8, 8);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 bx = oracle::random_point(rng, -1, 1), by = oracle::random_point(rng, -1, 1);
    const Mat3 R = rotation_from_6d({bx, by});
    const double p2 = std::ldexp(1.0, exponent(rng));
    pow2_identical = pow2_identical && rotation_from_6d({p2 * bx, p2 * by}) == R;
    const double a = alpha(rng), c = alpha(rng);
    scale_dev = std::max(scale_dev, (rotation_from_6d({a * bx, c * by}) - R).cwiseAbs().maxCoeff());
    shear_dev = std::max(shear_dev, (rotation_from_6d({bx, by + (a - 10.0) * bx}) - R).cwiseAbs().maxCoeff());
  }
  o.check(pow2_identical, "power-of-two scaling bit-identical");
  o.check(scale_dev < 1e-12 && shear_dev < 1e-12,
          "scale dev " + fmt("%.2e", scale_dev) + ", shear dev " + fmt("%.2e", shear_dev) + " (rounding only)");
  return o;
}

// ---- 2. camera loss and pose fitting ------------------------------------------

Outcome pose_fitting() {
  Outcome o;
  std::mt19937_64 rng(202);
  const Intrinsics intr = Intrinsics::defaults(128, 128);
  double worst3 = 0.0, worst2 = 0.0;
  for (int k = 0; k < 20; ++k) {
    const CameraPose gt{oracle::random_rotation(rng),
                        Vec3(0, 0, 2.0) + oracle::random_point(rng, -0.2, 0.2)};
    PointCloud world, cam;
    for (int i = 0; i < 512; ++i) {
      world.push_back(oracle::random_point(rng, -0.5, 0.5));
      cam.push_back(gt.R * world.back() + gt.t);
    }
    PoseFitOptions opts;
    opts.restarts = 20;
    const PoseFitResult r = fit_pose(world, cam, 1000 + k, opts);
    const PoseMetrics m = pose_metrics(r.pose, gt, world, intr);
    worst3 = std::max(worst3, m.d3d);
    worst2 = std::max(worst2, m.d2d);
  }
  o.check(worst3 < 1e-3, "worst d3D " + fmt("%.2e", worst3) + " < 1e-3");
  o.check(worst2 < 0.5, "worst d2D " + fmt("%.2e", worst2) + " px < 0.5");
  return o;
}

// ---- 3. SDF core ------------------------------------------------------------------

Outcome sdf_core() {
  Outcome o;
  const double cell = 1.0 / 31.0;  // res-32 lattice over the unit box
  const std::vector<std::pair<std::string, TriangleMesh>> meshes = {
      {"cube", make_box(Vec3::Constant(-0.35), Vec3::Constant(0.35))},
      {"icosphere", make_icosphere(0.4, 4)},
      {"torus", make_torus(0.3, 0.1, 64, 32)}};
  std::mt19937_64 rng(303);
  for (const auto& [name, mesh] : meshes) {
    const MeshSdf sdf(mesh);
    int agree = 0, total = 0;
    while (total < 1000) {
      const Vec3 p = oracle::random_point(rng, -0.5, 0.5);
      const double s = sdf.signed_distance(p);
      if (std::abs(s) <= cell) continue;
      agree += (s < 0.0) == oracle::ray_parity_inside(mesh, p);
      ++total;
    }
    o.check(agree == total, name + " sign agreement " + std::to_string(agree) + "/" + std::to_string(total));
  }

  const MeshSdf torus(meshes[2].second);
  double worst_ratio = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p = oracle::random_point(rng, -0.6, 0.6), q = oracle::random_point(rng, -0.6, 0.6);
    const double d = (p - q).norm();
    if (d > 0.0) worst_ratio = std::max(worst_ratio, std::abs(torus.signed_distance(p) - torus.signed_distance(q)) / d);
  }
  o.check(worst_ratio <= 1.0 + 1e-9, "Lipschitz max ratio " + fmt("%.9f", worst_ratio) + " <= 1");

  const double r = 0.4;
  const SdfGrid g = build_sdf_grid(make_icosphere(r, 5), 32, Box::cube(0.5));
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    err = std::max(err, std::abs(g.values[i] - (g.lattice_point(i).norm() - r)));
  o.check(err < 1e-2, "sphere grid analytic max err " + fmt("%.2e", err) + " < 1e-2");
  return o;
}

// ---- 4. gradient correctness ----------------------------------------------------------

Outcome gradients() {
  Outcome o;
  const SdfModel model = fixture::small_model(Variant::two_stream, 404);
  const TrainingSet set = fixture::small_set(405, 12, 2);
  std::vector<std::size_t> batch(set.examples.size());
  std::iota(batch.begin(), batch.end(), 0);
  const LossParams lp;
  const BatchGradients bg = backward(model, set, batch, lp);
  SdfModel probe = model;
  SdfModel grads = bg.grads;
  auto p_blocks = parameter_blocks(probe);
  auto g_blocks = parameter_blocks(grads);

  std::map<ParamGroup, std::vector<std::pair<std::size_t, std::size_t>>> slots;
  for (std::size_t b = 0; b < p_blocks.size(); ++b)
    for (std::size_t i = 0; i < p_blocks[b].values.size(); ++i) slots[p_blocks[b].group].push_back({b, i});
  std::mt19937_64 rng(406);
  const double h = 1e-5;
  for (auto& [group, list] : slots) {
    std::shuffle(list.begin(), list.end(), rng);
    list.resize(std::min<std::size_t>(list.size(), 200));
    double worst = 0.0;
    for (const auto& [b, i] : list) {
      double& x = p_blocks[b].values[i];
      const double x0 = x;
      x = x0 + h;
      const double up = batch_loss(probe, set, batch, lp);
      x = x0 - h;
      const double down = batch_loss(probe, set, batch, lp);
      x = x0;
      worst = std::max(worst, oracle::relative_error(g_blocks[b].values[i], (up - down) / (2 * h)));
    }
    o.check(list.size() >= 200 && worst < 1e-4, std::string(to_string(group)) + " n=" + std::to_string(list.size()) +
                                                    " max rel err " + fmt("%.1e", worst));
  }

  // Pose variables: all nine coordinates on random instances.
  double worst = 0.0;
  int n = 0;
  for (int k = 0; k < 23; ++k) {
    PointCloud w, c;
    for (int i = 0; i < 16; ++i) {
      w.push_back(oracle::random_point(rng, -0.5, 0.5));
      c.push_back(oracle::random_point(rng, -0.5, 0.5) + Vec3(0, 0, 2));
    }
    Rotation6D b{oracle::random_point(rng, -1, 1), oracle::random_point(rng, -1, 1)};
    Vec3 t = oracle::random_point(rng, -1, 1);
    const CameraLossGradient g = camera_loss_gradient(b, t, w, c);
    const std::array<Vec3*, 3> vars = {&b.bx, &b.by, &t};
    const std::array<Vec3, 3> analytic = {g.d_bx, g.d_by, g.d_t};
    for (int v = 0; v < 3; ++v)
      for (int a = 0; a < 3; ++a) {
        const double x0 = (*vars[v])[a];
        (*vars[v])[a] = x0 + h;
        const double up = camera_loss(b, t, w, c);
        (*vars[v])[a] = x0 - h;
        const double down = camera_loss(b, t, w, c);
        (*vars[v])[a] = x0;
        worst = std::max(worst, oracle::relative_error(analytic[v][a], (up - down) / (2 * h)));
        ++n;
      }
  }
  o.check(n >= 200 && worst < 1e-4, "pose n=" + std::to_string(n) + " max rel err " + fmt("%.1e", worst));
  return o;
}

// ---- 5-7. training experiments -------------------------------------------------------

RunConfig recipe(const std::string& name) { return load_run_config(std::string(SDFIELD_RECIPES) + "/" + name); }

struct Trained {
  Experiment ex;
  SdfModel model;
  int iterations = 0;
};

Trained train_recipe(const RunConfig& cfg) {
  Trained t{prepare_experiment(cfg), {}, cfg.train.iterations};
  t.model = train(initial_model(cfg), t.ex.train, cfg.train).model;
  return t;
}

PointCloud sphere_surface_samples(double r, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  PointCloud pc;
  while (pc.size() < n) {
    const Vec3 d(g(rng), g(rng), g(rng));
    if (d.norm() > 1e-9) pc.push_back(r * d.normalized());
  }
  return pc;
}

// Shared between criteria 5 and 7.
std::optional<Trained> sphere_run;
const Trained& sphere_regression() {
  if (!sphere_run) sphere_run = train_recipe(recipe("sphere.cfg"));
  return *sphere_run;
}

Outcome overfit_sphere() {
  Outcome o;
  const RunConfig cfg = recipe("sphere.cfg");
  const Trained& t = sphere_regression();
  o.check(t.iterations <= 5000, std::to_string(t.iterations) + " iterations <= 5000");
  const EvalSummary held = evaluate(t.model, t.ex.heldout, cfg.train.loss);
  o.check(held.mean_abs_error < 0.01, "held-out mean |err| " + fmt("%.5f", held.mean_abs_error) + " < 0.01");

  IsoSurfaceConfig iso;
  iso.resolution = 64;
  const TriangleMesh mesh = reconstruct(t.model, t.ex.view.image, t.ex.view.pose, t.ex.view.intrinsics, iso);
  o.check(!mesh.faces.empty() && is_closed_manifold(mesh), "res-64 mesh watertight (" +
                                                              std::to_string(mesh.faces.size()) + " faces)");
  if (!mesh.faces.empty()) {
    const double cd = chamfer(sample_surface_points(mesh, 2048, 505), sphere_surface_samples(cfg.sphere_radius, 2048, 506));
    o.check(cd < 1e-3, "CD " + fmt("%.3e", cd) + " < 1e-3");
  }
  return o;
}

Outcome local_feature_ablation() {
  Outcome o;
  RunConfig two = recipe("torus.cfg");
  two.local_stream = true;
  RunConfig global = two;
  global.local_stream = false;
  const Trained a = train_recipe(two);
  const Trained b = train_recipe(global);
  const double la = evaluate(a.model, a.ex.heldout, two.train.loss).mean_loss;
  const double lb = evaluate(b.model, b.ex.heldout, global.train.loss).mean_loss;
  o.check(two.train.iterations == 5000, "5000 iterations each, same seeds");
  o.check(la <= 0.9 * lb, "two-stream held-out loss " + fmt("%.5f", la) + " vs global-only " + fmt("%.5f", lb) +
                              " (ratio " + fmt("%.3f", la / lb) + ", need <= 0.9)");
  return o;
}

Outcome binary_consistency() {
  Outcome o;
  RunConfig cfg = recipe("sphere.cfg");
  const Trained& reg = sphere_regression();
  cfg.variant = Variant::binary;
  const Trained bin = train_recipe(cfg);
  const EvalSummary pr = evaluate(reg.model, reg.ex.heldout, cfg.train.loss);
  const EvalSummary pb = evaluate(bin.model, bin.ex.heldout, cfg.train.loss);
  std::size_t agree = 0, total = 0;
  for (std::size_t i = 0; i < reg.ex.heldout.examples.size(); ++i) {
    if (std::abs(reg.ex.heldout.examples[i].sample.s) <= cfg.train.loss.delta) continue;
    ++total;
    agree += (pb.predictions[i] > 0.5) == (pr.predictions[i] < 0.0);
  }
  const double frac = total ? static_cast<double>(agree) / total : 0.0;
  o.check(total > 0 && frac >= 0.95,
          "sign agreement " + fmt("%.4f", frac) + " >= 0.95 on " + std::to_string(total) + " points |gt| > delta");
  return o;
}

// ---- 8. metric oracles -------------------------------------------------------------------

Outcome metric_oracles() {
  Outcome o;
  std::mt19937_64 rng(808);
  auto cloud = [&](int n) {
    PointCloud pc;
    for (int i = 0; i < n; ++i) pc.push_back(oracle::random_point(rng, -1, 1));
    return pc;
  };
  double emd_err = 0.0;
  for (int n = 1; n <= 6; ++n)
    for (int rep = 0; rep < 20; ++rep) {
      const PointCloud a = cloud(n), b = cloud(n);
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = std::numeric_limits<double>::infinity();
      do {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += (a[i] - b[perm[i]]).norm();
        best = std::min(best, s / n);
      } while (std::next_permutation(perm.begin(), perm.end()));
      emd_err = std::max(emd_err, std::abs(emd(a, b).value - best));
    }
  o.check(emd_err < 1e-9, "EMD vs permutations n<=6 max err " + fmt("%.1e", emd_err));

  double cd_err = 0.0;
  for (int n : {1, 2, 7, 23, 50}) {
    const PointCloud a = cloud(n), b = cloud(n + 3);
    auto directional = [](const PointCloud& x, const PointCloud& y) {
      double s = 0.0;
      for (const Vec3& p : x) {
        double m = std::numeric_limits<double>::infinity();
        for (const Vec3& q : y) m = std::min(m, (p - q).squaredNorm());
        s += m;
      }
      return s / x.size();
    };
    cd_err = std::max(cd_err, std::abs(chamfer(a, b) - (directional(a, b) + directional(b, a))));
  }
  o.check(cd_err < 1e-9, "CD vs O(n^2) n<=50 max err " + fmt("%.1e", cd_err));

  double shift_err = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const PointCloud a = cloud(64);
    const Vec3 v = oracle::random_point(rng, -0.3, 0.3);
    PointCloud b = a;
    for (Vec3& p : b) p += v;
    shift_err = std::max(shift_err, std::abs(emd(a, b).value - v.norm()));
  }
  o.check(shift_err < 1e-9, "emd(a, a+v) = |v| err " + fmt("%.1e", shift_err));

  const TriangleMesh c1 = make_box(Vec3(0, 0, 0), Vec3(1, 1, 1));
  const TriangleMesh c2 = make_box(Vec3(0.5, 0, 0), Vec3(1.5, 1, 1));
  const double iou = voxel_iou(c1, c2, 64).iou;
  o.check(std::abs(iou - 1.0 / 3.0) <= 0.02, "half-overlap cube IoU " + fmt("%.4f", iou) + " = 1/3 +- 0.02");
  return o;
}

// ---- 9. marching cubes --------------------------------------------------------------------

Outcome marching_cubes_checks() {
  Outcome o;
  const double r = 0.35;
  const SdfGrid g = build_sdf_grid([r](const Vec3& p) { return p.norm() - r; }, 48, Box::cube(0.5));
  const TriangleMesh m = marching_cubes(g, 0.0);
  o.check(is_closed_manifold(m) && euler_characteristic(m) == 2,
          "sphere closed 2-manifold, chi=" + std::to_string(euler_characteristic(m)));
  double worst = 0.0;
  for (const Vec3& v : m.vertices) worst = std::max(worst, std::abs(v.norm() - r));
  const double cell = g.spacing().x();
  o.check(worst <= 2 * cell, "max radial err " + fmt("%.2e", worst) + " <= 2 cells (" + fmt("%.3f", 2 * cell) + ")");

  const SdfGrid pos = build_sdf_grid([](const Vec3&) { return 1.0; }, 16, Box::cube(0.5));
  o.check(marching_cubes(pos, 0.0).faces.empty(), "all-positive grid -> empty mesh");

  SdfGrid neg = g;
  for (float& v : neg.values) v = -v;
  const TriangleMesh a = marching_cubes(g, 0.05), b = marching_cubes(neg, -0.05);
  std::multiset<std::array<double, 3>> va, vb;
  for (const Vec3& v : a.vertices) va.insert({v.x(), v.y(), v.z()});
  for (const Vec3& v : b.vertices) vb.insert({v.x(), v.y(), v.z()});
  o.check(va == vb && a.faces.size() == b.faces.size() && std::abs(a.volume() + b.volume()) < 1e-12,
          "sign flip: same vertices, faces " + std::to_string(a.faces.size()) + "/" + std::to_string(b.faces.size()) +
              ", volumes " + fmt("%.6f", a.volume()) + "/" + fmt("%.6f", b.volume()));
  return o;
}

// ---- 10. determinism and formats ------------------------------------------------------------

Outcome determinism() {
  Outcome o;
  const TriangleMesh torus = make_torus(0.3, 0.1, 48, 24);
  const SdfGrid serial = build_sdf_grid(torus, 40, Box::cube(0.5), false);
  const SdfGrid parallel = build_sdf_grid(torus, 40, Box::cube(0.5), true);
  o.check(serial.values == parallel.values, "parallel vs serial grid bit-identical");

  std::stringstream gs;
  write_sdf_grid(gs, serial);
  const SdfGrid g2 = read_sdf_grid(gs);
  o.check(g2.values == serial.values && g2.bbox_min == serial.bbox_min && g2.bbox_max == serial.bbox_max &&
              g2.resolution == serial.resolution,
          "SDFG round trip bit-exact");

  SdfModel m = make_model(ModelDims{}, Variant::two_stream, 9);
  std::stringstream ms;
  write_model(ms, m);
  const std::string bytes = ms.str();
  SdfModel m2 = read_model(ms);
  bool same = true;
  auto pa = parameter_blocks(m), pb = parameter_blocks(m2);
  same = pa.size() == pb.size();
  for (std::size_t i = 0; same && i < pa.size(); ++i)
    same = std::equal(pa[i].values.begin(), pa[i].values.end(), pb[i].values.begin(), pb[i].values.end());
  std::stringstream ms2;
  write_model(ms2, m2);
  o.check(same && ms2.str() == bytes, "model round trip bit-exact");

  const TrainingSet set = fixture::small_set(1010, 64, 1);
  TrainConfig tc;
  tc.iterations = 40;
  tc.seed = 5;
  const SdfModel init = fixture::small_model(Variant::two_stream, 1011);
  const auto log1 = train(init, set, tc).loss_log;
  const auto log2 = train(init, set, tc).loss_log;
  o.check(log1 == log2 && log1.size() == 40, "identical seeds -> identical loss logs");
  std::stringstream ls;
  write_loss_log(ls, log1);
  std::vector<double> parsed;
  for (double i, v; ls >> i >> v;) parsed.push_back(v);
  o.check(parsed == log1, "loss log text round trip exact");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds; 0 = none stated
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "rotation representation", 5, rotation_representation},
      {2, "camera loss and pose fitting", 60, pose_fitting},
      {3, "SDF core", 120, sdf_core},
      {4, "gradient correctness", 120, gradients},
      {5, "sphere overfit reconstruction", 600, overfit_sphere},
      {6, "local-feature ablation", 0, local_feature_ablation},
      {7, "binary-variant consistency", 0, binary_consistency},
      {8, "metric oracles", 60, metric_oracles},
      {9, "marching cubes", 30, marching_cubes_checks},
      {10, "determinism and formats", 0, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (c.time_limit > 0) o.check(secs < c.time_limit, "runtime " + fmt("%.1f", secs) + " s < " + fmt("%.0f", c.time_limit) + " s");
    else o.detail += "; runtime " + fmt("%.1f", secs) + " s";
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
