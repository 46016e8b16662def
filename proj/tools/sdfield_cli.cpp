// sdfield command-line front end. Exit codes: 0 ok, 2 I/O or parse failure,
// 3 validation failure, 4 numeric failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "sdfield/camera.hpp"
#include "sdfield/config.hpp"
#include "sdfield/error.hpp"
#include "sdfield/experiment.hpp"
#include "sdfield/image.hpp"
#include "sdfield/marching_cubes.hpp"
#include "sdfield/mesh_io.hpp"
#include "sdfield/metrics.hpp"
#include "sdfield/model_io.hpp"
#include "sdfield/parallel.hpp"
#include "sdfield/reconstruct.hpp"
#include "sdfield/render.hpp"
#include "sdfield/sampling.hpp"
#include "sdfield/sdf_grid.hpp"

using namespace sdfield;

namespace {

struct IntrinsicFlags {
  std::optional<double> focal, cx, cy;
  std::optional<int> width, height;

  void add(CLI::App* app) {
    app->add_option("--focal", focal, "Focal length in pixels (default: image width)");
    app->add_option("--cx", cx, "Principal point x (default: width / 2)");
    app->add_option("--cy", cy, "Principal point y (default: height / 2)");
    app->add_option("--width", width, "Image width in pixels");
    app->add_option("--height", height, "Image height in pixels");
  }

  Intrinsics resolve(int default_width, int default_height) const {
    Intrinsics intr = Intrinsics::defaults(width.value_or(default_width), height.value_or(default_height));
    if (focal) intr.focal = *focal;
    if (cx) intr.cx = *cx;
    if (cy) intr.cy = *cy;
    intr.validate();
    return intr;
  }
};

void print_stats(const SdfGrid& grid) {
  const GridStats s = grid_stats(grid);
  std::printf("resolution=%dx%dx%d\nmin=%.6g\nmax=%.6g\nnegative_percent=%.4f\n", grid.resolution[0],
              grid.resolution[1], grid.resolution[2], s.min_value, s.max_value, 100.0 * s.negative_fraction);
}

// ---- sdfgen ---------------------------------------------------------------

struct SdfgenArgs {
  std::string mesh, out;
  int resolution = 64;
  double margin = kDefaultNormalizationMargin;
  double half_extent = 0.5;
  bool no_normalize = false;
};

int run_sdfgen(const SdfgenArgs& a) {
  if (a.resolution < 2) throw Error(ErrorKind::InvalidResolution, "resolution must be >= 2");
  TriangleMesh mesh = load_mesh(a.mesh);
  mesh.validate();
  if (!a.no_normalize) {
    auto [normalized, rec] = normalize_mesh(mesh, a.margin);
    std::printf("normalization_scale=%.9g\nnormalization_offset=%.9g %.9g %.9g\n", rec.scale, rec.offset.x(),
                rec.offset.y(), rec.offset.z());
    mesh = std::move(normalized);
  }
  const MeshSdf sdf(mesh);
  std::size_t uncertain = 0;
  const SdfGrid grid = build_sdf_grid(sdf, a.resolution, Box::cube(a.half_extent), true, &uncertain);
  save_sdf_grid(a.out, grid);
  print_stats(grid);
  std::printf("uncertain_signs=%zu\n", uncertain);
  if (uncertain > 0) std::fprintf(stderr, "warning: %zu lattice points have an uncertain sign (open mesh?)\n", uncertain);
  return 0;
}

// ---- sample ---------------------------------------------------------------

struct SampleArgs {
  std::string grid, out;
  long long count = static_cast<long long>(kDefaultSampleCount);
  double sigma = kDefaultSamplingSigma;
  std::uint64_t seed = 0;
};

int run_sample(const SampleArgs& a) {
  if (a.count < 1) throw Error(ErrorKind::InvalidCount, "count must be >= 1");
  if (!(a.sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  const SdfGrid grid = load_sdf_grid(a.grid);
  const auto samples = sample_training_points(grid, static_cast<std::size_t>(a.count), a.sigma, a.seed);
  save_point_samples(a.out, samples);
  double mean_abs = 0.0;
  for (const auto& s : samples) mean_abs += std::abs(s.s) / static_cast<double>(samples.size());
  std::printf("samples=%zu\nmean_abs_sdf=%.6g\n", samples.size(), mean_abs);
  return 0;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
  std::string config;
  int log_every = 500;
};

int run_fit(const FitArgs& a) {
  const RunConfig cfg = load_run_config(a.config);
  std::optional<Correspondences> corr;
  if (cfg.pose_mode == PoseMode::estimated) corr = load_correspondences(cfg.correspondence_path);

  const Experiment ex = prepare_experiment(cfg);
  std::printf("train_points=%zu\nheldout_points=%zu\nparameters=%zu\n", ex.train.examples.size(),
              ex.heldout.examples.size(), parameter_count(initial_model(cfg)));
  std::fflush(stdout);
  const TrainResult result = train(initial_model(cfg), ex.train, cfg.train, [&](int it, double loss, const SdfModel&) {
    if (a.log_every > 0 && (it + 1) % a.log_every == 0) {
      std::fprintf(stderr, "iter %d loss %.6g\n", it + 1, loss);
    }
  });
  save_model(cfg.model_path, result.model);
  save_loss_log(cfg.loss_log_path, result.loss_log);
  if (!cfg.image_out_path.empty()) save_pgm(cfg.image_out_path, ex.view.image);
  if (!cfg.pose_out_path.empty()) save_pose(cfg.pose_out_path, ex.view.pose);

  const EvalSummary held = evaluate(result.model, ex.heldout, cfg.train.loss);
  const EvalSummary fitted = evaluate(result.model, ex.train, cfg.train.loss);
  std::printf("heldout_loss=%.9g\n", held.mean_loss);
  if (result.model.variant != Variant::binary) std::printf("heldout_mae=%.9g\n", held.mean_abs_error);
  std::printf("heldout_sign_accuracy=%.6f\n", held.sign_accuracy);

  if (!cfg.mesh_out_path.empty()) {
    CameraPose pose = ex.view.pose;
    if (corr) {
      const PoseFitResult pf = fit_pose(corr->world, corr->camera, cfg.pose_seed);
      std::printf("pose_fit_loss=%.6g\n", pf.loss);
      pose = pf.pose;
    }
    IsoSurfaceConfig iso;
    iso.resolution = cfg.reconstruct_resolution;
    iso.iso_value = cfg.iso_value;
    iso.bbox = Box::cube(cfg.grid_half_extent);
    const TriangleMesh mesh = reconstruct(result.model, ex.view.image, pose, ex.view.intrinsics, iso);
    save_obj(cfg.mesh_out_path, mesh);
    std::printf("vertices=%zu\ntriangles=%zu\nwatertight=%d\n", mesh.vertices.size(), mesh.faces.size(),
                is_closed_manifold(mesh) ? 1 : 0);
    if (!mesh.faces.empty()) {
      const auto n = static_cast<std::size_t>(cfg.eval_points);
      const double cd = chamfer(sample_surface_points(mesh, n, 1), sample_surface_points(ex.surface, n, 2));
      std::printf("cd=%.9g\n", cd);
    } else {
      std::fprintf(stderr, "warning: reconstruction is empty\n");
    }
  }
  std::printf("final_loss=%.9g\n", fitted.mean_loss);
  return 0;
}

// ---- pose-fit ---------------------------------------------------------------

struct PoseFitArgs {
  std::string correspondences, out, gt;
  std::uint64_t seed = 0;
  int restarts = 20;
  int steps = 2000;
  IntrinsicFlags intr;
};

int run_pose_fit(const PoseFitArgs& a) {
  const Correspondences c = load_correspondences(a.correspondences);
  PoseFitOptions opts;
  opts.restarts = a.restarts;
  opts.max_steps = a.steps;
  const PoseFitResult r = fit_pose(c.world, c.camera, a.seed, opts);
  if (!a.out.empty()) save_pose(a.out, r.pose);
  std::printf("loss=%.9g\nbest_restart=%d\n", r.loss, r.best_restart);
  if (!a.gt.empty()) {
    const PoseMetrics m = pose_metrics(r.pose, load_pose(a.gt), c.world, a.intr.resolve(128, 128));
    std::printf("d3d=%.9g\nd2d=%.9g\n", m.d3d, m.d2d);
  }
  return 0;
}

// ---- reconstruct ------------------------------------------------------------

struct ReconstructArgs {
  std::string model, image, pose, correspondences, out, grid_out;
  bool fit = false;
  std::uint64_t seed = 0;
  int resolution = 64;
  double iso = 0.0;
  double half_extent = 0.5;
  IntrinsicFlags intr;
};

int run_reconstruct(const ReconstructArgs& a) {
  if (a.resolution < 2) throw Error(ErrorKind::InvalidResolution, "resolution must be >= 2");
  if (a.fit && a.correspondences.empty())
    throw Error(ErrorKind::InvalidArgument, "--fit-pose needs --correspondences");
  if (!a.fit && a.pose.empty()) throw Error(ErrorKind::InvalidArgument, "give --pose or --fit-pose");
  const SdfModel model = load_model(a.model);
  const Image image = load_pgm(a.image);
  CameraPose pose;
  if (a.fit) {
    const Correspondences c = load_correspondences(a.correspondences);
    const PoseFitResult r = fit_pose(c.world, c.camera, a.seed);
    std::printf("pose_fit_loss=%.9g\n", r.loss);
    pose = r.pose;
  } else {
    pose = load_pose(a.pose);
  }
  IsoSurfaceConfig cfg;
  cfg.resolution = a.resolution;
  cfg.iso_value = a.iso;
  cfg.bbox = Box::cube(a.half_extent);
  const Intrinsics intr = a.intr.resolve(image.width, image.height);
  const FeatureMapStack stack = encode_image(image, model.encoder);
  const FieldResult field = evaluate_field(model, stack, pose, intr, cfg);
  if (!a.grid_out.empty()) save_sdf_grid(a.grid_out, field.grid);
  const TriangleMesh mesh = marching_cubes(field.grid, cfg.iso_value);
  save_obj(a.out, mesh);
  std::printf("vertices=%zu\ntriangles=%zu\nprojection_fallbacks=%zu\n", mesh.vertices.size(), mesh.faces.size(),
              field.projection_fallbacks);
  if (mesh.faces.empty()) std::fprintf(stderr, "warning: no iso-surface crossing; wrote an empty mesh\n");
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string a, b;
  long long points = static_cast<long long>(kDefaultEvalPoints);
  std::uint64_t seed = 0;
  int iou_resolution = kDefaultIouResolution;
  long long emd_cap = static_cast<long long>(kDefaultEmdCap);
  bool emd_approx = false;
  bool table = false;
};

int run_eval(const EvalArgs& a) {
  if (a.points < 1) throw Error(ErrorKind::InvalidCount, "--points must be >= 1");
  if (a.iou_resolution < 2) throw Error(ErrorKind::InvalidResolution, "--iou-res must be >= 2");
  const TriangleMesh ma = load_mesh(a.a), mb = load_mesh(a.b);
  const auto n = static_cast<std::size_t>(a.points);
  const PointCloud pa = sample_surface_points(ma, n, a.seed);
  // Same seed on both sides: identical meshes give identical clouds and zero distances.
  const PointCloud pb = sample_surface_points(mb, n, a.seed);

  MetricReport report;
  report.n_points = n;
  report.cd = chamfer(pa, pb);
  std::optional<Error> emd_error;
  EmdOptions opts;
  opts.exact_cap = static_cast<std::size_t>(std::max(0LL, a.emd_cap));
  opts.approximate = a.emd_approx;
  try {
    const EmdResult e = emd(pa, pb, opts);
    report.emd = e.value;
    if (e.approximate) report.notes += "emd approximate (greedy), lower bound " + std::to_string(e.lower_bound) + "; ";
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TooLarge) throw;
    emd_error = e;
    report.notes += std::string(e.what()) + " (raise --emd-cap or pass --emd-approx); ";
  }
  const IouResult iou = voxel_iou(ma, mb, a.iou_resolution);
  report.iou = iou.iou;
  if (iou.unreliable)
    report.notes += "UnreliableOccupancy: " + std::to_string(100.0 * iou.uncertain_fraction) + "% uncertain voxels; ";
  write_report(std::cout, report);
  if (a.table) write_report_table(std::cout, report);
  if (emd_error) {
    std::cerr << "error: " << emd_error->what() << '\n';
    return exit_code(emd_error->kind());
  }
  return 0;
}

// ---- render-depth -------------------------------------------------------------

struct RenderArgs {
  std::string grid, pose, out;
  double distance = 2.0, azimuth = 30.0, elevation = 20.0;
  bool raw = false;
  IntrinsicFlags intr;
};

int run_render(const RenderArgs& a) {
  const SdfGrid grid = load_sdf_grid(a.grid);
  const CameraPose pose = a.pose.empty() ? orbit_pose(a.distance, a.azimuth, a.elevation) : load_pose(a.pose);
  const Intrinsics intr = a.intr.resolve(128, 128);
  const Image depth = render_depth_image(grid, pose, intr, intr.width, intr.height);
  std::size_t hits = 0;
  for (float d : depth.pixels) hits += d > 0.0f;
  if (a.raw) {
    std::ofstream out(a.out);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + a.out + " for writing");
    out.precision(9);
    for (int y = 0; y < depth.height; ++y) {
      for (int x = 0; x < depth.width; ++x) out << (x ? " " : "") << depth.at(x, y);
      out << '\n';
    }
  } else {
    const auto [near_depth, far_depth] = depth_range(grid.box(), pose);
    save_pgm(a.out, normalize_depth(depth, near_depth, far_depth));
  }
  std::printf("width=%d\nheight=%d\nhit_pixels=%zu\n", depth.width, depth.height, hits);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sdfield: single-view implicit surface toolkit"};
  app.require_subcommand(1);
  std::optional<unsigned> threads;
  app.add_option("--threads", threads, "Worker threads (default: $SDFIELD_THREADS, else all cores)")
      ->check(CLI::PositiveNumber);

  SdfgenArgs sdfgen;
  auto* c_sdfgen = app.add_subcommand("sdfgen", "Mesh (OBJ/PLY) -> normalized SDFG signed-distance grid");
  c_sdfgen->add_option("mesh", sdfgen.mesh, "Input mesh")->required();
  c_sdfgen->add_option("-r,--resolution", sdfgen.resolution, "Lattice points per axis (>= 2)");
  c_sdfgen->add_option("-o,--out", sdfgen.out, "Output .sdfg file")->required();
  c_sdfgen->add_option("--margin", sdfgen.margin, "Normalization margin inside [-0.5, 0.5]^3");
  c_sdfgen->add_option("--half-extent", sdfgen.half_extent, "Grid box is [-h, h]^3");
  c_sdfgen->add_flag("--no-normalize", sdfgen.no_normalize, "Use mesh coordinates as they are");

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Gaussian-weighted lattice sampling of an SDFG grid");
  c_sample->add_option("grid", sample.grid, "Input .sdfg file")->required();
  c_sample->add_option("-n,--count", sample.count, "Number of distinct lattice points");
  c_sample->add_option("--sigma", sample.sigma, "Gaussian width on the SDF value");
  c_sample->add_option("--seed", sample.seed, "Random seed");
  c_sample->add_option("-o,--out", sample.out, "Output text file (x y z s per line)")->required();

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Sample, train and save a model from a run config");
  c_fit->add_option("config", fit.config, "Run config (key = value)")->required();
  c_fit->add_option("--log-every", fit.log_every, "Print the batch loss every N iterations (0: never)");

  PoseFitArgs posefit;
  auto* c_pose = app.add_subcommand("pose-fit", "Fit a camera pose to world/camera point correspondences");
  c_pose->add_option("correspondences", posefit.correspondences, "Text file, `xw yw zw xc yc zc` per line")
      ->required();
  c_pose->add_option("-o,--out", posefit.out, "Output pose file");
  c_pose->add_option("--seed", posefit.seed, "Random seed for the restarts");
  c_pose->add_option("--restarts", posefit.restarts, "Random restarts");
  c_pose->add_option("--steps", posefit.steps, "Optimizer steps per restart");
  c_pose->add_option("--gt", posefit.gt, "Ground-truth pose file; reports d3d and d2d");
  posefit.intr.add(c_pose);

  ReconstructArgs rec;
  auto* c_rec = app.add_subcommand("reconstruct", "Model + depth image + pose -> OBJ iso-surface");
  c_rec->add_option("-m,--model", rec.model, "Model file")->required();
  c_rec->add_option("-i,--image", rec.image, "Input depth image (PGM)")->required();
  c_rec->add_option("-p,--pose", rec.pose, "Camera pose file");
  c_rec->add_flag("--fit-pose", rec.fit, "Estimate the pose from --correspondences instead");
  c_rec->add_option("--correspondences", rec.correspondences, "Correspondence file for --fit-pose");
  c_rec->add_option("--seed", rec.seed, "Seed for --fit-pose");
  c_rec->add_option("-r,--resolution", rec.resolution, "Extraction grid resolution");
  c_rec->add_option("--iso", rec.iso, "Iso value");
  c_rec->add_option("--half-extent", rec.half_extent, "Extraction box is [-h, h]^3");
  c_rec->add_option("--grid-out", rec.grid_out, "Also write the evaluated field as SDFG");
  c_rec->add_option("-o,--out", rec.out, "Output OBJ")->required();
  rec.intr.add(c_rec);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Chamfer, EMD and voxel IoU between two meshes");
  c_eval->add_option("mesh_a", ev.a, "First mesh")->required();
  c_eval->add_option("mesh_b", ev.b, "Second mesh")->required();
  c_eval->add_option("-n,--points", ev.points, "Surface samples per mesh");
  c_eval->add_option("--seed", ev.seed, "Sampling seed");
  c_eval->add_option("--iou-res", ev.iou_resolution, "Voxels per axis for IoU");
  c_eval->add_option("--emd-cap", ev.emd_cap, "Largest cloud solved exactly by optimal assignment");
  c_eval->add_flag("--emd-approx", ev.emd_approx, "Greedy EMD above the cap (reported as approximate)");
  c_eval->add_flag("--table", ev.table, "Also print CD x1e3, EMD x1e2, IoU % as a table row");

  RenderArgs render;
  auto* c_render = app.add_subcommand("render-depth", "Sphere-trace a depth image of an SDFG grid");
  c_render->add_option("grid", render.grid, "Input .sdfg file")->required();
  c_render->add_option("-p,--pose", render.pose, "Camera pose file (default: orbit camera)");
  c_render->add_option("--distance", render.distance, "Orbit camera distance");
  c_render->add_option("--azimuth", render.azimuth, "Orbit camera azimuth, degrees");
  c_render->add_option("--elevation", render.elevation, "Orbit camera elevation, degrees");
  c_render->add_flag("--raw", render.raw, "Write raw camera-space depth as text instead of PGM");
  c_render->add_option("-o,--out", render.out, "Output file")->required();
  render.intr.add(c_render);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // A malformed command line is a parse failure like a malformed file.
    app.exit(e);
    return 2;
  }

  try {
    if (threads) set_thread_count(*threads);
    if (*c_sdfgen) return run_sdfgen(sdfgen);
    if (*c_sample) return run_sample(sample);
    if (*c_fit) return run_fit(fit);
    if (*c_pose) return run_pose_fit(posefit);
    if (*c_rec) return run_reconstruct(rec);
    if (*c_eval) return run_eval(ev);
    if (*c_render) return run_render(render);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
