// Python bindings: meshes and clouds cross as float64 numpy arrays, faces as
// uint32 (F, 3); grids as (nz, ny, nx) float32 arrays over [-h, h]^3.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdfield/camera.hpp"
#include "sdfield/config.hpp"
#include "sdfield/distance.hpp"
#include "sdfield/error.hpp"
#include "sdfield/experiment.hpp"
#include "sdfield/marching_cubes.hpp"
#include "sdfield/mesh.hpp"
#include "sdfield/mesh_io.hpp"
#include "sdfield/metrics.hpp"
#include "sdfield/parallel.hpp"
#include "sdfield/sampling.hpp"
#include "sdfield/sdf_grid.hpp"
#include "sdfield/train.hpp"

namespace py = pybind11;
using namespace sdfield;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Faces = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const Points& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw Error(ErrorKind::ShapeError, "expected an (N, 3) array");
  auto r = a.unchecked<2>();
  PointCloud pc(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) pc[i] = Vec3(r(i, 0), r(i, 1), r(i, 2));
  return pc;
}

Points from_cloud(const PointCloud& pc) {
  Points out({static_cast<py::ssize_t>(pc.size()), py::ssize_t{3}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pc.size(); ++i)
    for (int k = 0; k < 3; ++k) w(i, k) = pc[i][k];
  return out;
}

TriangleMesh to_mesh(const Points& v, const Faces& f) {
  TriangleMesh m;
  m.vertices = to_cloud(v);
  if (f.ndim() != 2 || f.shape(1) != 3) throw Error(ErrorKind::ShapeError, "faces must be an (F, 3) array");
  auto r = f.unchecked<2>();
  for (py::ssize_t i = 0; i < f.shape(0); ++i) m.faces.push_back({r(i, 0), r(i, 1), r(i, 2)});
  m.validate();
  return m;
}

py::tuple from_mesh(const TriangleMesh& m) {
  Faces f({static_cast<py::ssize_t>(m.faces.size()), py::ssize_t{3}});
  auto w = f.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.faces.size(); ++i)
    for (int k = 0; k < 3; ++k) w(i, k) = m.faces[i][k];
  return py::make_tuple(from_cloud(m.vertices), f);
}

py::array_t<float> from_grid(const SdfGrid& g) {
  py::array_t<float> out({g.resolution[2], g.resolution[1], g.resolution[0]});
  std::copy(g.values.begin(), g.values.end(), out.mutable_data());
  return out;
}

SdfGrid to_grid(const py::array_t<float, py::array::c_style | py::array::forcecast>& a, double half_extent) {
  if (a.ndim() != 3) throw Error(ErrorKind::ShapeError, "grid must be a 3-d array (nz, ny, nx)");
  SdfGrid g({static_cast<int>(a.shape(2)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0))},
            Box::cube(half_extent));
  std::copy(a.data(), a.data() + a.size(), g.values.begin());
  return g;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Signed-distance toolkit: meshes, SDF grids, poses, marching cubes, metrics.";

  // Instances carry the CLI exit code of their error kind as .exit_code.
  static py::exception<Error> error(m, "SdfieldError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      inst.attr("exit_code") = exit_code(e.kind());
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  m.def("set_thread_count", &set_thread_count, py::arg("n"));
  m.def("thread_count", &thread_count);

  // meshes
  m.def("load_mesh", [](const std::string& path) { return from_mesh(load_mesh(path)); }, py::arg("path"),
        "Read an OBJ or PLY file; returns (vertices, faces).");
  m.def("save_obj", [](const std::string& path, const Points& v, const Faces& f) { save_obj(path, to_mesh(v, f)); },
        py::arg("path"), py::arg("vertices"), py::arg("faces"));
  m.def("make_icosphere", [](double r, int sub) { return from_mesh(make_icosphere(r, sub)); }, py::arg("radius"),
        py::arg("subdivisions") = 4);
  m.def("make_box", [](const Vec3& lo, const Vec3& hi) { return from_mesh(make_box(lo, hi)); }, py::arg("min"),
        py::arg("max"));
  m.def("make_torus", [](double R, double r, int a, int b) { return from_mesh(make_torus(R, r, a, b)); },
        py::arg("major_radius"), py::arg("minor_radius"), py::arg("major_segments") = 64,
        py::arg("minor_segments") = 32);
  m.def("normalize_mesh",
        [](const Points& v, const Faces& f, double margin) {
          auto [mesh, rec] = normalize_mesh(to_mesh(v, f), margin);
          const py::tuple vf = from_mesh(mesh);
          return py::make_tuple(vf[0], vf[1], rec.scale, rec.offset);
        },
        py::arg("vertices"), py::arg("faces"), py::arg("margin") = kDefaultNormalizationMargin,
        "Fit into [-0.5, 0.5]^3 minus margin; returns (vertices, faces, scale, offset).");

  // signed distance
  m.def("signed_distance",
        [](const Points& v, const Faces& f, const Points& pts) {
          const MeshSdf sdf(to_mesh(v, f));
          const PointCloud q = to_cloud(pts);
          py::array_t<double> out(static_cast<py::ssize_t>(q.size()));
          auto w = out.mutable_unchecked<1>();
          for (std::size_t i = 0; i < q.size(); ++i) w(i) = sdf.signed_distance(q[i]);
          return out;
        },
        py::arg("vertices"), py::arg("faces"), py::arg("points"));
  m.def("sdf_grid",
        [](const Points& v, const Faces& f, int resolution, double half_extent) {
          return from_grid(build_sdf_grid(to_mesh(v, f), resolution, Box::cube(half_extent)));
        },
        py::arg("vertices"), py::arg("faces"), py::arg("resolution"), py::arg("half_extent") = 0.5,
        "Signed distances on a resolution^3 lattice over [-h, h]^3, shape (nz, ny, nx).");
  m.def("save_sdf_grid",
        [](const std::string& path, const py::array_t<float, py::array::c_style | py::array::forcecast>& g,
           double h) { save_sdf_grid(path, to_grid(g, h)); },
        py::arg("path"), py::arg("grid"), py::arg("half_extent") = 0.5);
  m.def("load_sdf_grid",
        [](const std::string& path) {
          const SdfGrid g = load_sdf_grid(path);
          return py::make_tuple(from_grid(g), g.bbox_min, g.bbox_max);
        },
        py::arg("path"), "Returns (values, bbox_min, bbox_max).");
  m.def("sample_grid",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& g, double h, std::size_t n,
           double sigma, std::uint64_t seed) {
          const auto s = sample_training_points(to_grid(g, h), n, sigma, seed);
          PointCloud p;
          py::array_t<double> sdf(static_cast<py::ssize_t>(s.size()));
          for (std::size_t i = 0; i < s.size(); ++i) {
            p.push_back(s[i].p);
            sdf.mutable_at(i) = s[i].s;
          }
          return py::make_tuple(from_cloud(p), sdf);
        },
        py::arg("grid"), py::arg("half_extent") = 0.5, py::arg("count") = kDefaultSampleCount,
        py::arg("sigma") = kDefaultSamplingSigma, py::arg("seed") = 0, "Returns (points, sdf).");
  m.def("marching_cubes",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& g, double h, double iso) {
          return from_mesh(marching_cubes(to_grid(g, h), iso));
        },
        py::arg("grid"), py::arg("half_extent") = 0.5, py::arg("iso") = 0.0);
  m.def("is_closed_manifold", [](const Points& v, const Faces& f) { return is_closed_manifold(to_mesh(v, f)); },
        py::arg("vertices"), py::arg("faces"));

  // camera
  m.def("rotation_from_6d", [](const Vec3& bx, const Vec3& by) { return rotation_from_6d({bx, by}); },
        py::arg("bx"), py::arg("by"));
  m.def("six_d_from_rotation",
        [](const Mat3& R) {
          const Rotation6D b = six_d_from_rotation(R);
          return py::make_tuple(b.bx, b.by);
        },
        py::arg("R"));
  m.def("camera_loss",
        [](const Vec3& bx, const Vec3& by, const Vec3& t, const Points& w, const Points& c) {
          return camera_loss({bx, by}, t, to_cloud(w), to_cloud(c));
        },
        py::arg("bx"), py::arg("by"), py::arg("t"), py::arg("world"), py::arg("camera"));
  m.def("fit_pose",
        [](const Points& w, const Points& c, std::uint64_t seed, int restarts, int steps) {
          PoseFitOptions opts;
          opts.restarts = restarts;
          opts.max_steps = steps;
          const PoseFitResult r = fit_pose(to_cloud(w), to_cloud(c), seed, opts);
          py::dict d;
          d["R"] = r.pose.R;
          d["t"] = r.pose.t;
          d["loss"] = r.loss;
          d["best_restart"] = r.best_restart;
          return d;
        },
        py::arg("world"), py::arg("camera"), py::arg("seed") = 0, py::arg("restarts") = 20,
        py::arg("steps") = 2000);

  // metrics
  m.def("sample_surface_points",
        [](const Points& v, const Faces& f, std::size_t n, std::uint64_t seed) {
          return from_cloud(sample_surface_points(to_mesh(v, f), n, seed));
        },
        py::arg("vertices"), py::arg("faces"), py::arg("n") = kDefaultEvalPoints, py::arg("seed") = 0);
  m.def("chamfer", [](const Points& a, const Points& b) { return chamfer(to_cloud(a), to_cloud(b)); },
        py::arg("a"), py::arg("b"));
  m.def("emd",
        [](const Points& a, const Points& b, std::size_t cap, bool approximate) {
          const EmdResult r = emd(to_cloud(a), to_cloud(b), {cap, approximate});
          py::dict d;
          d["value"] = r.value;
          d["approximate"] = r.approximate;
          d["lower_bound"] = r.lower_bound;
          return d;
        },
        py::arg("a"), py::arg("b"), py::arg("exact_cap") = kDefaultEmdCap, py::arg("approximate") = false);
  m.def("voxel_iou",
        [](const Points& va, const Faces& fa, const Points& vb, const Faces& fb, int res) {
          const IouResult r = voxel_iou(to_mesh(va, fa), to_mesh(vb, fb), res);
          py::dict d;
          d["iou"] = r.iou;
          d["uncertain_fraction"] = r.uncertain_fraction;
          d["unreliable"] = r.unreliable;
          return d;
        },
        py::arg("vertices_a"), py::arg("faces_a"), py::arg("vertices_b"), py::arg("faces_b"),
        py::arg("resolution") = kDefaultIouResolution);

  // experiments
  m.def("run_experiment",
        [](const std::string& config_path, std::optional<int> iterations) {
          RunConfig cfg = load_run_config(config_path);
          if (iterations) cfg.train.iterations = *iterations;
          cfg.train.validate();
          Experiment ex;
          TrainResult r;
          {
            py::gil_scoped_release release;
            ex = prepare_experiment(cfg);
            r = train(initial_model(cfg), ex.train, cfg.train);
          }
          const EvalSummary held = evaluate(r.model, ex.heldout, cfg.train.loss);
          py::dict d;
          d["heldout_loss"] = held.mean_loss;
          d["heldout_mae"] = held.mean_abs_error;
          d["heldout_sign_accuracy"] = held.sign_accuracy;
          d["loss_log"] = r.loss_log;
          return d;
        },
        py::arg("config_path"), py::arg("iterations") = py::none(),
        "Prepare the config's single-view experiment, train, and report held-out metrics (no files written).");
}
