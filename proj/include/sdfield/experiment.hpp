#pragma once

#include <functional>
#include <memory>

#include "sdfield/config.hpp"
#include "sdfield/distance.hpp"
#include "sdfield/sdf_grid.hpp"
#include "sdfield/train.hpp"

namespace sdfield {

// Camera on a sphere around the origin looking at it, world z up.
CameraPose orbit_pose(double distance, double azimuth_deg, double elevation_deg);

// Single-shape, single-view dataset built from a RunConfig.
struct Experiment {
  TriangleMesh surface;  // ground-truth surface, normalized coordinates
  std::function<double(const Vec3&)> truth;  // exact signed distance
  SdfGrid grid;
  TrainingView view;  // normalized depth image and ground-truth camera
  TrainingSet train;
  // Gaussian-sampled like the training set, then jittered off the lattice
  // by up to half a cell and labelled with the exact signed distance.
  TrainingSet heldout;
};

// The ground-truth surface and its exact SDF (analytic for the sphere).
void make_shape(const RunConfig& cfg, TriangleMesh& surface, std::function<double(const Vec3&)>& truth);

Experiment prepare_experiment(const RunConfig& cfg);
SdfModel initial_model(const RunConfig& cfg);

// Depth image of a grid from a pose, normalized for the encoder.
Image render_view(const SdfGrid& grid, const CameraPose& pose, const Intrinsics& intr);

}  // namespace sdfield
