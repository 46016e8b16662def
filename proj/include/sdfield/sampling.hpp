#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdfield/sdf_grid.hpp"

namespace sdfield {

// A query point and its signed distance: s > 0 outside, s < 0 inside.
struct PointSample {
  Vec3 p = Vec3::Zero();
  double s = 0.0;
};

constexpr double kDefaultSamplingSigma = 0.1;
constexpr std::size_t kDefaultSampleCount = 2048;

// Draws n distinct lattice points, each selected with probability
// proportional to exp(-s^2 / (2 sigma^2)) of its stored value (successive
// sampling without replacement). Deterministic in seed.
std::vector<PointSample> sample_training_points(const SdfGrid& grid, std::size_t n, double sigma,
                                                std::uint64_t seed);

// One `x y z s` line per sample, round-trip precision.
void write_point_samples(std::ostream& out, const std::vector<PointSample>& samples);
std::vector<PointSample> read_point_samples(std::istream& in);
void save_point_samples(const std::string& path, const std::vector<PointSample>& samples);
std::vector<PointSample> load_point_samples(const std::string& path);

}  // namespace sdfield
