#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdfield/camera.hpp"
#include "sdfield/loss.hpp"
#include "sdfield/model.hpp"
#include "sdfield/train.hpp"

namespace sdfield {

// key = value lines, `#` starts a comment, nesting through dotted keys
// (train.iterations = 5000). Malformed lines and duplicate keys are
// ParseError; values that fail to convert are ConfigError.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  // Keys never read through a getter; callers reject them as typos.
  std::vector<std::string> unused_keys() const;
  // Directory of the loaded file, used to resolve relative paths.
  const std::string& base_dir() const { return base_dir_; }

 private:
  const std::string* raw(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  mutable std::set<std::string> used_;
  std::string source_;
  std::string base_dir_;
};

enum class PoseMode { ground_truth, estimated };

// Everything a `fit` / `reconstruct` run needs. Shapes come either from a
// mesh file or from a built-in generator (sphere is the analytic field).
struct RunConfig {
  std::string shape = "mesh";  // mesh | sphere | cube | torus | torus_bump
  std::string mesh_path;
  double normalize_margin = 0.05;
  double sphere_radius = 0.4;
  double torus_major = 0.3;
  double torus_minor = 0.1;
  BumpSpec bump;

  int grid_resolution = 64;
  double grid_half_extent = 0.5;

  std::size_t sample_count = 2048;
  double sample_sigma = 0.1;
  std::uint64_t sample_seed = 1;
  std::size_t heldout_count = 2048;
  std::uint64_t heldout_seed = 2;

  double camera_distance = 2.0;
  double camera_azimuth_deg = 30.0;
  double camera_elevation_deg = 20.0;
  Intrinsics intrinsics;

  ModelDims dims;
  Variant variant = Variant::two_stream;
  bool local_stream = true;
  std::uint64_t model_seed = 7;
  TrainConfig train;

  PoseMode pose_mode = PoseMode::ground_truth;
  std::string correspondence_path;
  std::uint64_t pose_seed = 3;

  int reconstruct_resolution = 64;
  double iso_value = 0.0;
  int eval_points = 2048;
  int iou_resolution = 32;

  std::string model_path = "model.disn";
  std::string loss_log_path = "loss.log";
  std::string mesh_out_path;
  std::string image_out_path;
  std::string pose_out_path;

  // Numeric preconditions of the downstream modules and input-path
  // existence; throws ConfigError / the module's error kind.
  void validate() const;
};

// Reads every known key (relative paths resolved against the file's
// directory), rejects unknown keys and validates.
RunConfig run_config_from(const Config& cfg);
RunConfig load_run_config(const std::string& path);

}  // namespace sdfield
