#include "sdfield/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

#include "sdfield/error.hpp"

namespace sdfield {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  for (char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
  return key.find("..") == std::string::npos;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw Error(ErrorKind::ParseError, where + ": bad key '" + key + "'");
    if (cfg.values_.count(key)) throw Error(ErrorKind::ParseError, where + ": duplicate key '" + key + "'");
    cfg.values_[key] = trim(line.substr(eq + 1));
    cfg.lines_[key] = lineno;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path);
  Config cfg = parse(in, path);
  cfg.base_dir_ = std::filesystem::path(path).parent_path().string();
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw Error(ErrorKind::ConfigError, "bad key '" + key + "'");
  values_[key] = value;
}

const std::string* Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorKind::ConfigError, key + " = '" + value + "' is not " + expected);
}

}  // namespace

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* v = raw(key);
  return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  const std::string* v = raw(key);
  if (!v) return fallback;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) bad_value(key, *v, "a number");
  return out;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  const std::string* v = raw(key);
  if (!v) return fallback;
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) bad_value(key, *v, "an integer");
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  bad_value(key, *v, "a boolean");
}

std::vector<int> Config::get_int_list(const std::string& key, const std::vector<int>& fallback) const {
  const std::string* v = raw(key);
  if (!v) return fallback;
  std::vector<int> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    int x = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      bad_value(key, *v, "a comma-separated integer list");
    out.push_back(x);
  }
  return out;
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

void RunConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); };
  if (shape == "mesh") {
    if (mesh_path.empty()) fail("mesh.path is required when shape = mesh");
    if (!std::filesystem::exists(mesh_path)) fail("mesh.path does not exist: " + mesh_path);
  } else if (shape != "sphere" && shape != "cube" && shape != "torus" && shape != "torus_bump") {
    fail("unknown shape '" + shape + "'");
  }
  if (!(normalize_margin >= 0.0 && normalize_margin < 0.5)) fail("normalize.margin must be in [0, 0.5)");
  if (!(sphere_radius > 0.0 && sphere_radius < grid_half_extent)) fail("sphere.radius must lie inside the grid");
  if (!(torus_minor > 0.0 && torus_major > torus_minor)) fail("torus radii must satisfy major > minor > 0");
  if (grid_resolution < 2) throw Error(ErrorKind::InvalidResolution, "grid.resolution must be >= 2");
  if (reconstruct_resolution < 2)
    throw Error(ErrorKind::InvalidResolution, "reconstruct.resolution must be >= 2");
  if (iou_resolution < 2) throw Error(ErrorKind::InvalidResolution, "eval.iou_resolution must be >= 2");
  if (!(grid_half_extent > 0.0)) fail("grid.half_extent must be positive");
  const std::size_t lattice = static_cast<std::size_t>(grid_resolution) * grid_resolution * grid_resolution;
  if (sample_count < 1 || sample_count > lattice)
    throw Error(ErrorKind::InvalidCount, "sampling.count must be in [1, grid lattice size]");
  if (heldout_count < 1 || heldout_count > lattice)
    throw Error(ErrorKind::InvalidCount, "heldout.count must be in [1, grid lattice size]");
  if (eval_points < 1) throw Error(ErrorKind::InvalidCount, "eval.points must be >= 1");
  if (!(sample_sigma > 0.0)) fail("sampling.sigma must be positive");
  if (!(camera_distance > grid_half_extent * std::sqrt(3.0)))
    fail("camera.distance must place the camera outside the grid box");
  intrinsics.validate();
  if (intrinsics.width != dims.image_width || intrinsics.height != dims.image_height)
    fail("image size and intrinsics size differ");
  if (dims.image_channels != 1) fail("depth input has exactly one channel");
  train.validate();
  if (pose_mode == PoseMode::estimated) {
    if (correspondence_path.empty()) fail("pose.mode = estimated needs pose.correspondences");
    if (!std::filesystem::exists(correspondence_path))
      fail("pose.correspondences does not exist: " + correspondence_path);
  }
}

RunConfig run_config_from(const Config& c) {
  RunConfig r;
  const auto path = [&](const std::string& key) {
    std::string p = c.get_string(key, "");
    if (p.empty() || std::filesystem::path(p).is_absolute() || c.base_dir().empty()) return p;
    return (std::filesystem::path(c.base_dir()) / p).string();
  };
  const auto count = [&](const std::string& key, long long fallback) {
    const long long v = c.get_int(key, fallback);
    if (v < 0) throw Error(ErrorKind::InvalidCount, key + " must be non-negative");
    return v;
  };
  const auto seed = [&](const std::string& key, std::uint64_t fallback) {
    return static_cast<std::uint64_t>(count(key, static_cast<long long>(fallback)));
  };
  const double deg = std::numbers::pi / 180.0;

  r.shape = c.get_string("shape", r.shape);
  r.mesh_path = path("mesh.path");
  r.normalize_margin = c.get_double("normalize.margin", r.normalize_margin);
  r.sphere_radius = c.get_double("sphere.radius", r.sphere_radius);
  r.torus_major = c.get_double("torus.major_radius", r.torus_major);
  r.torus_minor = c.get_double("torus.minor_radius", r.torus_minor);
  r.bump.height = c.get_double("bump.height", r.bump.height);
  r.bump.width = c.get_double("bump.width", r.bump.width);
  r.bump.major_angle = c.get_double("bump.major_angle_deg", r.bump.major_angle / deg) * deg;
  r.bump.minor_angle = c.get_double("bump.minor_angle_deg", r.bump.minor_angle / deg) * deg;

  r.grid_resolution = static_cast<int>(c.get_int("grid.resolution", r.grid_resolution));
  r.grid_half_extent = c.get_double("grid.half_extent", r.grid_half_extent);

  r.sample_count = static_cast<std::size_t>(count("sampling.count", static_cast<long long>(r.sample_count)));
  r.sample_sigma = c.get_double("sampling.sigma", r.sample_sigma);
  r.sample_seed = seed("sampling.seed", r.sample_seed);
  r.heldout_count = static_cast<std::size_t>(count("heldout.count", static_cast<long long>(r.heldout_count)));
  r.heldout_seed = seed("heldout.seed", r.heldout_seed);

  r.camera_distance = c.get_double("camera.distance", r.camera_distance);
  r.camera_azimuth_deg = c.get_double("camera.azimuth_deg", r.camera_azimuth_deg);
  r.camera_elevation_deg = c.get_double("camera.elevation_deg", r.camera_elevation_deg);

  const int width = static_cast<int>(c.get_int("image.width", r.dims.image_width));
  const int height = static_cast<int>(c.get_int("image.height", r.dims.image_height));
  r.dims.image_width = width;
  r.dims.image_height = height;
  r.intrinsics = Intrinsics::defaults(width, height);
  r.intrinsics.focal = c.get_double("intrinsics.focal", r.intrinsics.focal);
  r.intrinsics.cx = c.get_double("intrinsics.cx", r.intrinsics.cx);
  r.intrinsics.cy = c.get_double("intrinsics.cy", r.intrinsics.cy);

  r.dims.encoder_channels = c.get_int_list("model.encoder_channels", r.dims.encoder_channels);
  r.dims.point_lift = c.get_int_list("model.point_lift", r.dims.point_lift);
  r.dims.decoder_hidden = c.get_int_list("model.decoder_hidden", r.dims.decoder_hidden);
  r.variant = variant_from_string(c.get_string("model.variant", to_string(r.variant)));
  r.local_stream = c.get_bool("model.local_stream", r.local_stream);
  r.model_seed = seed("model.seed", r.model_seed);

  r.train.learning_rate = c.get_double("train.learning_rate", r.train.learning_rate);
  const std::string schedule = c.get_string("train.schedule", "constant");
  if (schedule == "cosine") r.train.cosine_decay = true;
  else if (schedule != "constant") throw Error(ErrorKind::ConfigError, "train.schedule must be constant or cosine");
  r.train.final_learning_rate = c.get_double("train.final_learning_rate", r.train.final_learning_rate);
  r.train.batch_size = static_cast<int>(count("train.batch_size", r.train.batch_size));
  r.train.iterations = static_cast<int>(count("train.iterations", r.train.iterations));
  r.train.seed = seed("train.seed", r.train.seed);
  r.train.beta1 = c.get_double("train.beta1", r.train.beta1);
  r.train.beta2 = c.get_double("train.beta2", r.train.beta2);
  r.train.epsilon = c.get_double("train.epsilon", r.train.epsilon);
  r.train.train_encoder = c.get_bool("train.encoder", r.train.train_encoder);
  r.train.loss.m1 = c.get_double("loss.m1", r.train.loss.m1);
  r.train.loss.m2 = c.get_double("loss.m2", r.train.loss.m2);
  r.train.loss.delta = c.get_double("loss.delta", r.train.loss.delta);

  const std::string mode = c.get_string("pose.mode", "ground_truth");
  if (mode == "ground_truth") r.pose_mode = PoseMode::ground_truth;
  else if (mode == "estimated") r.pose_mode = PoseMode::estimated;
  else throw Error(ErrorKind::ConfigError, "pose.mode must be ground_truth or estimated");
  r.correspondence_path = path("pose.correspondences");
  r.pose_seed = seed("pose.seed", r.pose_seed);

  r.reconstruct_resolution = static_cast<int>(c.get_int("reconstruct.resolution", r.reconstruct_resolution));
  r.iso_value = c.get_double("reconstruct.iso", r.iso_value);
  r.eval_points = static_cast<int>(c.get_int("eval.points", r.eval_points));
  r.iou_resolution = static_cast<int>(c.get_int("eval.iou_resolution", r.iou_resolution));

  // Outputs are relative to the working directory so shipped recipes never
  // write into their own folder.
  r.model_path = c.get_string("output.model", r.model_path);
  r.loss_log_path = c.get_string("output.loss_log", r.loss_log_path);
  r.mesh_out_path = c.get_string("output.mesh", "");
  r.image_out_path = c.get_string("output.image", "");
  r.pose_out_path = c.get_string("output.pose", "");

  const auto unused = c.unused_keys();
  if (!unused.empty()) throw Error(ErrorKind::ConfigError, "unknown config key '" + unused.front() + "'");
  r.validate();
  return r;
}

RunConfig load_run_config(const std::string& path) { return run_config_from(Config::load(path)); }

}  // namespace sdfield
