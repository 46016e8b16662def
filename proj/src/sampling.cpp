#include "sdfield/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "sdfield/error.hpp"

namespace sdfield {

std::vector<PointSample> sample_training_points(const SdfGrid& grid, std::size_t n, double sigma,
                                                std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidCount, "sample count must be >= 1");
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  const std::size_t total = grid.size();
  if (n > total) {
    throw Error(ErrorKind::InvalidCount, "requested " + std::to_string(n) + " samples from " +
                                             std::to_string(total) + " lattice points");
  }

  // Gumbel top-k on log-weights: equivalent to weighted sampling without
  // replacement and immune to underflow of exp(-s^2 / 2 sigma^2).
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> key(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double s = grid.values[i];
    double u = uniform(rng);
    while (u <= 0.0) u = uniform(rng);
    key[i] = -s * s * inv_two_var - std::log(-std::log(u));
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  auto by_key = [&](std::size_t a, std::size_t b) {
    return key[a] > key[b] || (key[a] == key[b] && a < b);
  };
  if (n < total) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                     by_key);
  }
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), by_key);

  std::vector<PointSample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back({grid.lattice_point(order[k]), static_cast<double>(grid.values[order[k]])});
  }
  return out;
}

void write_point_samples(std::ostream& out, const std::vector<PointSample>& samples) {
  out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : samples) {
    out << s.p.x() << ' ' << s.p.y() << ' ' << s.p.z() << ' ' << s.s << '\n';
  }
}

std::vector<PointSample> read_point_samples(std::istream& in) {
  std::vector<PointSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    PointSample s;
    if (!(ss >> s.p.x() >> s.p.y() >> s.p.z() >> s.s)) {
      throw Error(ErrorKind::ParseError,
                  "line " + std::to_string(line_no) + ": expected 'x y z s'");
    }
    out.push_back(s);
  }
  return out;
}

void save_point_samples(const std::string& path, const std::vector<PointSample>& samples) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write_point_samples(out, samples);
}

std::vector<PointSample> load_point_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return read_point_samples(in);
}

}  // namespace sdfield
