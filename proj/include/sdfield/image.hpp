#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sdfield {

// Row-major, channel-interleaved float image.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> pixels;

  Image() = default;
  Image(int w, int h, int c = 1, float fill = 0.0f)
      : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  float& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  // Throws ShapeError when the buffer does not match the declared shape or
  // holds non-finite values.
  void validate() const;
};

// Binary PGM (P5). Single-channel images in [0, 1] are written with a 16-bit
// maxval; reading accepts 8- and 16-bit files and rescales to [0, 1].
void write_pgm(std::ostream& out, const Image& img);
Image read_pgm(std::istream& in);
void save_pgm(const std::string& path, const Image& img);
Image load_pgm(const std::string& path);

}  // namespace sdfield
