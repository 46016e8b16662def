#include "sdfield/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

#include "sdfield/error.hpp"

namespace sdfield {

void Image::validate() const {
  if (width <= 0 || height <= 0 || channels <= 0 ||
      pixels.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorKind::ShapeError, "image buffer does not match its shape");
  }
  for (float v : pixels) {
    if (!std::isfinite(v)) throw Error(ErrorKind::ShapeError, "image contains non-finite values");
  }
}

void write_pgm(std::ostream& out, const Image& img) {
  img.validate();
  if (img.channels != 1) throw Error(ErrorKind::ShapeError, "PGM holds single-channel images");
  constexpr int kMax = 65535;
  out << "P5\n" << img.width << ' ' << img.height << '\n' << kMax << '\n';
  for (float v : img.pixels) {
    const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * kMax));
    const char bytes[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xff)};
    out.write(bytes, 2);
  }
  if (!out) throw Error(ErrorKind::IoError, "failed writing PGM stream");
}

namespace {

int read_header_int(std::istream& in) {
  int value = 0;
  for (;;) {
    in >> std::ws;
    if (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      continue;
    }
    break;
  }
  if (!(in >> value)) throw Error(ErrorKind::ParseError, "malformed PGM header");
  return value;
}

}  // namespace

Image read_pgm(std::istream& in) {
  char magic[2] = {};
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5') {
    throw Error(ErrorKind::ParseError, "not a binary PGM (P5) file");
  }
  const int width = read_header_int(in);
  const int height = read_header_int(in);
  const int maxval = read_header_int(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw Error(ErrorKind::ParseError, "bad PGM dimensions");
  }
  in.get();  // single whitespace before the raster
  Image img(width, height, 1);
  const bool wide = maxval > 255;
  for (auto& px : img.pixels) {
    unsigned value = 0;
    if (wide) {
      unsigned char b[2];
      if (!in.read(reinterpret_cast<char*>(b), 2)) throw Error(ErrorKind::ParseError, "short PGM raster");
      value = (static_cast<unsigned>(b[0]) << 8) | b[1];
    } else {
      unsigned char b;
      if (!in.read(reinterpret_cast<char*>(&b), 1)) throw Error(ErrorKind::ParseError, "short PGM raster");
      value = b;
    }
    px = static_cast<float>(value) / static_cast<float>(maxval);
  }
  return img;
}

void save_pgm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write_pgm(out, img);
}

Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return read_pgm(in);
}

}  // namespace sdfield
