#include "sdfield/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "sdfield/error.hpp"

namespace sdfield {

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) parse_fail(line, "bad number '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    parse_fail(line, "bad number '" + tok + "'");
  }
}

long parse_long(const std::string& tok, std::size_t line) {
  long v = 0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) parse_fail(line, "bad index '" + tok + "'");
  return v;
}

}  // namespace

TriangleMesh read_obj(std::istream& in) {
  TriangleMesh mesh;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    const auto tokens = split_ws(raw);
    if (tokens.empty()) continue;
    if (tokens[0] == "v") {
      if (tokens.size() < 4) parse_fail(line_no, "vertex needs 3 coordinates");
      mesh.vertices.emplace_back(parse_double(tokens[1], line_no), parse_double(tokens[2], line_no),
                                 parse_double(tokens[3], line_no));
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) parse_fail(line_no, "face needs at least 3 indices");
      std::vector<std::uint32_t> idx;
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        const std::string head = tokens[k].substr(0, tokens[k].find('/'));
        const long v = parse_long(head, line_no);
        if (v < 1 || static_cast<std::size_t>(v) > mesh.vertices.size()) {
          parse_fail(line_no, "vertex index " + head + " out of range");
        }
        idx.push_back(static_cast<std::uint32_t>(v - 1));
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
      }
    }
  }
  return mesh;
}

TriangleMesh read_ply(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::vector<std::string> {
    if (!std::getline(in, raw)) parse_fail(line_no + 1, "unexpected end of file");
    ++line_no;
    return split_ws(raw);
  };

  if (auto magic = next_line(); magic.empty() || magic[0] != "ply") {
    parse_fail(line_no, "missing 'ply' magic");
  }
  std::size_t n_vertices = 0;
  std::size_t n_faces = 0;
  std::vector<std::string> vertex_props;
  std::string current;
  for (;;) {
    const auto t = next_line();
    if (t.empty()) continue;
    if (t[0] == "end_header") break;
    if (t[0] == "format") {
      if (t.size() < 2 || t[1] != "ascii") parse_fail(line_no, "only ascii PLY is supported");
    } else if (t[0] == "element" && t.size() >= 3) {
      current = t[1];
      if (current == "vertex") n_vertices = static_cast<std::size_t>(parse_long(t[2], line_no));
      if (current == "face") n_faces = static_cast<std::size_t>(parse_long(t[2], line_no));
    } else if (t[0] == "property" && current == "vertex" && t.size() >= 3) {
      vertex_props.push_back(t.back());
    }
  }
  auto prop = [&](const char* name) {
    const auto it = std::find(vertex_props.begin(), vertex_props.end(), name);
    if (it == vertex_props.end()) parse_fail(line_no, std::string("missing vertex property ") + name);
    return static_cast<std::size_t>(it - vertex_props.begin());
  };
  const std::size_t ix = prop("x");
  const std::size_t iy = prop("y");
  const std::size_t iz = prop("z");

  TriangleMesh mesh;
  mesh.vertices.reserve(n_vertices);
  for (std::size_t i = 0; i < n_vertices; ++i) {
    const auto t = next_line();
    if (t.size() < vertex_props.size()) parse_fail(line_no, "short vertex record");
    mesh.vertices.emplace_back(parse_double(t[ix], line_no), parse_double(t[iy], line_no),
                               parse_double(t[iz], line_no));
  }
  for (std::size_t i = 0; i < n_faces; ++i) {
    const auto t = next_line();
    if (t.empty()) parse_fail(line_no, "empty face record");
    const long count = parse_long(t[0], line_no);
    if (count < 3 || t.size() < static_cast<std::size_t>(count) + 1) {
      parse_fail(line_no, "bad face record");
    }
    std::vector<std::uint32_t> idx;
    for (long k = 1; k <= count; ++k) {
      const long v = parse_long(t[k], line_no);
      if (v < 0 || static_cast<std::size_t>(v) >= n_vertices) {
        parse_fail(line_no, "vertex index out of range");
      }
      idx.push_back(static_cast<std::uint32_t>(v));
    }
    for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
      mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return mesh;
}

TriangleMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::string ext = path.substr(path.find_last_of('.') + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  try {
    return ext == "ply" ? read_ply(in) : read_obj(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  out << std::setprecision(9);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

void save_obj(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write_obj(out, mesh);
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path);
}

}  // namespace sdfield
