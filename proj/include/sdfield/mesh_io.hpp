#pragma once

#include <iosfwd>
#include <string>

#include "sdfield/mesh.hpp"

namespace sdfield {

// Wavefront OBJ subset: `v x y z` and `f i j k` (1-based; `i/t/n` forms and
// polygon fans accepted). Other statements are ignored. Parse failures throw
// ParseError carrying the line number.
TriangleMesh read_obj(std::istream& in);
// ASCII PLY with a vertex element (x, y, z) and a face element (vertex list).
TriangleMesh read_ply(std::istream& in);
// Dispatches on the file extension (.obj / .ply).
TriangleMesh load_mesh(const std::string& path);

void write_obj(std::ostream& out, const TriangleMesh& mesh);
void save_obj(const std::string& path, const TriangleMesh& mesh);

}  // namespace sdfield
