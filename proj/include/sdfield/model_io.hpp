#pragma once

#include <iosfwd>
#include <string>

#include "sdfield/model.hpp"

namespace sdfield {

// "DISN" magic, u32 version, key=value header lines ended by a blank line,
// then every parameter as little-endian f32 in parameter_blocks() order.
// Parameters are rounded to f32 on write, so a model survives save/load
// bit-exactly once its values are f32-representable (as initialization is).
void write_model(std::ostream& out, const SdfModel& model);
SdfModel read_model(std::istream& in);
void save_model(const std::string& path, const SdfModel& model);
SdfModel load_model(const std::string& path);

}  // namespace sdfield
