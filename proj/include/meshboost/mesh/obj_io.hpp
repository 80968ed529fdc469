#pragma once

#include <string>

#include "meshboost/mesh/mesh.hpp"

namespace meshboost {

// Loads an ASCII OBJ (v / vt / f with 1-based indices). When the OBJ
// references a material with a texture map, the PNG is loaded as well.
// Throws ParseError (with line number) on malformed input, IoError when the
// file is unreadable and MissingTextureError when a referenced texture image
// does not exist.
TexturedMesh load_obj(const std::string& path);

// Writes mesh (+ .mtl and texture PNG when an atlas is present) so that
// load_obj(save_obj(m)) preserves topology exactly and coordinates within
// printed precision. Throws IoError when the path is unwritable.
void save_obj(const TexturedMesh& tm, const std::string& path);

} // namespace meshboost
