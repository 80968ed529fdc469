#include "meshboost/mesh/obj_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "meshboost/core/png_io.hpp"

namespace fs = std::filesystem;

namespace meshboost {

namespace {

// Returns the texture path of the single map_Kd entry in a .mtl file, or ""
// if the material has no texture. More than one textured material is outside
// the supported format.
std::string parse_mtl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open material file: " + path);
    std::string line, texture;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "map_Kd") {
            std::string tex;
            if (!(ss >> tex)) throw ParseError(path + ": map_Kd without a file", lineno);
            if (!texture.empty() && texture != tex)
                throw ParseError(path + ": multiple textured materials are not supported", lineno);
            texture = tex;
        }
    }
    return texture;
}

struct FaceCorner {
    int v = 0;
    int vt = 0; // 0 = absent
};

FaceCorner parse_corner(const std::string& token, int lineno) {
    FaceCorner c;
    // Forms: v, v/vt, v/vt/vn, v//vn.
    std::size_t s1 = token.find('/');
    const std::string vpart = token.substr(0, s1);
    std::size_t pos = 0;
    try {
        c.v = std::stoi(vpart, &pos);
    } catch (const std::exception&) {
        throw ParseError("bad face index '" + token + "'", lineno);
    }
    if (pos != vpart.size()) throw ParseError("bad face index '" + token + "'", lineno);
    if (s1 != std::string::npos) {
        std::size_t s2 = token.find('/', s1 + 1);
        const std::string tpart =
            token.substr(s1 + 1, s2 == std::string::npos ? std::string::npos : s2 - s1 - 1);
        if (!tpart.empty()) {
            try {
                c.vt = std::stoi(tpart, &pos);
            } catch (const std::exception&) {
                throw ParseError("bad texture index '" + token + "'", lineno);
            }
            if (pos != tpart.size()) throw ParseError("bad texture index '" + token + "'", lineno);
        }
        // A trailing /vn part is tolerated and ignored.
    }
    return c;
}

} // namespace

TexturedMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open OBJ: " + path);

    std::vector<Vec3> vertices;
    std::vector<Vec2> uvs;
    std::vector<std::array<FaceCorner, 3>> faces;
    std::string mtllib;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ss >> p.x() >> p.y() >> p.z())) throw ParseError("malformed vertex", lineno);
            vertices.push_back(p);
        } else if (tag == "vt") {
            Vec2 t;
            if (!(ss >> t.x() >> t.y())) throw ParseError("malformed texture coordinate", lineno);
            uvs.push_back(t);
        } else if (tag == "f") {
            std::vector<std::string> tokens;
            std::string tok;
            while (ss >> tok) tokens.push_back(tok);
            if (tokens.size() != 3)
                throw ParseError("only triangular faces are supported (got " +
                                 std::to_string(tokens.size()) + " corners)", lineno);
            std::array<FaceCorner, 3> face;
            for (int k = 0; k < 3; ++k) {
                FaceCorner c = parse_corner(tokens[k], lineno);
                if (c.v <= 0 || c.v > static_cast<int>(vertices.size()))
                    throw ParseError("face vertex index " + std::to_string(c.v) +
                                     " out of range (OBJ indices are 1-based)", lineno);
                if (c.vt < 0 || c.vt > static_cast<int>(uvs.size()))
                    throw ParseError("face texture index " + std::to_string(c.vt) + " out of range", lineno);
                face[k] = c;
            }
            const bool any_vt = face[0].vt || face[1].vt || face[2].vt;
            const bool all_vt = face[0].vt && face[1].vt && face[2].vt;
            if (any_vt && !all_vt)
                throw ParseError("face mixes corners with and without texture coordinates", lineno);
            faces.push_back(face);
        } else if (tag == "mtllib") {
            if (!(ss >> mtllib)) throw ParseError("mtllib without a file", lineno);
        }
        // usemtl, vn, o, g, s and other statements are ignored.
    }

    TexturedMesh tm;
    tm.mesh.vertices.resize(static_cast<Eigen::Index>(vertices.size()), 3);
    for (std::size_t i = 0; i < vertices.size(); ++i) tm.mesh.vertices.row(i) = vertices[i];
    tm.mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);

    const bool with_uvs = !faces.empty() && faces[0].at(0).vt != 0;
    for (const auto& f : faces)
        if ((f[0].vt != 0) != with_uvs)
            throw ParseError("OBJ mixes textured and untextured faces", 0);
    if (with_uvs) tm.mesh.corner_uvs.emplace(faces.size());

    for (std::size_t i = 0; i < faces.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            tm.mesh.faces(static_cast<Eigen::Index>(i), k) = faces[i][k].v - 1;
            if (with_uvs) (*tm.mesh.corner_uvs)[i][k] = uvs[faces[i][k].vt - 1];
        }
    }
    tm.mesh.validate();

    if (!mtllib.empty()) {
        const fs::path dir = fs::path(path).parent_path();
        const std::string texture = parse_mtl((dir / mtllib).string());
        if (!texture.empty()) {
            const fs::path tex_path = dir / texture;
            if (!fs::exists(tex_path))
                throw MissingTextureError("referenced texture not found: " + tex_path.string());
            tm.atlas.image = read_png(tex_path.string(), 3);
        }
    }
    return tm;
}

// Re-parse of the vt table on load must regroup identical coordinates, so
// deduplication keys on the printed form.
void save_obj(const TexturedMesh& tm, const std::string& path) {
    const Mesh& mesh = tm.mesh;
    std::ostringstream out;
    out << "# meshboost OBJ\n";

    const fs::path p(path);
    const std::string stem = p.stem().string();
    const bool with_texture = !tm.atlas.image.empty();
    if (with_texture) out << "mtllib " << stem << ".mtl\n";

    char buf[128];
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", mesh.vertices(i, 0), mesh.vertices(i, 1),
                      mesh.vertices(i, 2));
        out << buf;
    }

    std::vector<int> corner_vt;
    if (mesh.has_uvs()) {
        corner_vt.resize(static_cast<std::size_t>(mesh.num_faces()) * 3);
        std::unordered_map<std::string, int> seen;
        std::vector<std::string> vt_lines;
        for (int f = 0; f < mesh.num_faces(); ++f)
            for (int k = 0; k < 3; ++k) {
                const Vec2& uv = (*mesh.corner_uvs)[f][k];
                std::snprintf(buf, sizeof(buf), "vt %.9g %.9g\n", uv.x(), uv.y());
                auto [it, inserted] = seen.emplace(buf, static_cast<int>(vt_lines.size()) + 1);
                if (inserted) vt_lines.emplace_back(buf);
                corner_vt[static_cast<std::size_t>(f) * 3 + k] = it->second;
            }
        for (const auto& l : vt_lines) out << l;
    }

    if (with_texture) out << "usemtl material0\n";
    for (int f = 0; f < mesh.num_faces(); ++f) {
        out << "f";
        for (int k = 0; k < 3; ++k) {
            out << ' ' << mesh.faces(f, k) + 1;
            if (mesh.has_uvs()) out << '/' << corner_vt[static_cast<std::size_t>(f) * 3 + k];
        }
        out << '\n';
    }

    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open OBJ for writing: " + path);
    file << out.str();
    if (!file) throw IoError("failed writing OBJ: " + path);
    file.close();

    if (with_texture) {
        const fs::path dir = p.parent_path();
        std::ofstream mtl(dir / (stem + ".mtl"), std::ios::binary);
        if (!mtl) throw IoError("cannot write material file for: " + path);
        mtl << "newmtl material0\nKd 1 1 1\nmap_Kd " << stem << ".png\n";
        mtl.close();
        write_png(tm.atlas.image, (dir / (stem + ".png")).string());
    }
}

} // namespace meshboost
