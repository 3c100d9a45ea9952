#include "tactoshape/geom/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tact::geom {

namespace {

std::string lower_ext(const std::string& path) {
    const auto pos = path.find_last_of('.');
    if (pos == std::string::npos)
        return {};
    std::string ext = path.substr(pos + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

// First token of an OBJ face vertex spec ("7", "7/2", "7//3", "7/2/3").
std::uint32_t obj_vertex_index(const std::string& spec, std::size_t n_vertices,
                               const std::string& path) {
    long idx = 0;
    try {
        idx = std::stol(spec.substr(0, spec.find('/')));
    } catch (const std::exception&) {
        fail(path, "bad face index '" + spec + "'");
    }
    if (idx < 0)
        idx = static_cast<long>(n_vertices) + idx + 1;
    if (idx < 1 || static_cast<std::size_t>(idx) > n_vertices)
        fail(path, "face index out of range: " + spec);
    return static_cast<std::uint32_t>(idx - 1);
}

struct PlyProperty {
    std::string name;
    std::string type;      // scalar type, or value type for lists
    std::string list_count; // empty for scalars
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

std::size_t ply_type_size(const std::string& t, const std::string& path) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8")
        return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16")
        return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
        t == "float" || t == "float32")
        return 4;
    if (t == "double" || t == "float64")
        return 8;
    fail(path, "unsupported PLY property type '" + t + "'");
}

double ply_read_scalar(std::ifstream& in, const std::string& type,
                       const std::string& path) {
    auto read_raw = [&](void* dst, std::size_t n) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (!in)
            fail(path, "unexpected end of file");
    };
    if (type == "float" || type == "float32") {
        float v;
        read_raw(&v, 4);
        return static_cast<double>(v);
    }
    if (type == "double" || type == "float64") {
        double v;
        read_raw(&v, 8);
        return v;
    }
    if (type == "char" || type == "int8") {
        std::int8_t v;
        read_raw(&v, 1);
        return v;
    }
    if (type == "uchar" || type == "uint8") {
        std::uint8_t v;
        read_raw(&v, 1);
        return v;
    }
    if (type == "short" || type == "int16") {
        std::int16_t v;
        read_raw(&v, 2);
        return v;
    }
    if (type == "ushort" || type == "uint16") {
        std::uint16_t v;
        read_raw(&v, 2);
        return v;
    }
    if (type == "int" || type == "int32") {
        std::int32_t v;
        read_raw(&v, 4);
        return v;
    }
    if (type == "uint" || type == "uint32") {
        std::uint32_t v;
        read_raw(&v, 4);
        return v;
    }
    fail(path, "unsupported PLY property type '" + type + "'");
}

std::vector<PlyElement> ply_read_header(std::ifstream& in,
                                        const std::string& path) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
        fail(path, "not a PLY file");
    std::vector<PlyElement> elements;
    bool format_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info" || tok.empty())
            continue;
        if (tok == "format") {
            std::string fmt, ver;
            ls >> fmt >> ver;
            if (fmt != "binary_little_endian")
                fail(path, "only binary little-endian PLY is supported, got '" +
                               fmt + "'");
            format_seen = true;
        } else if (tok == "element") {
            PlyElement el;
            ls >> el.name >> el.count;
            elements.push_back(el);
        } else if (tok == "property") {
            if (elements.empty())
                fail(path, "property before element in header");
            PlyProperty prop;
            std::string t1;
            ls >> t1;
            if (t1 == "list") {
                ls >> prop.list_count >> prop.type >> prop.name;
            } else {
                prop.type = t1;
                ls >> prop.name;
            }
            elements.back().properties.push_back(prop);
        } else if (tok == "end_header") {
            if (!format_seen)
                fail(path, "missing format line");
            return elements;
        } else {
            fail(path, "unknown header token '" + tok + "'");
        }
    }
    fail(path, "unterminated PLY header");
}

} // namespace

TriangleMesh read_mesh(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "obj")
        return read_obj(path);
    if (ext == "ply")
        return read_ply_mesh(path);
    fail(path, "unsupported mesh format '." + ext + "' (expected .obj or .ply)");
}

TriangleMesh read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail(path, "cannot open file");
    TriangleMesh mesh;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z))
                fail(path, "bad vertex at line " + std::to_string(line_no));
            mesh.vertices.push_back(v);
        } else if (tok == "f") {
            std::vector<std::uint32_t> idx;
            std::string spec;
            while (ls >> spec)
                idx.push_back(
                    obj_vertex_index(spec, mesh.vertices.size(), path));
            if (idx.size() < 3)
                fail(path, "face with fewer than 3 vertices at line " +
                               std::to_string(line_no));
            for (std::size_t k = 1; k + 1 < idx.size(); ++k)
                mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
        }
        // Other directives (vn, vt, o, g, s, usemtl, mtllib) are ignored.
    }
    if (mesh.vertices.empty() || mesh.triangles.empty())
        fail(path, "no triangles found");
    mesh.validate();
    return mesh;
}

TriangleMesh read_ply_mesh(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(path, "cannot open file");
    const auto elements = ply_read_header(in, path);
    TriangleMesh mesh;
    for (const auto& el : elements) {
        if (el.name == "vertex") {
            int ix = -1, iy = -1, iz = -1;
            for (std::size_t p = 0; p < el.properties.size(); ++p) {
                if (!el.properties[p].list_count.empty())
                    fail(path, "list property in vertex element");
                if (el.properties[p].name == "x")
                    ix = static_cast<int>(p);
                if (el.properties[p].name == "y")
                    iy = static_cast<int>(p);
                if (el.properties[p].name == "z")
                    iz = static_cast<int>(p);
            }
            if (ix < 0 || iy < 0 || iz < 0)
                fail(path, "vertex element lacks x/y/z");
            mesh.vertices.reserve(el.count);
            std::vector<double> vals(el.properties.size());
            for (std::size_t i = 0; i < el.count; ++i) {
                for (std::size_t p = 0; p < el.properties.size(); ++p)
                    vals[p] = ply_read_scalar(in, el.properties[p].type, path);
                mesh.vertices.push_back({vals[static_cast<std::size_t>(ix)],
                                         vals[static_cast<std::size_t>(iy)],
                                         vals[static_cast<std::size_t>(iz)]});
            }
        } else if (el.name == "face") {
            mesh.triangles.reserve(el.count);
            for (std::size_t i = 0; i < el.count; ++i) {
                for (const auto& prop : el.properties) {
                    if (prop.list_count.empty()) {
                        ply_read_scalar(in, prop.type, path);
                        continue;
                    }
                    const auto n = static_cast<std::size_t>(
                        ply_read_scalar(in, prop.list_count, path));
                    if (prop.name == "vertex_indices" ||
                        prop.name == "vertex_index") {
                        if (n != 3)
                            fail(path,
                                 "non-triangle face (count " +
                                     std::to_string(n) + "); triangles only");
                        std::array<std::uint32_t, 3> tri{};
                        for (int k = 0; k < 3; ++k)
                            tri[static_cast<std::size_t>(k)] =
                                static_cast<std::uint32_t>(
                                    ply_read_scalar(in, prop.type, path));
                        mesh.triangles.push_back(tri);
                    } else {
                        for (std::size_t k = 0; k < n; ++k)
                            ply_read_scalar(in, prop.type, path);
                    }
                }
            }
        } else {
            // Skip any other element wholesale.
            for (std::size_t i = 0; i < el.count; ++i) {
                for (const auto& prop : el.properties) {
                    if (prop.list_count.empty()) {
                        in.ignore(static_cast<std::streamsize>(
                            ply_type_size(prop.type, path)));
                    } else {
                        const auto n = static_cast<std::size_t>(
                            ply_read_scalar(in, prop.list_count, path));
                        in.ignore(static_cast<std::streamsize>(
                            n * ply_type_size(prop.type, path)));
                    }
                }
            }
        }
    }
    if (mesh.vertices.empty() || mesh.triangles.empty())
        fail(path, "no triangles found");
    mesh.validate();
    return mesh;
}

void write_obj(const std::string& path, const TriangleMesh& mesh) {
    std::ofstream out(path);
    if (!out)
        fail(path, "cannot open file for writing");
    char buf[128];
    for (const Vec3& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof(buf), "f %u %u %u\n", t[0] + 1, t[1] + 1,
                      t[2] + 1);
        out << buf;
    }
    if (!out)
        fail(path, "write failed");
}

void write_ply_cloud(const std::string& path, const PointCloud& cloud,
                     const std::vector<PointSource>* tags) {
    if (cloud.has_normals() && cloud.normals.size() != cloud.points.size())
        throw std::invalid_argument("cloud normals/points size mismatch");
    if (tags && tags->size() != cloud.points.size())
        throw std::invalid_argument("cloud tags/points size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(path, "cannot open file for writing");
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << cloud.points.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (cloud.has_normals())
        out << "property double nx\nproperty double ny\nproperty double nz\n";
    if (tags)
        out << "property uchar source\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        out.write(reinterpret_cast<const char*>(&p.x), 8);
        out.write(reinterpret_cast<const char*>(&p.y), 8);
        out.write(reinterpret_cast<const char*>(&p.z), 8);
        if (cloud.has_normals()) {
            const Vec3& n = cloud.normals[i];
            out.write(reinterpret_cast<const char*>(&n.x), 8);
            out.write(reinterpret_cast<const char*>(&n.y), 8);
            out.write(reinterpret_cast<const char*>(&n.z), 8);
        }
        if (tags) {
            const auto tag = static_cast<std::uint8_t>((*tags)[i]);
            out.write(reinterpret_cast<const char*>(&tag), 1);
        }
    }
    if (!out)
        fail(path, "write failed");
}

PointCloud read_ply_cloud(const std::string& path,
                          std::vector<PointSource>* tags) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(path, "cannot open file");
    const auto elements = ply_read_header(in, path);
    PointCloud cloud;
    if (tags)
        tags->clear();
    for (const auto& el : elements) {
        if (el.name != "vertex") {
            for (std::size_t i = 0; i < el.count; ++i)
                for (const auto& prop : el.properties) {
                    if (prop.list_count.empty()) {
                        in.ignore(static_cast<std::streamsize>(
                            ply_type_size(prop.type, path)));
                    } else {
                        const auto n = static_cast<std::size_t>(
                            ply_read_scalar(in, prop.list_count, path));
                        in.ignore(static_cast<std::streamsize>(
                            n * ply_type_size(prop.type, path)));
                    }
                }
            continue;
        }
        int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1, isrc = -1;
        for (std::size_t p = 0; p < el.properties.size(); ++p) {
            const std::string& name = el.properties[p].name;
            const int pi = static_cast<int>(p);
            if (name == "x")
                ix = pi;
            else if (name == "y")
                iy = pi;
            else if (name == "z")
                iz = pi;
            else if (name == "nx")
                inx = pi;
            else if (name == "ny")
                iny = pi;
            else if (name == "nz")
                inz = pi;
            else if (name == "source")
                isrc = pi;
        }
        if (ix < 0 || iy < 0 || iz < 0)
            fail(path, "vertex element lacks x/y/z");
        const bool with_normals = inx >= 0 && iny >= 0 && inz >= 0;
        std::vector<double> vals(el.properties.size());
        for (std::size_t i = 0; i < el.count; ++i) {
            for (std::size_t p = 0; p < el.properties.size(); ++p)
                vals[p] = ply_read_scalar(in, el.properties[p].type, path);
            cloud.points.push_back({vals[static_cast<std::size_t>(ix)],
                                    vals[static_cast<std::size_t>(iy)],
                                    vals[static_cast<std::size_t>(iz)]});
            if (with_normals)
                cloud.normals.push_back({vals[static_cast<std::size_t>(inx)],
                                         vals[static_cast<std::size_t>(iny)],
                                         vals[static_cast<std::size_t>(inz)]});
            if (tags && isrc >= 0)
                tags->push_back(static_cast<PointSource>(
                    static_cast<std::uint8_t>(vals[static_cast<std::size_t>(isrc)])));
        }
    }
    return cloud;
}

} // namespace tact::geom
