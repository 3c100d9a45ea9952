#pragma once

#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tact::geom {

// Per-point provenance tag for persisted evidence clouds.
enum class PointSource : std::uint8_t {
    visual = 0,
    touch = 1,
};

// Reads an OBJ or binary little-endian PLY mesh; the format is chosen by the
// file extension (.obj / .ply, case-insensitive). Polygon faces in OBJ files
// are fan-triangulated; PLY faces must be triangles. Throws
// std::runtime_error with a descriptive message on malformed input.
TriangleMesh read_mesh(const std::string& path);

TriangleMesh read_obj(const std::string& path);
TriangleMesh read_ply_mesh(const std::string& path);

void write_obj(const std::string& path, const TriangleMesh& mesh);

// Binary little-endian PLY cloud with double precision positions, optional
// normals, and an optional per-point source tag.
void write_ply_cloud(const std::string& path, const PointCloud& cloud,
                     const std::vector<PointSource>* tags = nullptr);

PointCloud read_ply_cloud(const std::string& path,
                          std::vector<PointSource>* tags = nullptr);

} // namespace tact::geom
