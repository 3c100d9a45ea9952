#pragma once

#include "tactoshape/geom/mesh.hpp"
#include "tactoshape/geom/vec3.hpp"

#include <cstdint>
#include <vector>

namespace tact::geom {

// Scalar samples on a regular lattice. values[(k*ny + j)*nx + i] is the
// sample at origin + (i*spacing.x, j*spacing.y, k*spacing.z).
struct FieldGrid {
    Vec3 origin;
    Vec3 spacing;
    std::uint32_t nx = 0, ny = 0, nz = 0;
    std::vector<double> values;

    std::size_t index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    Vec3 point(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        return {origin.x + i * spacing.x, origin.y + j * spacing.y,
                origin.z + k * spacing.z};
    }
    void validate() const;
};

// Classic lookup-table isosurface extraction with vertex welding: vertices
// on shared cube edges are emitted once, so the mesh is watertight wherever
// the surface does not cross the lattice boundary. Triangles are wound so
// that their normals point toward increasing field values (outward when the
// field is a signed distance, negative inside). Returns an empty mesh when
// the level set does not cross the grid.
TriangleMesh marching_cubes(const FieldGrid& grid, double iso = 0.0);

} // namespace tact::geom
