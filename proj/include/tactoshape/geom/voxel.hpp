#pragma once

#include "tactoshape/geom/bvh.hpp"
#include "tactoshape/geom/mesh.hpp"
#include "tactoshape/geom/vec3.hpp"

#include <cstdint>
#include <vector>

namespace tact::geom {

// Regular grid of cubic-ish cells. Cell (i,j,k) spans
// [origin + (i,j,k)*cell, origin + (i+1,j+1,k+1)*cell).
struct GridSpec {
    Vec3 origin;
    Vec3 cell;            // per-axis cell size
    std::uint32_t nx = 0, ny = 0, nz = 0;

    std::size_t cell_count() const {
        return static_cast<std::size_t>(nx) * ny * nz;
    }
    std::size_t index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    Vec3 cell_center(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        return {origin.x + (i + 0.5) * cell.x, origin.y + (j + 0.5) * cell.y,
                origin.z + (k + 0.5) * cell.z};
    }
    bool operator==(const GridSpec& o) const {
        return origin == o.origin && cell == o.cell && nx == o.nx &&
               ny == o.ny && nz == o.nz;
    }

    // Grid of n^3 cells covering `box`.
    static GridSpec covering(const Aabb& box, std::uint32_t n);
};

struct VoxelGrid {
    GridSpec spec;
    std::vector<std::uint8_t> occupied; // spec.cell_count() entries

    std::size_t count_occupied() const;
    double cell_volume() const {
        return spec.cell.x * spec.cell.y * spec.cell.z;
    }
};

// Inside test by ray-crossing parity against a prebuilt BVH. Grazing hits
// (near triangle edges, or near-parallel triangles) trigger a deterministic
// redirect of the probe ray, up to three times; if every direction stays
// ambiguous the point is reported outside.
bool point_in_mesh(const Bvh& bvh, const Vec3& point);
bool point_in_mesh(const TriangleMesh& mesh, const Vec3& point);

// Occupancy = cell-center containment, computed by sweeping one parity ray
// per grid column (equivalent to point_in_mesh per center, but ~nx*ny rays
// instead of nx*ny*nz).
VoxelGrid voxelize_mesh(const TriangleMesh& mesh, const GridSpec& spec);
VoxelGrid voxelize_mesh(const Bvh& bvh, const GridSpec& spec);

} // namespace tact::geom
