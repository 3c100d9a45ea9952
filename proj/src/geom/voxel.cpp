#include "tactoshape/geom/voxel.hpp"

#include <algorithm>
#include <cmath>

namespace tact::geom {

GridSpec GridSpec::covering(const Aabb& box, std::uint32_t n) {
    GridSpec spec;
    spec.origin = box.lo;
    spec.cell = (box.hi - box.lo) / static_cast<double>(n);
    spec.nx = spec.ny = spec.nz = n;
    return spec;
}

std::size_t VoxelGrid::count_occupied() const {
    std::size_t n = 0;
    for (std::uint8_t v : occupied)
        n += v != 0;
    return n;
}

namespace {

// Probe directions for the parity test: the canonical axis first, then three
// fixed skew directions used when a cast grazes an edge or a near-parallel
// triangle. Constants are arbitrary but frozen for reproducibility.
const Vec3 kProbeDirs[4] = {
    {1.0, 0.0, 0.0},
    normalized(Vec3{0.9264347, 0.2465321, 0.2861003}),
    normalized(Vec3{0.1931713, 0.9356291, 0.2957821}),
    normalized(Vec3{0.2643001, 0.1723819, 0.9489347}),
};

bool hit_is_grazing(const RayHit& hit, const Vec3& dir) {
    constexpr double kBaryEps = 1e-9;
    const double w = 1.0 - hit.u - hit.v;
    if (hit.u < kBaryEps || hit.v < kBaryEps || w < kBaryEps)
        return true;
    return std::abs(dot(hit.normal, dir)) < 1e-9;
}

// Parity result of one probe; `ok` is false when the cast was ambiguous.
struct ParityProbe {
    bool ok = false;
    bool inside = false;
};

ParityProbe probe_parity(const Bvh& bvh, const Vec3& point, const Vec3& dir) {
    const auto hits = bvh.raycast_all({point, dir}, 1e300, 1e-12);
    for (const RayHit& hit : hits)
        if (hit_is_grazing(hit, dir))
            return {};
    return {true, (hits.size() % 2) == 1};
}

} // namespace

bool point_in_mesh(const Bvh& bvh, const Vec3& point) {
    for (const Vec3& dir : kProbeDirs) {
        const ParityProbe probe = probe_parity(bvh, point, dir);
        if (probe.ok)
            return probe.inside;
    }
    // Every direction grazed; report outside rather than guessing.
    return false;
}

bool point_in_mesh(const TriangleMesh& mesh, const Vec3& point) {
    return point_in_mesh(Bvh(mesh), point);
}

VoxelGrid voxelize_mesh(const Bvh& bvh, const GridSpec& spec) {
    VoxelGrid grid;
    grid.spec = spec;
    grid.occupied.assign(spec.cell_count(), 0);

    // One vertical parity ray per column of cell centers. The ray starts
    // below both the grid and the mesh so every surface crossing under a
    // center is seen.
    const Aabb mesh_box = bvh.mesh().bounds();
    const double z0 =
        std::min(spec.origin.z, mesh_box.lo.z) - std::abs(spec.cell.z) - 1.0;
    const Vec3 up{0.0, 0.0, 1.0};

    for (std::uint32_t j = 0; j < spec.ny; ++j) {
        for (std::uint32_t i = 0; i < spec.nx; ++i) {
            const Vec3 base = spec.cell_center(i, j, 0);
            const Ray column{{base.x, base.y, z0}, up};
            const auto hits = bvh.raycast_all(column, 1e300, 1e-12);
            bool ambiguous = false;
            for (const RayHit& hit : hits)
                if (hit_is_grazing(hit, up)) {
                    ambiguous = true;
                    break;
                }
            if (!ambiguous) {
                std::size_t h = 0;
                bool inside = false;
                for (std::uint32_t k = 0; k < spec.nz; ++k) {
                    const double tc = spec.cell_center(i, j, k).z - z0;
                    while (h < hits.size() && hits[h].t < tc) {
                        inside = !inside;
                        ++h;
                    }
                    grid.occupied[spec.index(i, j, k)] = inside ? 1 : 0;
                }
            } else {
                // Fall back to the per-center test with redirected probes.
                for (std::uint32_t k = 0; k < spec.nz; ++k)
                    grid.occupied[spec.index(i, j, k)] =
                        point_in_mesh(bvh, spec.cell_center(i, j, k)) ? 1 : 0;
            }
        }
    }
    return grid;
}

VoxelGrid voxelize_mesh(const TriangleMesh& mesh, const GridSpec& spec) {
    return voxelize_mesh(Bvh(mesh), spec);
}

} // namespace tact::geom
