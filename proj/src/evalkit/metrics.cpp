#include "tactoshape/evalkit/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tactoshape/geom/sampling.hpp"
#include "tactoshape/kern/kernels.hpp"

namespace tact::evalkit {

double jaccard_similarity(const geom::VoxelGrid& a, const geom::VoxelGrid& b) {
    if (!(a.spec == b.spec))
        throw std::invalid_argument("jaccard: voxel grids use different specs");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.occupied.size(); ++i) {
        const bool in_a = a.occupied[i] != 0;
        const bool in_b = b.occupied[i] != 0;
        inter += in_a && in_b;
        uni += in_a || in_b;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double jaccard_similarity(const geom::TriangleMesh& a, const geom::TriangleMesh& b,
                          std::size_t resolution) {
    if (resolution == 0)
        throw std::invalid_argument("jaccard: resolution must be positive");
    geom::Aabb box = a.bounds();
    box.grow(b.bounds());
    const geom::Vec3 pad = (box.hi - box.lo) * 0.025;
    box.lo = box.lo - pad;
    box.hi = box.hi + pad;
    const auto spec =
        geom::GridSpec::covering(box, static_cast<std::uint32_t>(resolution));
    return jaccard_similarity(geom::voxelize_mesh(a, spec),
                              geom::voxelize_mesh(b, spec));
}

namespace {

// mean_a min_b |a - b|
double directed_mean_nn(const std::vector<geom::Vec3>& a,
                        const geom::CloudSoa& b) {
    double sum = 0.0;
    for (const auto& q : a) {
        double d2 = std::numeric_limits<double>::infinity();
        kern::nearest_sqdist(b.size(), b.xs.data(), b.ys.data(), b.zs.data(),
                             q.x, q.y, q.z, &d2);
        sum += std::sqrt(d2);
    }
    return sum / static_cast<double>(a.size());
}

} // namespace

double chamfer_distance(const std::vector<geom::Vec3>& a,
                        const std::vector<geom::Vec3>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("chamfer: point sets must be nonempty");
    const geom::CloudSoa sa(a), sb(b);
    return 0.5 * (directed_mean_nn(a, sb) + directed_mean_nn(b, sa));
}

double chamfer_distance(const geom::TriangleMesh& a, const geom::TriangleMesh& b,
                        std::size_t samples, std::uint64_t seed) {
    if (samples == 0)
        throw std::invalid_argument("chamfer: samples must be positive");
    const auto ca = geom::sample_mesh_surface(a, samples, seed);
    const auto cb = geom::sample_mesh_surface(b, samples, seed + 1);
    return chamfer_distance(ca.points, cb.points);
}

double area_deviation(const geom::TriangleMesh& recon,
                      const geom::TriangleMesh& truth) {
    const double at = geom::mesh_area(truth);
    if (at <= 0.0)
        throw std::invalid_argument("area_deviation: truth mesh has zero area");
    return (geom::mesh_area(recon) - at) / at;
}

}  // namespace tact::evalkit
