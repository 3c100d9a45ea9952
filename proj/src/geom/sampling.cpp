#include "tactoshape/geom/sampling.hpp"

#include "tactoshape/geom/linalg3.hpp"
#include "tactoshape/kern/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tact::geom {

std::vector<std::size_t> farthest_point_sample(const std::vector<Vec3>& points,
                                               std::size_t m,
                                               std::size_t start_index) {
    if (points.empty())
        throw std::invalid_argument("farthest_point_sample: empty cloud");
    if (m > points.size())
        throw std::invalid_argument(
            "farthest_point_sample: requested more samples than points");
    if (start_index >= points.size())
        throw std::invalid_argument("farthest_point_sample: start out of range");

    std::vector<std::size_t> picked;
    if (m == 0)
        return picked;
    picked.reserve(m);
    picked.push_back(start_index);

    const CloudSoa soa(points);
    std::vector<double> min_d2(points.size(),
                               std::numeric_limits<double>::infinity());
    std::size_t last = start_index;
    while (picked.size() < m) {
        const Vec3& q = points[last];
        kern::min_sqdist_update(points.size(), soa.xs.data(), soa.ys.data(),
                                soa.zs.data(), q.x, q.y, q.z, min_d2.data());
        const std::size_t next = kern::argmax(points.size(), min_d2.data());
        picked.push_back(next);
        last = next;
    }
    return picked;
}

std::vector<std::size_t> knn_indices(const std::vector<Vec3>& points,
                                     std::size_t query, std::size_t k) {
    const std::size_t n = points.size();
    if (query >= n)
        throw std::invalid_argument("knn_indices: query out of range");
    k = std::min(k, n - 1);
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n - 1);
    const Vec3& q = points[query];
    for (std::size_t i = 0; i < n; ++i) {
        if (i == query)
            continue;
        dist.emplace_back(norm_sq(points[i] - q), i);
    }
    std::partial_sort(dist.begin(),
                      dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i)
        out[i] = dist[i].second;
    return out;
}

std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points,
                                   std::size_t k, const Vec3& viewpoint) {
    if (k == 0)
        throw std::invalid_argument("estimate_normals: k must be positive");
    if (points.size() < k)
        throw std::invalid_argument(
            "estimate_normals: cloud smaller than neighborhood size");
    std::vector<Vec3> normals(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto nbrs = knn_indices(points, i, k);
        // Covariance of the point plus its neighborhood.
        Vec3 mean = points[i];
        for (std::size_t j : nbrs)
            mean += points[j];
        mean = mean / static_cast<double>(nbrs.size() + 1);
        Mat3 cov{};
        auto accumulate = [&](const Vec3& p) {
            const Vec3 d = p - mean;
            cov[0] += d.x * d.x;
            cov[1] += d.x * d.y;
            cov[2] += d.x * d.z;
            cov[4] += d.y * d.y;
            cov[5] += d.y * d.z;
            cov[8] += d.z * d.z;
        };
        accumulate(points[i]);
        for (std::size_t j : nbrs)
            accumulate(points[j]);
        cov[3] = cov[1];
        cov[6] = cov[2];
        cov[7] = cov[5];
        const SymEigen3 eig = sym_eigen3(cov);
        Vec3 n = normalized_or(eig.vectors[0], Vec3{0, 0, 1});
        if (dot(viewpoint - points[i], n) < 0.0)
            n = -n;
        normals[i] = n;
    }
    return normals;
}

PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n,
                               std::mt19937_64& rng) {
    if (mesh.triangles.empty())
        throw std::invalid_argument("sample_mesh_surface: empty mesh");
    std::vector<double> cumulative(mesh.triangle_count());
    double total = 0.0;
    for (std::size_t i = 0; i < mesh.triangle_count(); ++i) {
        total += mesh.triangle_area(i);
        cumulative[i] = total;
    }
    if (!(total > 0.0))
        throw std::invalid_argument("sample_mesh_surface: zero-area mesh");

    PointCloud cloud;
    cloud.points.reserve(n);
    cloud.normals.reserve(n);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::size_t s = 0; s < n; ++s) {
        const double target = uni(rng) * total;
        const auto it =
            std::lower_bound(cumulative.begin(), cumulative.end(), target);
        const std::size_t tri = std::min(
            static_cast<std::size_t>(it - cumulative.begin()),
            mesh.triangle_count() - 1);
        double u = uni(rng);
        double v = uni(rng);
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        const Vec3 a = mesh.triangle_vertex(tri, 0);
        const Vec3 b = mesh.triangle_vertex(tri, 1);
        const Vec3 c = mesh.triangle_vertex(tri, 2);
        cloud.points.push_back(a + (b - a) * u + (c - a) * v);
        cloud.normals.push_back(
            normalized_or(mesh.triangle_normal_raw(tri), Vec3{0, 0, 1}));
    }
    return cloud;
}

PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n,
                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_mesh_surface(mesh, n, rng);
}

double min_pairwise_distance(const std::vector<Vec3>& points) {
    if (points.size() < 2)
        return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            best = std::min(best, norm_sq(points[i] - points[j]));
    return std::sqrt(best);
}

double mean_nn_spacing(const std::vector<Vec3>& points) {
    if (points.size() < 2)
        throw std::invalid_argument("mean_nn_spacing: need at least 2 points");
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i)
                continue;
            best = std::min(best, norm_sq(points[i] - points[j]));
        }
        sum += std::sqrt(best);
    }
    return sum / static_cast<double>(points.size());
}

} // namespace tact::geom
