#include "tactoshape/register/icp.hpp"

#include "tactoshape/geom/linalg3.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace tact::reg {

using geom::Mat3;
using geom::Vec3;

void IcpParams::validate() const {
    if (max_iterations == 0)
        throw std::invalid_argument("icp: max_iterations must be > 0");
    if (!(reject_distance > 0.0))
        throw std::invalid_argument("icp: reject_distance must be > 0");
    if (!(tolerance > 0.0))
        throw std::invalid_argument("icp: tolerance must be > 0");
}

namespace {

// Uniform grid over the target with cell = gate, so any point within the
// gate of a query lives in the 27 cells around it.
class GridNn {
public:
    GridNn(const std::vector<Vec3>& points, double cell)
        : cell_(cell), points_(points) {
        bins_.reserve(points.size());
        for (std::uint32_t i = 0; i < points.size(); ++i)
            bins_[key_of(points[i])].push_back(i);
    }

    // index of the nearest point within `gate`, or -1
    int nearest(const Vec3& q, double gate) const {
        const int ix = coord(q.x), iy = coord(q.y), iz = coord(q.z);
        double best = gate * gate;
        int best_i = -1;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const auto it = bins_.find(key(ix + dx, iy + dy, iz + dz));
                    if (it == bins_.end())
                        continue;
                    for (std::uint32_t i : it->second) {
                        const double d2 = norm_sq(points_[i] - q);
                        if (d2 <= best) {
                            best = d2;
                            best_i = static_cast<int>(i);
                        }
                    }
                }
        return best_i;
    }

private:
    int coord(double x) const {
        return static_cast<int>(std::floor(x / cell_));
    }
    static std::int64_t key(int ix, int iy, int iz) {
        const auto m = [](int v) {
            return static_cast<std::int64_t>(v) & 0x1FFFFF;
        };
        return (m(ix) << 42) | (m(iy) << 21) | m(iz);
    }
    std::int64_t key_of(const Vec3& p) const {
        return key(coord(p.x), coord(p.y), coord(p.z));
    }

    double cell_;
    const std::vector<Vec3>& points_;
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> bins_;
};

Vec3 centroid(const std::vector<Vec3>& pts) {
    Vec3 c{0, 0, 0};
    for (const Vec3& p : pts)
        c = c + p;
    return c / static_cast<double>(pts.size());
}

// Least-squares rigid fit R*s + t ~ target over the matched pairs
// (Kabsch with determinant correction).
RigidTransform fit_pairs(const std::vector<Vec3>& src,
                         const std::vector<Vec3>& dst) {
    const Vec3 cs = centroid(src);
    const Vec3 ct = centroid(dst);
    Mat3 h{};
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec3 a = src[i] - cs;
        const Vec3 b = dst[i] - ct;
        h[0] += a.x * b.x; h[1] += a.x * b.y; h[2] += a.x * b.z;
        h[3] += a.y * b.x; h[4] += a.y * b.y; h[5] += a.y * b.z;
        h[6] += a.z * b.x; h[7] += a.z * b.y; h[8] += a.z * b.z;
    }
    const geom::Svd3 svd = geom::svd3(h);
    if (!(svd.sigma[1] > 1e-9 * svd.sigma[0]) || svd.sigma[0] == 0.0)
        throw std::runtime_error(
            "icp: rank-deficient match covariance (points nearly collinear)");
    Mat3 v = svd.v;
    if (geom::mat3_det(geom::mat3_mul(v, geom::mat3_transpose(svd.u))) < 0.0) {
        v[2] = -v[2];
        v[5] = -v[5];
        v[8] = -v[8];
    }
    const Mat3 r = geom::mat3_mul(v, geom::mat3_transpose(svd.u));
    RigidTransform tf;
    tf.r = r;
    tf.t = ct - geom::mat3_apply(r, cs);
    return tf;
}

} // namespace

IcpResult icp_register(const PointCloud& source, const PointCloud& target,
                       const IcpParams& params) {
    params.validate();
    if (source.points.size() < 3 || target.points.size() < 3)
        throw std::invalid_argument("icp: both clouds need at least 3 points");

    const GridNn index(target.points, params.reject_distance);

    IcpResult res;
    res.transform.t = centroid(target.points) - centroid(source.points);
    res.rmse = std::numeric_limits<double>::infinity();

    std::vector<Vec3> ms, mt;
    for (std::size_t it = 0; it < params.max_iterations; ++it) {
        ms.clear();
        mt.clear();
        for (const Vec3& s : source.points) {
            const int j =
                index.nearest(res.transform.apply(s), params.reject_distance);
            if (j >= 0) {
                ms.push_back(s);
                mt.push_back(target.points[static_cast<std::size_t>(j)]);
            }
        }
        if (ms.size() < 3)
            break; // everything gated out; keep the current estimate

        res.transform = fit_pairs(ms, mt);
        double sse = 0.0;
        for (std::size_t i = 0; i < ms.size(); ++i)
            sse += norm_sq(res.transform.apply(ms[i]) - mt[i]);
        const double rmse =
            std::sqrt(sse / static_cast<double>(ms.size()));
        ++res.iterations;
        res.rmse_history.push_back(rmse);

        const double delta = res.rmse - rmse;
        res.rmse = rmse;
        if (std::abs(delta) < params.tolerance) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace tact::reg
