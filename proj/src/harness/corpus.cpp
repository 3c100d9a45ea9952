#include "tactoshape/harness/corpus.hpp"

#include "tactoshape/geom/sampling.hpp"
#include "tactoshape/util/seed.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <utility>

namespace tact::harness {

namespace {

using geom::PointCloud;
using geom::TriangleMesh;
using geom::Vec3;

constexpr double kPi = 3.141592653589793;

double uniform01(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Uniform direction on the unit sphere.
Vec3 unit_direction(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
        const Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
        const double n = v.norm();
        if (n > 1e-12)
            return v / n;
    }
}

// Signed power, the superellipsoid workhorse: sgn(u) |u|^p.
double spow(double u, double p) {
    if (u == 0.0)
        return 0.0;
    return (u < 0.0 ? -1.0 : 1.0) * std::pow(std::fabs(u), p);
}

// ------------------------------------------------------------------
// mesh builders (all watertight: shared vertices, outward winding)
// ------------------------------------------------------------------

TriangleMesh icosphere(double radius, int level) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh m;
    m.vertices = {{-1, t, 0},  {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                  {0, -1, t},  {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                  {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    m.triangles = {{0, 11, 5}, {0, 5, 1},   {0, 1, 7},   {0, 7, 10},
                   {0, 10, 11}, {1, 5, 9},  {5, 11, 4},  {11, 10, 2},
                   {10, 7, 6},  {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
                   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},   {4, 9, 5},
                   {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::uint64_t, std::uint32_t> midpoint;
        auto mid = [&](std::uint32_t a, std::uint32_t b) {
            const std::uint64_t key =
                (std::uint64_t(std::min(a, b)) << 32) | std::max(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end())
                return it->second;
            const auto idx = static_cast<std::uint32_t>(m.vertices.size());
            m.vertices.push_back((m.vertices[a] + m.vertices[b]) * 0.5);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<std::uint32_t, 3>> next;
        next.reserve(m.triangles.size() * 4);
        for (const auto& tr : m.triangles) {
            const std::uint32_t ab = mid(tr[0], tr[1]);
            const std::uint32_t bc = mid(tr[1], tr[2]);
            const std::uint32_t ca = mid(tr[2], tr[0]);
            next.push_back({tr[0], ab, ca});
            next.push_back({tr[1], bc, ab});
            next.push_back({tr[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.triangles = std::move(next);
    }
    for (auto& v : m.vertices)
        v = v * (radius / v.norm());
    return m;
}

TriangleMesh ellipsoid_mesh(double a, double b, double c, int level) {
    TriangleMesh m = icosphere(1.0, level);
    for (auto& v : m.vertices)
        v = {a * v.x, b * v.y, c * v.z};
    return m;
}

TriangleMesh box_mesh(double hx, double hy, double hz) {
    TriangleMesh m;
    for (int corner = 0; corner < 8; ++corner)
        m.vertices.push_back({(corner & 1) ? hx : -hx,
                              (corner & 2) ? hy : -hy,
                              (corner & 4) ? hz : -hz});
    m.triangles = {{0, 2, 3}, {0, 3, 1},  // -z
                   {4, 5, 7}, {4, 7, 6},  // +z
                   {0, 1, 5}, {0, 5, 4},  // -y
                   {2, 6, 7}, {2, 7, 3},  // +y
                   {0, 4, 6}, {0, 6, 2},  // -x
                   {1, 3, 7}, {1, 7, 5}}; // +x
    return m;
}

// Shared lattice stitcher for solids of revolution-like grids: `rings` from
// bottom to top, each with `cols` vertices, capped by single pole vertices.
TriangleMesh stitch_lattice(const std::vector<std::vector<Vec3>>& rings,
                            const Vec3& bottom_pole, const Vec3& top_pole,
                            std::size_t cols) {
    TriangleMesh m;
    m.vertices.push_back(bottom_pole);
    for (const auto& ring : rings)
        m.vertices.insert(m.vertices.end(), ring.begin(), ring.end());
    m.vertices.push_back(top_pole);

    const auto ring_base = [&](std::size_t r) {
        return static_cast<std::uint32_t>(1 + r * cols);
    };
    const auto top = static_cast<std::uint32_t>(m.vertices.size() - 1);
    const auto nc = static_cast<std::uint32_t>(cols);

    for (std::uint32_t c = 0; c < nc; ++c) {
        const std::uint32_t cn = (c + 1) % nc;
        m.triangles.push_back({0, ring_base(0) + cn, ring_base(0) + c});
    }
    for (std::size_t r = 0; r + 1 < rings.size(); ++r) {
        const std::uint32_t lo = ring_base(r);
        const std::uint32_t hi = ring_base(r + 1);
        for (std::uint32_t c = 0; c < nc; ++c) {
            const std::uint32_t cn = (c + 1) % nc;
            m.triangles.push_back({lo + c, lo + cn, hi + cn});
            m.triangles.push_back({lo + c, hi + cn, hi + c});
        }
    }
    const std::uint32_t last = ring_base(rings.size() - 1);
    for (std::uint32_t c = 0; c < nc; ++c) {
        const std::uint32_t cn = (c + 1) % nc;
        m.triangles.push_back({top, last + c, last + cn});
    }
    return m;
}

// Capsule along z: cylinder of half-length h, hemispherical caps of radius r.
TriangleMesh capsule_mesh(double r, double h, int level) {
    const std::size_t cols = std::size_t(8) << level;
    const std::size_t hemi = std::size_t(2) << level; // rows per hemisphere
    const std::size_t body = std::max<std::size_t>(1, hemi / 2);

    std::vector<std::vector<Vec3>> rings;
    auto push_ring = [&](double rad, double z) {
        std::vector<Vec3> ring(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            const double w = 2.0 * kPi * double(c) / double(cols);
            ring[c] = {rad * std::cos(w), rad * std::sin(w), z};
        }
        rings.push_back(std::move(ring));
    };
    for (std::size_t i = 1; i <= hemi; ++i) { // bottom cap, pole excluded
        const double phi = -0.5 * kPi + 0.5 * kPi * double(i) / double(hemi);
        push_ring(r * std::cos(phi), -h + r * std::sin(phi));
    }
    for (std::size_t j = 1; j <= body; ++j) // cylinder wall up to +h
        push_ring(r, -h + 2.0 * h * double(j) / double(body));
    for (std::size_t i = 1; i < hemi; ++i) { // top cap, pole excluded
        const double phi = 0.5 * kPi * double(i) / double(hemi);
        push_ring(r * std::cos(phi), h + r * std::sin(phi));
    }
    return stitch_lattice(rings, {0, 0, -h - r}, {0, 0, h + r}, cols);
}

// Barr parametrization; e1 governs north-south blending, e2 east-west.
TriangleMesh superellipsoid_mesh(double a, double b, double c, double e1,
                                 double e2, int level) {
    const std::size_t cols = std::size_t(8) << level;
    const std::size_t rows = (std::size_t(4) << level) - 1;

    std::vector<std::vector<Vec3>> rings(rows, std::vector<Vec3>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const double eta = -0.5 * kPi + kPi * double(i + 1) / double(rows + 1);
        const double ce = spow(std::cos(eta), e1);
        const double se = spow(std::sin(eta), e1);
        for (std::size_t j = 0; j < cols; ++j) {
            const double w = 2.0 * kPi * double(j) / double(cols);
            rings[i][j] = {a * ce * spow(std::cos(w), e2),
                           b * ce * spow(std::sin(w), e2), c * se};
        }
    }
    return stitch_lattice(rings, {0, 0, -c}, {0, 0, c}, cols);
}

// ------------------------------------------------------------------
// analytic surface samplers (area-uniform, exact outward normals)
// ------------------------------------------------------------------

PointCloud sample_sphere(double r, std::size_t n, std::mt19937_64& rng) {
    PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 u = unit_direction(rng);
        cloud.points.push_back(u * r);
        cloud.normals.push_back(u);
    }
    return cloud;
}

PointCloud sample_box(double hx, double hy, double hz, std::size_t n,
                      std::mt19937_64& rng) {
    // Face pair areas along x, y, z normals.
    const double ax = 4.0 * hy * hz, ay = 4.0 * hx * hz, az = 4.0 * hx * hy;
    const double total = 2.0 * (ax + ay + az);
    PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i) {
        double pick = uniform01(rng) * total;
        int axis = 0;
        for (double area : {ax, ax, ay, ay, az, az}) {
            if (pick < area)
                break;
            pick -= area;
            ++axis;
        }
        const double sign = (axis % 2 == 0) ? 1.0 : -1.0;
        const double u = 2.0 * uniform01(rng) - 1.0;
        const double v = 2.0 * uniform01(rng) - 1.0;
        Vec3 p, nrm;
        switch (axis / 2) {
        case 0: p = {sign * hx, u * hy, v * hz}; nrm = {sign, 0, 0}; break;
        case 1: p = {u * hx, sign * hy, v * hz}; nrm = {0, sign, 0}; break;
        default: p = {u * hx, v * hy, sign * hz}; nrm = {0, 0, sign}; break;
        }
        cloud.points.push_back(p);
        cloud.normals.push_back(nrm);
    }
    return cloud;
}

// Exact area-uniform ellipsoid sampling: draw a sphere direction, accept
// with probability proportional to the local area stretch
// |(bc ux, ac uy, ab uz)|, whose maximum over the sphere is the largest
// coefficient.
PointCloud sample_ellipsoid(double a, double b, double c, std::size_t n,
                            std::mt19937_64& rng) {
    const double gmax = std::max({b * c, a * c, a * b});
    PointCloud cloud;
    while (cloud.size() < n) {
        const Vec3 u = unit_direction(rng);
        const Vec3 stretch{b * c * u.x, a * c * u.y, a * b * u.z};
        const double g = stretch.norm();
        if (uniform01(rng) * gmax > g)
            continue;
        cloud.points.push_back({a * u.x, b * u.y, c * u.z});
        Vec3 nrm{u.x / a, u.y / b, u.z / c};
        cloud.normals.push_back(nrm / nrm.norm());
    }
    return cloud;
}

PointCloud sample_capsule(double r, double h, std::size_t n,
                          std::mt19937_64& rng) {
    const double area_caps = 4.0 * kPi * r * r;     // two hemispheres
    const double area_wall = 2.0 * kPi * r * 2.0 * h;
    PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i) {
        if (uniform01(rng) * (area_caps + area_wall) < area_wall) {
            const double w = 2.0 * kPi * uniform01(rng);
            const double z = (2.0 * uniform01(rng) - 1.0) * h;
            const Vec3 nrm{std::cos(w), std::sin(w), 0.0};
            cloud.points.push_back({r * nrm.x, r * nrm.y, z});
            cloud.normals.push_back(nrm);
        } else {
            Vec3 u = unit_direction(rng);
            const double zc = (u.z >= 0.0) ? h : -h; // hemisphere by sign
            cloud.points.push_back({r * u.x, r * u.y, zc + r * u.z});
            cloud.normals.push_back(u);
        }
    }
    return cloud;
}

// Outward normal of the superellipsoid level set at a surface point: the
// gradient of (|x/a|^(2/e2) + |y/b|^(2/e2))^(e2/e1) + |z/c|^(2/e1).
Vec3 superellipsoid_normal(const Vec3& p, double a, double b, double c,
                           double e1, double e2) {
    const double sx = std::pow(std::fabs(p.x / a), 2.0 / e2);
    const double sy = std::pow(std::fabs(p.y / b), 2.0 / e2);
    const double s = sx + sy;
    if (s < 1e-300) // on the z-axis: a pole
        return {0.0, 0.0, p.z >= 0.0 ? 1.0 : -1.0};
    const double outer = std::pow(s, e2 / e1 - 1.0);
    Vec3 g{
        outer * spow(p.x / a, 2.0 / e2 - 1.0) / a,
        outer * spow(p.y / b, 2.0 / e2 - 1.0) / b,
        spow(p.z / c, 2.0 / e1 - 1.0) / c,
    };
    const double n = g.norm();
    if (n < 1e-300)
        return {0.0, 0.0, p.z >= 0.0 ? 1.0 : -1.0};
    return g / n;
}

// No closed-form area element: sample the tessellation area-uniformly and
// attach the analytic gradient normal at each point.
PointCloud sample_superellipsoid(const TriangleMesh& mesh, double a, double b,
                                 double c, double e1, double e2, std::size_t n,
                                 std::mt19937_64& rng) {
    PointCloud cloud = geom::sample_mesh_surface(mesh, n, rng);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        cloud.normals[i] =
            superellipsoid_normal(cloud.points[i], a, b, c, e1, e2);
    return cloud;
}

// ------------------------------------------------------------------
// corpus assembly
// ------------------------------------------------------------------

std::string shape_id(const char* family, std::size_t index) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03zu", family, index);
    return buf;
}

std::mt19937_64 shape_rng(std::uint64_t seed, const std::string& id) {
    std::mt19937_64 rng;
    rng.seed(util::mix_seed(seed, util::hash_name(id)));
    return rng;
}

void check_range(const ParamRange& r, const char* field) {
    if (!r.valid())
        throw std::invalid_argument(std::string("corpus spec: '") + field +
                                    "' must satisfy 0 < lo <= hi");
}

} // namespace

void CorpusSpec::validate() const {
    check_range(sphere_radius, "sphere_radius");
    check_range(box_half_extent, "box_half_extent");
    check_range(ellipsoid_semi_axis, "ellipsoid_semi_axis");
    check_range(capsule_radius, "capsule_radius");
    check_range(capsule_half_length, "capsule_half_length");
    check_range(super_semi_axis, "super_semi_axis");
    check_range(super_exponent, "super_exponent");
    if (super_exponent.lo < 0.2 || super_exponent.hi > 2.0)
        throw std::invalid_argument(
            "corpus spec: 'super_exponent' must stay within [0.2, 2.0]");
    if (tessellation < 0 || tessellation > 6)
        throw std::invalid_argument(
            "corpus spec: 'tessellation' must be in [0, 6]");
    if (samples_per_shape == 0)
        throw std::invalid_argument(
            "corpus spec: 'samples_per_shape' must be positive");
}

std::vector<CorpusShape> generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    std::vector<CorpusShape> out;
    out.reserve(spec.total_count());
    const std::size_t n = spec.samples_per_shape;

    for (std::size_t i = 0; i < spec.spheres; ++i) {
        CorpusShape s;
        s.id = shape_id("sphere", i);
        s.family = "sphere";
        auto rng = shape_rng(spec.seed, s.id);
        const double r = spec.sphere_radius.draw(rng);
        s.params = {{"radius", r}};
        s.mesh = icosphere(r, spec.tessellation);
        s.cloud = sample_sphere(r, n, rng);
        out.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < spec.boxes; ++i) {
        CorpusShape s;
        s.id = shape_id("box", i);
        s.family = "box";
        auto rng = shape_rng(spec.seed, s.id);
        const double hx = spec.box_half_extent.draw(rng);
        const double hy = spec.box_half_extent.draw(rng);
        const double hz = spec.box_half_extent.draw(rng);
        s.params = {{"hx", hx}, {"hy", hy}, {"hz", hz}};
        s.mesh = box_mesh(hx, hy, hz);
        s.cloud = sample_box(hx, hy, hz, n, rng);
        out.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < spec.ellipsoids; ++i) {
        CorpusShape s;
        s.id = shape_id("ellipsoid", i);
        s.family = "ellipsoid";
        auto rng = shape_rng(spec.seed, s.id);
        const double a = spec.ellipsoid_semi_axis.draw(rng);
        const double b = spec.ellipsoid_semi_axis.draw(rng);
        const double c = spec.ellipsoid_semi_axis.draw(rng);
        s.params = {{"a", a}, {"b", b}, {"c", c}};
        s.mesh = ellipsoid_mesh(a, b, c, spec.tessellation);
        s.cloud = sample_ellipsoid(a, b, c, n, rng);
        out.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < spec.capsules; ++i) {
        CorpusShape s;
        s.id = shape_id("capsule", i);
        s.family = "capsule";
        auto rng = shape_rng(spec.seed, s.id);
        const double r = spec.capsule_radius.draw(rng);
        const double h = spec.capsule_half_length.draw(rng);
        s.params = {{"radius", r}, {"half_length", h}};
        s.mesh = capsule_mesh(r, h, spec.tessellation);
        s.cloud = sample_capsule(r, h, n, rng);
        out.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < spec.superellipsoids; ++i) {
        CorpusShape s;
        s.id = shape_id("superellipsoid", i);
        s.family = "superellipsoid";
        auto rng = shape_rng(spec.seed, s.id);
        const double a = spec.super_semi_axis.draw(rng);
        const double b = spec.super_semi_axis.draw(rng);
        const double c = spec.super_semi_axis.draw(rng);
        const double e1 = spec.super_exponent.draw(rng);
        const double e2 = spec.super_exponent.draw(rng);
        s.params = {{"a", a}, {"b", b}, {"c", c}, {"e1", e1}, {"e2", e2}};
        s.mesh = superellipsoid_mesh(a, b, c, e1, e2, spec.tessellation);
        s.cloud = sample_superellipsoid(s.mesh, a, b, c, e1, e2, n, rng);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<CorpusShape> held_out_shapes(int tessellation, std::size_t samples,
                                         std::uint64_t seed) {
    if (tessellation < 0 || tessellation > 6)
        throw std::invalid_argument(
            "held-out shapes: tessellation must be in [0, 6]");
    if (samples == 0)
        throw std::invalid_argument(
            "held-out shapes: samples must be positive");

    std::vector<CorpusShape> out;
    auto add = [&](CorpusShape s) { out.push_back(std::move(s)); };
    const int t = tessellation;
    const std::size_t n = samples;

    { // radius above the training range
        CorpusShape s;
        s.id = "eval_sphere_big";
        s.family = "sphere";
        s.params = {{"radius", 0.058}};
        auto rng = shape_rng(seed, s.id);
        s.mesh = icosphere(0.058, t);
        s.cloud = sample_sphere(0.058, n, rng);
        add(std::move(s));
    }
    { // radius below the training range
        CorpusShape s;
        s.id = "eval_sphere_small";
        s.family = "sphere";
        s.params = {{"radius", 0.027}};
        auto rng = shape_rng(seed, s.id);
        s.mesh = icosphere(0.027, t);
        s.cloud = sample_sphere(0.027, n, rng);
        add(std::move(s));
    }
    { // hx above, hz below the half-extent range
        CorpusShape s;
        s.id = "eval_box_slab";
        s.family = "box";
        s.params = {{"hx", 0.055}, {"hy", 0.035}, {"hz", 0.018}};
        auto rng = shape_rng(seed, s.id);
        s.mesh = box_mesh(0.055, 0.035, 0.018);
        s.cloud = sample_box(0.055, 0.035, 0.018, n, rng);
        add(std::move(s));
    }
    { // all half extents above the range
        CorpusShape s;
        s.id = "eval_box_cube";
        s.family = "box";
        s.params = {{"hx", 0.052}, {"hy", 0.052}, {"hz", 0.052}};
        auto rng = shape_rng(seed, s.id);
        s.mesh = box_mesh(0.052, 0.052, 0.052);
        s.cloud = sample_box(0.052, 0.052, 0.052, n, rng);
        add(std::move(s));
    }
    { // a above, c below the semi-axis range
        CorpusShape s;
        s.id = "eval_ellipsoid_flat";
        s.family = "ellipsoid";
        s.params = {{"a", 0.060}, {"b", 0.030}, {"c", 0.018}};
        auto rng = shape_rng(seed, s.id);
        s.mesh = ellipsoid_mesh(0.060, 0.030, 0.018, t);
        s.cloud = sample_ellipsoid(0.060, 0.030, 0.018, n, rng);
        add(std::move(s));
    }
    { // radius and half length above their ranges
        CorpusShape s;
        s.id = "eval_capsule_long";
        s.family = "capsule";
        s.params = {{"radius", 0.032}, {"half_length", 0.055}};
        auto rng = shape_rng(seed, s.id);
        s.mesh = capsule_mesh(0.032, 0.055, t);
        s.cloud = sample_capsule(0.032, 0.055, n, rng);
        add(std::move(s));
    }
    { // a above the semi-axis range, exponents below: near-box corners
        CorpusShape s;
        s.id = "eval_super_boxy";
        s.family = "superellipsoid";
        s.params = {{"a", 0.052}, {"b", 0.038}, {"c", 0.025}, {"e1", 0.45}, {"e2", 0.45}};
        auto rng = shape_rng(seed, s.id);
        s.mesh = superellipsoid_mesh(0.052, 0.038, 0.025, 0.45, 0.45, t);
        s.cloud =
            sample_superellipsoid(s.mesh, 0.052, 0.038, 0.025, 0.45, 0.45, n, rng);
        add(std::move(s));
    }
    { // c above the semi-axis range, e1 above the exponent range: pinched top
        CorpusShape s;
        s.id = "eval_super_pinch";
        s.family = "superellipsoid";
        s.params = {{"a", 0.030}, {"b", 0.030}, {"c", 0.055}, {"e1", 1.80}, {"e2", 0.90}};
        auto rng = shape_rng(seed, s.id);
        s.mesh = superellipsoid_mesh(0.030, 0.030, 0.055, 1.80, 0.90, t);
        s.cloud =
            sample_superellipsoid(s.mesh, 0.030, 0.030, 0.055, 1.80, 0.90, n, rng);
        add(std::move(s));
    }
    return out;
}

} // namespace tact::harness
