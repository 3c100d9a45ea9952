#include "support/oracles.hpp"

#include "tactoshape/geom/bvh.hpp"
#include "tactoshape/geom/cloud.hpp"
#include "tactoshape/geom/linalg3.hpp"
#include "tactoshape/geom/marching_cubes.hpp"
#include "tactoshape/geom/mesh.hpp"
#include "tactoshape/geom/mesh_io.hpp"
#include "tactoshape/geom/sampling.hpp"
#include "tactoshape/geom/transform.hpp"
#include "tactoshape/geom/voxel.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace tact::geom;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec3 v{g(rng), g(rng), g(rng)};
    while (norm(v) < 1e-6)
        v = {g(rng), g(rng), g(rng)};
    return normalized(v);
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

// ---------------------------------------------------------------------------
// transforms

TEST_CASE("transform compose and inverse round-trip") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const RigidTransform a =
            from_rpy(u(rng), u(rng), u(rng), {u(rng), u(rng), u(rng)});
        const RigidTransform b =
            from_rpy(u(rng), u(rng), u(rng), {u(rng), u(rng), u(rng)});
        CHECK(orthonormality_error(a) < 1e-12);

        const Vec3 p{u(rng), u(rng), u(rng)};
        const Vec3 via_compose = compose(a, b).apply(p);
        const Vec3 via_apply = a.apply(b.apply(p));
        CHECK(norm(via_compose - via_apply) < 1e-12);

        const Vec3 back = inverse(a).apply(a.apply(p));
        CHECK(norm(back - p) < 1e-12);

        const RigidTransform ident = compose(a, inverse(a));
        CHECK(rotation_angle(ident) < 1e-7);
        CHECK(norm(ident.t) < 1e-12);
    }
}

TEST_CASE("axis-angle rotation") {
    const RigidTransform r = axis_angle({0, 0, 1}, kPi / 2.0);
    CHECK(norm(r.rotate({1, 0, 0}) - Vec3{0, 1, 0}) < 1e-12);
    CHECK(rotation_angle(r) == doctest::Approx(kPi / 2.0).epsilon(1e-12));
    CHECK(rotation_angle(axis_angle({0, 1, 0}, 0.3)) ==
          doctest::Approx(0.3).epsilon(1e-10));

    // rotate_transposed is the inverse rotation
    std::mt19937_64 rng(3);
    const Vec3 v = random_unit(rng);
    const RigidTransform q = axis_angle(random_unit(rng), 0.7);
    CHECK(norm(q.rotate_transposed(q.rotate(v)) - v) < 1e-12);
}

TEST_CASE("planar motion pivots about the vertical line through center") {
    const Vec3 center{0.3, -0.2, 0.05};
    const Vec3 shift{0.01, -0.02, 0.0};
    const RigidTransform m = planar_motion(center, 0.4, shift);

    // the pivot itself translates only
    CHECK(norm(m.apply(center) - (center + shift)) < 1e-12);
    // vertical directions are preserved
    CHECK(norm(m.rotate({0, 0, 1}) - Vec3{0, 0, 1}) < 1e-12);
    // points keep their height above the pivot
    const Vec3 p{0.35, -0.25, 0.09};
    CHECK(m.apply(p).z == doctest::Approx(p.z + shift.z).epsilon(1e-12));
    // and their horizontal distance to it
    const Vec3 d0 = p - center;
    const Vec3 d1 = m.apply(p) - (center + shift);
    CHECK(std::hypot(d1.x, d1.y) ==
          doctest::Approx(std::hypot(d0.x, d0.y)).epsilon(1e-12));
    CHECK(rotation_angle(m) == doctest::Approx(0.4).epsilon(1e-10));
}

TEST_CASE("orthonormality error flags corrupted rotations") {
    CHECK(orthonormality_error(RigidTransform::identity()) == 0.0);
    RigidTransform bad;
    bad.r[0] = 1.05;
    CHECK(orthonormality_error(bad) > 0.05);
}

// ---------------------------------------------------------------------------
// linalg3

TEST_CASE("symmetric eigen decomposition") {
    const Mat3 d{3, 0, 0, 0, 1, 0, 0, 0, 2};
    const SymEigen3 e = sym_eigen3(d);
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(2.0));
    CHECK(e.values[2] == doctest::Approx(3.0));
    CHECK(std::abs(e.vectors[0].y) == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors[1].z) == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors[2].x) == doctest::Approx(1.0));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Mat3 s{};
        const double a = u(rng), b = u(rng), c = u(rng);
        const double p = u(rng), q = u(rng), r = u(rng);
        s = {a, p, q, p, b, r, q, r, c};
        const SymEigen3 eig = sym_eigen3(s);
        CHECK(eig.values[0] <= eig.values[1]);
        CHECK(eig.values[1] <= eig.values[2]);
        // reconstruct sum lambda_i v_i v_i^T
        Mat3 rec{};
        for (int i = 0; i < 3; ++i) {
            const Vec3 v = eig.vectors[static_cast<std::size_t>(i)];
            const double l = eig.values[static_cast<std::size_t>(i)];
            const double vv[3] = {v.x, v.y, v.z};
            for (int row = 0; row < 3; ++row)
                for (int col = 0; col < 3; ++col)
                    rec[static_cast<std::size_t>(row * 3 + col)] +=
                        l * vv[row] * vv[col];
        }
        for (int i = 0; i < 9; ++i)
            CHECK(rec[static_cast<std::size_t>(i)] ==
                  doctest::Approx(s[static_cast<std::size_t>(i)])
                      .epsilon(1e-9));
        // orthonormal vectors
        for (int i = 0; i < 3; ++i) {
            CHECK(norm(eig.vectors[static_cast<std::size_t>(i)]) ==
                  doctest::Approx(1.0).epsilon(1e-12));
            for (int j = i + 1; j < 3; ++j)
                CHECK(std::abs(dot(eig.vectors[static_cast<std::size_t>(i)],
                                   eig.vectors[static_cast<std::size_t>(j)])) <
                      1e-9);
        }
    }
}

TEST_CASE("svd3 reconstructs general and rank-deficient matrices") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    auto check_svd = [](const Mat3& a) {
        const Svd3 s = svd3(a);
        CHECK(s.sigma[0] >= s.sigma[1]);
        CHECK(s.sigma[1] >= s.sigma[2]);
        CHECK(s.sigma[2] >= -1e-12);
        // u, v orthonormal
        const Mat3 utu = mat3_mul(mat3_transpose(s.u), s.u);
        const Mat3 vtv = mat3_mul(mat3_transpose(s.v), s.v);
        for (int i = 0; i < 9; ++i) {
            const double id = (i % 4 == 0) ? 1.0 : 0.0;
            CHECK(utu[static_cast<std::size_t>(i)] ==
                  doctest::Approx(id).epsilon(1e-9));
            CHECK(vtv[static_cast<std::size_t>(i)] ==
                  doctest::Approx(id).epsilon(1e-9));
        }
        // a == u * diag(sigma) * v^T
        Mat3 us{};
        for (int row = 0; row < 3; ++row)
            for (int col = 0; col < 3; ++col)
                us[static_cast<std::size_t>(row * 3 + col)] =
                    s.u[static_cast<std::size_t>(row * 3 + col)] *
                    s.sigma[static_cast<std::size_t>(col)];
        const Mat3 rec = mat3_mul(us, mat3_transpose(s.v));
        for (int i = 0; i < 9; ++i)
            CHECK(rec[static_cast<std::size_t>(i)] ==
                  doctest::Approx(a[static_cast<std::size_t>(i)])
                      .epsilon(1e-9));
    };

    for (int trial = 0; trial < 20; ++trial) {
        Mat3 a;
        for (int i = 0; i < 9; ++i)
            a[static_cast<std::size_t>(i)] = u(rng);
        check_svd(a);
    }

    // rank-1 outer product
    const Vec3 x{1.0, -2.0, 0.5};
    const Vec3 y{0.3, 0.4, -1.2};
    Mat3 r1;
    const double xv[3] = {x.x, x.y, x.z};
    const double yv[3] = {y.x, y.y, y.z};
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col)
            r1[static_cast<std::size_t>(row * 3 + col)] = xv[row] * yv[col];
    check_svd(r1);
    const Svd3 s1 = svd3(r1);
    CHECK(s1.sigma[0] == doctest::Approx(norm(x) * norm(y)).epsilon(1e-9));
    CHECK(s1.sigma[1] < 1e-9);
    CHECK(s1.sigma[2] < 1e-9);

    // rank-2: collinear-free but flat
    Mat3 r2{1, 0, 0, 0, 1, 0, 0, 0, 0};
    check_svd(r2);
}

// ---------------------------------------------------------------------------
// mesh measures

TEST_CASE("cube area, volume, watertightness") {
    const TriangleMesh cube = oracle::unit_cube_centered();
    cube.validate();
    CHECK(mesh_area(cube) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(mesh_signed_volume(cube) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mesh_is_watertight(cube));

    TriangleMesh open = cube;
    open.triangles.pop_back();
    CHECK(!mesh_is_watertight(open));

    TriangleMesh bad = cube;
    bad.triangles.push_back({0, 1, 200});
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("icosphere area and volume approach the analytic sphere") {
    const TriangleMesh sph = oracle::icosphere(1.0, 4);
    CHECK(mesh_is_watertight(sph));
    CHECK(mesh_area(sph) == doctest::Approx(4.0 * kPi).epsilon(0.01));
    CHECK(mesh_signed_volume(sph) ==
          doctest::Approx(4.0 / 3.0 * kPi).epsilon(0.01));
}

TEST_CASE("rigid transforms preserve mesh measures") {
    const TriangleMesh sph = oracle::icosphere(0.07, 2);
    const RigidTransform tf = from_rpy(0.3, -0.2, 1.1, {0.4, -0.1, 0.25});
    const TriangleMesh moved = sph.transformed(tf);
    CHECK(mesh_area(moved) == doctest::Approx(mesh_area(sph)).epsilon(1e-12));
    CHECK(mesh_signed_volume(moved) ==
          doctest::Approx(mesh_signed_volume(sph)).epsilon(1e-10));
    const Aabb b = moved.bounds();
    CHECK(b.valid());
    CHECK(b.contains(moved.vertices.front()));
}

// ---------------------------------------------------------------------------
// mesh + cloud IO

TEST_CASE("obj write/read round trip") {
    const TriangleMesh cube = oracle::unit_cube_centered();
    const auto path = temp_file("tact_geom_cube.obj");
    write_obj(path.string(), cube);
    const TriangleMesh back = read_mesh(path.string());
    REQUIRE(back.vertex_count() == cube.vertex_count());
    REQUIRE(back.triangle_count() == cube.triangle_count());
    for (std::size_t i = 0; i < cube.vertices.size(); ++i)
        CHECK(norm(back.vertices[i] - cube.vertices[i]) == 0.0);
    CHECK(back.triangles == cube.triangles);
    std::filesystem::remove(path);
}

TEST_CASE("obj reader fan-triangulates polygons and accepts negative indices") {
    const auto path = temp_file("tact_geom_quad.obj");
    {
        std::ofstream out(path);
        out << "# quad plus a negative-index triangle\n"
            << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\n"
            << "f 1/1/1 2//2 3 4\n"
            << "f -1 -5 -4\n";
    }
    const TriangleMesh m = read_obj(path.string());
    REQUIRE(m.vertex_count() == 5);
    REQUIRE(m.triangle_count() == 3); // quad -> 2, triangle -> 1
    CHECK(m.triangles[0] == std::array<std::uint32_t, 3>{0, 1, 2});
    CHECK(m.triangles[1] == std::array<std::uint32_t, 3>{0, 2, 3});
    CHECK(m.triangles[2] == std::array<std::uint32_t, 3>{4, 0, 1});
    std::filesystem::remove(path);

    const auto bad = temp_file("tact_geom_bad.obj");
    {
        std::ofstream out(bad);
        out << "v 0 0 0\nf 1 2 3\n";
    }
    CHECK_THROWS_AS(read_obj(bad.string()), std::runtime_error);
    std::filesystem::remove(bad);
}

TEST_CASE("ply cloud round trip preserves doubles, normals, and source tags") {
    PointCloud cloud;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    std::vector<PointSource> tags;
    for (int i = 0; i < 57; ++i) {
        cloud.points.push_back({u(rng), u(rng), u(rng)});
        cloud.normals.push_back(random_unit(rng));
        tags.push_back(i % 3 == 0 ? PointSource::touch : PointSource::visual);
    }
    const auto path = temp_file("tact_geom_cloud.ply");
    write_ply_cloud(path.string(), cloud, &tags);

    std::vector<PointSource> tags_back;
    const PointCloud back = read_ply_cloud(path.string(), &tags_back);
    REQUIRE(back.size() == cloud.size());
    REQUIRE(back.has_normals());
    REQUIRE(tags_back.size() == tags.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK(back.points[i] == cloud.points[i]); // bit-exact
        CHECK(back.normals[i] == cloud.normals[i]);
        CHECK(tags_back[i] == tags[i]);
    }
    std::filesystem::remove(path);

    // positions only
    PointCloud bare;
    bare.points = cloud.points;
    write_ply_cloud(path.string(), bare);
    const PointCloud bare_back = read_ply_cloud(path.string());
    CHECK(bare_back.size() == bare.size());
    CHECK(!bare_back.has_normals());
    std::filesystem::remove(path);
}

TEST_CASE("ply mesh reader handles binary little-endian triangles") {
    const auto path = temp_file("tact_geom_tri.ply");
    {
        std::ofstream out(path, std::ios::binary);
        out << "ply\n"
            << "format binary_little_endian 1.0\n"
            << "comment synthetic\n"
            << "element vertex 3\n"
            << "property float x\n"
            << "property float y\n"
            << "property float z\n"
            << "element face 1\n"
            << "property list uchar int vertex_indices\n"
            << "end_header\n";
        const float verts[9] = {0.f, 0.f, 0.f, 1.f, 0.f, 0.f, 0.f, 1.f, 0.f};
        out.write(reinterpret_cast<const char*>(verts), sizeof(verts));
        const std::uint8_t n = 3;
        const std::int32_t idx[3] = {0, 1, 2};
        out.write(reinterpret_cast<const char*>(&n), 1);
        out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
    const TriangleMesh m = read_mesh(path.string());
    REQUIRE(m.vertex_count() == 3);
    REQUIRE(m.triangle_count() == 1);
    CHECK(norm(m.vertices[1] - Vec3{1, 0, 0}) < 1e-7);
    CHECK(m.triangles[0] == std::array<std::uint32_t, 3>{0, 1, 2});
    CHECK(m.triangle_area(0) == doctest::Approx(0.5));
    std::filesystem::remove(path);
}

// ---------------------------------------------------------------------------
// raycasting

TEST_CASE("bvh raycast against a cube matches the slab oracle") {
    const TriangleMesh cube = oracle::unit_cube_centered();
    const Bvh bvh(cube);
    const Vec3 lo{-0.5, -0.5, -0.5}, hi{0.5, 0.5, 0.5};

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> inside(-0.45, 0.45);
    int hits = 0, misses = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Vec3 origin{u(rng), u(rng), u(rng)};
        // half the rays aim at the cube so both branches get exercised
        const Vec3 dir = trial % 2 == 0
                             ? random_unit(rng)
                             : normalized(Vec3{inside(rng), inside(rng),
                                               inside(rng)} -
                                          origin);
        const Ray ray{origin, dir};
        const double want = oracle::slab_box_hit(ray.origin, ray.dir, lo, hi);
        const auto got = bvh.raycast(ray);
        if (want < 0.0) {
            CHECK(!got.has_value());
            ++misses;
        } else {
            REQUIRE(got.has_value());
            CHECK(got->t == doctest::Approx(want).epsilon(1e-9));
            CHECK(norm(got->point - (ray.origin + ray.dir * got->t)) < 1e-9);
            CHECK(dot(got->normal, ray.dir) < 0.0);
            CHECK(norm(got->normal) == doctest::Approx(1.0).epsilon(1e-12));
            ++hits;
        }
    }
    CHECK(hits > 50);
    CHECK(misses > 50);
}

TEST_CASE("raycast fixed cases on the unit cube") {
    const TriangleMesh cube = oracle::unit_cube_centered();
    const Bvh bvh(cube);

    // y != z and y != -z keeps the probe off both face diagonals, where the
    // shared edge would legitimately be reported by both triangles
    const auto head_on = bvh.raycast({{5, 0.1, 0.2}, {-1, 0, 0}});
    REQUIRE(head_on.has_value());
    CHECK(head_on->t == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(norm(head_on->normal - Vec3{1, 0, 0}) < 1e-12);

    // from inside: nearest positive exit
    const auto exit_hit = bvh.raycast({{0, 0.1, 0.2}, {1, 0, 0}});
    REQUIRE(exit_hit.has_value());
    CHECK(exit_hit->t == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(norm(exit_hit->normal - Vec3{-1, 0, 0}) < 1e-12);

    // t_max cuts the 4.5 hit off
    CHECK(!bvh.raycast({{5, 0.1, 0.2}, {-1, 0, 0}}, 4.0).has_value());

    // crossing ray reports both faces in order
    const auto all = bvh.raycast_all({{5, 0.1, 0.2}, {-1, 0, 0}});
    REQUIRE(all.size() == 2);
    CHECK(all[0].t == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(all[1].t == doctest::Approx(5.5).epsilon(1e-12));

    CHECK(!bvh.raycast({{5, 2, 0}, {-1, 0, 0}}).has_value());

    const auto wrapper = ray_mesh_intersect(cube, {{5, 0.1, 0.2}, {-1, 0, 0}});
    REQUIRE(wrapper.has_value());
    CHECK(wrapper->t == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("raycast from sphere center hits at the radius") {
    const TriangleMesh sph = oracle::icosphere(1.0, 4);
    const Bvh bvh(sph);
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const auto hit = bvh.raycast({{0, 0, 0}, random_unit(rng)});
        REQUIRE(hit.has_value());
        CHECK(hit->t > 0.99);
        CHECK(hit->t <= 1.0 + 1e-12);
    }
}

// ---------------------------------------------------------------------------
// sampling

TEST_CASE("farthest point sampling on a line picks the documented indices") {
    std::vector<Vec3> line;
    for (int i = 0; i < 10; ++i)
        line.push_back({static_cast<double>(i), 0.0, 0.0});
    const auto got = farthest_point_sample(line, 3, 0);
    CHECK(got == std::vector<std::size_t>{0, 9, 4});
}

TEST_CASE("farthest point sampling matches the exhaustive greedy oracle") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Vec3> pts;
        for (int i = 0; i < 40; ++i)
            pts.push_back({u(rng), u(rng), u(rng)});
        const std::size_t start = static_cast<std::size_t>(trial) % pts.size();
        CHECK(farthest_point_sample(pts, 12, start) ==
              oracle::greedy_fps(pts, 12, start));
        CHECK(farthest_point_sample(pts, pts.size(), start).size() ==
              pts.size());
    }
}

TEST_CASE("farthest point sampling edge cases") {
    std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}};
    CHECK(farthest_point_sample(pts, 0, 0).empty());
    CHECK(farthest_point_sample(pts, 1, 1) == std::vector<std::size_t>{1});
    CHECK_THROWS_AS(farthest_point_sample({}, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(farthest_point_sample(pts, 3, 0), std::invalid_argument);
    CHECK_THROWS_AS(farthest_point_sample(pts, 1, 5), std::invalid_argument);
}

TEST_CASE("estimated normals on a plane align with the viewpoint") {
    std::vector<Vec3> plane;
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
            plane.push_back({i * 0.01, j * 0.01, 0.0});
    const auto normals = estimate_normals(plane, 12, {0.07, 0.07, 5.0});
    REQUIRE(normals.size() == plane.size());
    for (const Vec3& n : normals) {
        CHECK(norm(n) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(dot(n, Vec3{0, 0, 1}) > 0.999);
    }
}

TEST_CASE("estimated normals on a sphere are radial") {
    const TriangleMesh sph = oracle::icosphere(1.0, 3);
    const std::vector<Vec3>& pts = sph.vertices;
    const Vec3 viewpoint{0, 0, 5};
    const auto normals = estimate_normals(pts, 8, viewpoint);
    const double cos_tol = std::cos(5.0 * kPi / 180.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(std::abs(dot(normals[i], normalized(pts[i]))) > cos_tol);
        CHECK(dot(viewpoint - pts[i], normals[i]) > -1e-9);
    }
}

TEST_CASE("estimated normals on a line are a deterministic orthogonal") {
    std::vector<Vec3> line;
    for (int i = 0; i < 20; ++i)
        line.push_back({i * 0.01, 0.0, 0.0});
    const auto a = estimate_normals(line, 6, {0, 0, 1});
    const auto b = estimate_normals(line, 6, {0, 0, 1});
    for (std::size_t i = 0; i < line.size(); ++i) {
        CHECK(norm(a[i]) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(a[i].x) < 1e-6); // orthogonal to the line direction
        CHECK(a[i] == b[i]);
    }
    CHECK_THROWS_AS(estimate_normals(line, 25, {0, 0, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_normals(line, 0, {0, 0, 1}),
                    std::invalid_argument);
}

TEST_CASE("knn and spacing helpers") {
    const std::vector<Vec3> pts{
        {0, 0, 0}, {1, 0, 0}, {3, 0, 0}, {0.5, 0, 0}, {10, 0, 0}};
    const auto nn = knn_indices(pts, 0, 3);
    CHECK(nn == std::vector<std::size_t>{3, 1, 2});

    std::vector<Vec3> grid;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            grid.push_back({static_cast<double>(i), static_cast<double>(j), 0});
    CHECK(mean_nn_spacing(grid) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(min_pairwise_distance(pts) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(mean_nn_spacing({{0, 0, 0}}), std::invalid_argument);
}

TEST_CASE("mesh surface sampling is area-uniform, on-surface, deterministic") {
    const TriangleMesh cube = oracle::unit_cube_centered();
    const PointCloud s = sample_mesh_surface(cube, 20000, std::uint64_t{7});
    REQUIRE(s.size() == 20000);
    REQUIRE(s.has_normals());

    std::array<std::size_t, 6> face_counts{};
    for (std::size_t i = 0; i < s.size(); ++i) {
        const Vec3& p = s.points[i];
        const double m =
            std::max({std::abs(p.x), std::abs(p.y), std::abs(p.z)});
        CHECK(m == doctest::Approx(0.5).epsilon(1e-12)); // on the boundary
        const Vec3& n = s.normals[i];
        CHECK(norm(n) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dot(n, p) > 0.0); // outward
        // bucket by dominant normal axis and sign
        int axis = std::abs(n.x) > 0.5 ? 0 : (std::abs(n.y) > 0.5 ? 1 : 2);
        const double comp = axis == 0 ? n.x : (axis == 1 ? n.y : n.z);
        face_counts[static_cast<std::size_t>(axis * 2 + (comp > 0 ? 0 : 1))]++;
    }
    for (std::size_t c : face_counts) {
        CHECK(c > 20000 / 6 - 300);
        CHECK(c < 20000 / 6 + 300);
    }

    const PointCloud again = sample_mesh_surface(cube, 20000, std::uint64_t{7});
    CHECK(again.points == s.points);
    const PointCloud other = sample_mesh_surface(cube, 20000, std::uint64_t{8});
    CHECK(other.points != s.points);

    CHECK_THROWS_AS(sample_mesh_surface(TriangleMesh{}, 10, std::uint64_t{1}),
                    std::invalid_argument);
}

// ---------------------------------------------------------------------------
// inside tests + voxelization

TEST_CASE("point_in_mesh on cube including a probe through a face diagonal") {
    const TriangleMesh cube = oracle::unit_cube_centered();
    const Bvh bvh(cube);
    CHECK(point_in_mesh(bvh, {0, 0, 0}));
    // the +x probe from here passes exactly through the diagonal edge of the
    // x = 0.5 face, forcing the ambiguous-hit redirect
    CHECK(point_in_mesh(bvh, {0.49, 0.0, 0.0}));
    CHECK(!point_in_mesh(bvh, {0.51, 0.0, 0.0}));
    CHECK(!point_in_mesh(bvh, {2, 2, 2}));
    CHECK(point_in_mesh(cube, {0.2, -0.3, 0.4}));
}

TEST_CASE("point_in_mesh on a sphere") {
    const TriangleMesh sph = oracle::icosphere(1.0, 3);
    const Bvh bvh(sph);
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec3 dir = random_unit(rng);
        CHECK(point_in_mesh(bvh, dir * 0.9));
        CHECK(!point_in_mesh(bvh, dir * 1.1));
    }
}

TEST_CASE("grid spec covering and indexing") {
    const Aabb box{{0, 0, 0}, {1, 2, 4}};
    const GridSpec g = GridSpec::covering(box, 8);
    CHECK(g.nx == 8);
    CHECK(g.ny == 8);
    CHECK(g.nz == 8);
    CHECK(g.origin == Vec3{0, 0, 0});
    CHECK(g.cell.x == doctest::Approx(0.125));
    CHECK(g.cell.y == doctest::Approx(0.25));
    CHECK(g.cell.z == doctest::Approx(0.5));
    CHECK(g.cell_count() == 512);
    CHECK(g.index(1, 2, 3) == (3u * 8 + 2) * 8 + 1);
    const Vec3 c = g.cell_center(0, 0, 0);
    CHECK(c == Vec3{0.0625, 0.125, 0.25});
    CHECK(g == GridSpec::covering(box, 8));
}

TEST_CASE("voxelized unit cube fills its aligned grid exactly") {
    const TriangleMesh cube = oracle::box_mesh({0, 0, 0}, {1, 1, 1});
    const GridSpec spec = GridSpec::covering(Aabb{{0, 0, 0}, {1, 1, 1}}, 10);
    const VoxelGrid grid = voxelize_mesh(cube, spec);
    CHECK(grid.occupied.size() == 1000);
    CHECK(grid.count_occupied() == 1000);
    CHECK(grid.cell_volume() == doctest::Approx(0.001).epsilon(1e-12));
}

TEST_CASE("voxelized sphere volume approaches the analytic value") {
    const TriangleMesh sph = oracle::icosphere(0.5, 3);
    const GridSpec spec =
        GridSpec::covering(Aabb{{-0.6, -0.6, -0.6}, {0.6, 0.6, 0.6}}, 32);
    const Bvh bvh(sph);
    const VoxelGrid grid = voxelize_mesh(bvh, spec);
    const double vol =
        static_cast<double>(grid.count_occupied()) * grid.cell_volume();
    CHECK(vol == doctest::Approx(4.0 / 3.0 * kPi * 0.125).epsilon(0.10));

    // both overloads agree cell for cell
    const VoxelGrid direct = voxelize_mesh(sph, spec);
    CHECK(direct.occupied == grid.occupied);
}

TEST_CASE("voxelizing a grid away from the mesh yields no occupancy") {
    const TriangleMesh cube = oracle::unit_cube_centered();
    GridSpec spec = GridSpec::covering(Aabb{{5, 5, 5}, {6, 6, 6}}, 4);
    const VoxelGrid grid = voxelize_mesh(cube, spec);
    CHECK(grid.count_occupied() == 0);
}

// ---------------------------------------------------------------------------
// marching cubes

namespace {

FieldGrid sphere_sdf_grid(std::uint32_t n, double radius, double sign = 1.0) {
    FieldGrid grid;
    grid.origin = {-1, -1, -1};
    grid.nx = grid.ny = grid.nz = n;
    const double step = 2.0 / (n - 1);
    grid.spacing = {step, step, step};
    grid.values.resize(static_cast<std::size_t>(n) * n * n);
    for (std::uint32_t k = 0; k < n; ++k)
        for (std::uint32_t j = 0; j < n; ++j)
            for (std::uint32_t i = 0; i < n; ++i)
                grid.values[grid.index(i, j, k)] =
                    sign * (norm(grid.point(i, j, k)) - radius);
    return grid;
}

} // namespace

TEST_CASE("marching cubes reproduces a sphere at 64^3") {
    const FieldGrid grid = sphere_sdf_grid(64, 0.5);
    grid.validate();
    const TriangleMesh mesh = marching_cubes(grid);
    REQUIRE(!mesh.empty());
    CHECK(mesh_is_watertight(mesh));
    CHECK(mesh_area(mesh) == doctest::Approx(4.0 * kPi * 0.25).epsilon(0.02));
    // outward winding for a signed distance field: positive enclosed volume
    const double vol = mesh_signed_volume(mesh);
    CHECK(vol > 0.0);
    CHECK(vol == doctest::Approx(4.0 / 3.0 * kPi * 0.125).epsilon(0.02));
    // vertices sit on the level set
    for (const Vec3& v : mesh.vertices)
        CHECK(std::abs(norm(v) - 0.5) < 0.05);
}

TEST_CASE("marching cubes sign flip mirrors the orientation only") {
    const TriangleMesh outward = marching_cubes(sphere_sdf_grid(24, 0.5));
    const TriangleMesh inward =
        marching_cubes(sphere_sdf_grid(24, 0.5, -1.0));
    REQUIRE(!outward.empty());
    CHECK(outward.vertex_count() == inward.vertex_count());
    CHECK(outward.triangle_count() == inward.triangle_count());
    CHECK(mesh_area(outward) ==
          doctest::Approx(mesh_area(inward)).epsilon(1e-12));
    CHECK(mesh_signed_volume(inward) ==
          doctest::Approx(-mesh_signed_volume(outward)).epsilon(1e-10));
}

TEST_CASE("marching cubes respects a nonzero iso level") {
    const TriangleMesh mesh = marching_cubes(sphere_sdf_grid(48, 0.5), 0.1);
    CHECK(mesh_area(mesh) == doctest::Approx(4.0 * kPi * 0.36).epsilon(0.02));
}

TEST_CASE("marching cubes of a non-crossing field is empty") {
    FieldGrid grid = sphere_sdf_grid(8, 0.5);
    for (double& v : grid.values)
        v = std::abs(v) + 1.0;
    CHECK(marching_cubes(grid).empty());

    FieldGrid tiny;
    tiny.nx = 1;
    tiny.ny = tiny.nz = 2;
    tiny.spacing = {1, 1, 1};
    tiny.values.resize(4);
    CHECK_THROWS_AS(tiny.validate(), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// clouds

TEST_CASE("cloud append, centroid, bounds, transform") {
    PointCloud a;
    a.points = {{0, 0, 0}, {1, 0, 0}};
    a.normals = {{0, 0, 1}, {0, 0, 1}};
    PointCloud b;
    b.points = {{0, 3, 0}};
    b.normals = {{1, 0, 0}};
    a.append(b);
    REQUIRE(a.size() == 3);
    CHECK(norm(a.centroid() - Vec3{1.0 / 3.0, 1.0, 0.0}) < 1e-12);
    CHECK(a.bounds().hi == Vec3{1, 3, 0});

    PointCloud bare;
    bare.points = {{0, 0, 0}};
    CHECK_THROWS_AS(a.append(bare), std::invalid_argument);

    const RigidTransform r = axis_angle({0, 0, 1}, kPi / 2.0);
    const PointCloud moved = a.transformed(r);
    CHECK(norm(moved.points[1] - Vec3{0, 1, 0}) < 1e-12);
    CHECK(norm(moved.normals[2] - Vec3{0, 1, 0}) < 1e-12);
    CHECK(norm(moved.normals[0] - Vec3{0, 0, 1}) < 1e-12);

    CHECK_THROWS_AS(PointCloud{}.centroid(), std::invalid_argument);

    const CloudSoa soa(a.points);
    REQUIRE(soa.size() == 3);
    CHECK(soa.xs[1] == 1.0);
    CHECK(soa.ys[2] == 3.0);
}
