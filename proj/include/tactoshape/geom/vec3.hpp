#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace tact::geom {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](std::size_t i) const {
        return i == 0 ? x : (i == 1 ? y : z);
    }
    double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const {
        return {x + o.x, y + o.y, z + o.z};
    }
    constexpr Vec3 operator-(const Vec3& o) const {
        return {x - o.x, y - o.y, z - o.z};
    }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }

    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    Vec3& operator-=(const Vec3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    Vec3& operator*=(double s) {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }

    constexpr bool operator==(const Vec3& o) const {
        return x == o.x && y == o.y && z == o.z;
    }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
            a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

constexpr double norm_sq(const Vec3& v) { return dot(v, v); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 0.0))
        throw std::invalid_argument("cannot normalize a zero-length vector");
    return v / n;
}

// Normalize, falling back to `fallback` for (near-)zero input.
inline Vec3 normalized_or(const Vec3& v, const Vec3& fallback,
                          double eps = 1e-14) {
    const double n = norm(v);
    return n > eps ? v / n : fallback;
}

inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Any unit vector orthogonal to v; deterministic in v.
inline Vec3 any_orthogonal(const Vec3& v) {
    const Vec3 axis = std::abs(v.x) <= std::abs(v.y)
                          ? (std::abs(v.x) <= std::abs(v.z) ? Vec3{1, 0, 0}
                                                            : Vec3{0, 0, 1})
                          : (std::abs(v.y) <= std::abs(v.z) ? Vec3{0, 1, 0}
                                                            : Vec3{0, 0, 1});
    return normalized(cross(v, axis));
}

struct Aabb {
    Vec3 lo{0, 0, 0};
    Vec3 hi{0, 0, 0};

    static Aabb empty() {
        constexpr double inf = 1e300;
        return {{inf, inf, inf}, {-inf, -inf, -inf}};
    }

    bool valid() const { return lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z; }

    void grow(const Vec3& p) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        lo.z = std::min(lo.z, p.z);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
        hi.z = std::max(hi.z, p.z);
    }

    void grow(const Aabb& b) {
        grow(b.lo);
        grow(b.hi);
    }

    Vec3 center() const { return (lo + hi) * 0.5; }
    Vec3 extent() const { return hi - lo; }

    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
               p.z >= lo.z && p.z <= hi.z;
    }

    // Inflate by a fraction of each axis extent, about the center.
    Aabb inflated(double frac) const {
        const Vec3 c = center();
        const Vec3 h = extent() * (0.5 * (1.0 + frac));
        return {c - h, c + h};
    }

    // Ensure every axis spans at least min_extent, growing about the center.
    Aabb with_min_extent(double min_extent) const {
        Aabb r = *this;
        const Vec3 c = center();
        for (std::size_t a = 0; a < 3; ++a) {
            if (r.hi[a] - r.lo[a] < min_extent) {
                r.lo[a] = c[a] - 0.5 * min_extent;
                r.hi[a] = c[a] + 0.5 * min_extent;
            }
        }
        return r;
    }
};

} // namespace tact::geom
