#include "tactoshape/geom/linalg3.hpp"

#include <algorithm>
#include <cmath>

namespace tact::geom {

Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
    Mat3 c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += a[static_cast<std::size_t>(i * 3 + k)] *
                     b[static_cast<std::size_t>(k * 3 + j)];
            c[static_cast<std::size_t>(i * 3 + j)] = s;
        }
    return c;
}

Mat3 mat3_transpose(const Mat3& a) {
    return {a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]};
}

double mat3_det(const Mat3& a) {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) -
           a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Vec3 mat3_apply(const Mat3& a, const Vec3& v) {
    return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
            a[3] * v.x + a[4] * v.y + a[5] * v.z,
            a[6] * v.x + a[7] * v.y + a[8] * v.z};
}

SymEigen3 sym_eigen3(const Mat3& m) {
    // Cyclic Jacobi. a holds the working matrix, v the accumulated rotations
    // (columns become eigenvectors).
    Mat3 a = m;
    Mat3 v{1, 0, 0, 0, 1, 0, 0, 0, 1};
    constexpr int kMaxSweeps = 32;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        const double off = a[1] * a[1] + a[2] * a[2] + a[5] * a[5];
        if (off < 1e-30)
            break;
        static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (const auto& pq : pairs) {
            const int p = pq[0];
            const int q = pq[1];
            const double apq = a[static_cast<std::size_t>(p * 3 + q)];
            if (std::abs(apq) < 1e-300)
                continue;
            const double app = a[static_cast<std::size_t>(p * 3 + p)];
            const double aqq = a[static_cast<std::size_t>(q * 3 + q)];
            const double zeta = (aqq - app) / (2.0 * apq);
            const double t =
                (zeta >= 0.0 ? 1.0 : -1.0) /
                (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = c * t;
            // A <- J^T A J with the Givens rotation J in plane (p, q).
            for (int k = 0; k < 3; ++k) {
                const double akp = a[static_cast<std::size_t>(k * 3 + p)];
                const double akq = a[static_cast<std::size_t>(k * 3 + q)];
                a[static_cast<std::size_t>(k * 3 + p)] = c * akp - s * akq;
                a[static_cast<std::size_t>(k * 3 + q)] = s * akp + c * akq;
            }
            for (int k = 0; k < 3; ++k) {
                const double apk = a[static_cast<std::size_t>(p * 3 + k)];
                const double aqk = a[static_cast<std::size_t>(q * 3 + k)];
                a[static_cast<std::size_t>(p * 3 + k)] = c * apk - s * aqk;
                a[static_cast<std::size_t>(q * 3 + k)] = s * apk + c * aqk;
            }
            for (int k = 0; k < 3; ++k) {
                const double vkp = v[static_cast<std::size_t>(k * 3 + p)];
                const double vkq = v[static_cast<std::size_t>(k * 3 + q)];
                v[static_cast<std::size_t>(k * 3 + p)] = c * vkp - s * vkq;
                v[static_cast<std::size_t>(k * 3 + q)] = s * vkp + c * vkq;
            }
        }
    }
    SymEigen3 out;
    std::array<int, 3> order = {0, 1, 2};
    const std::array<double, 3> diag = {a[0], a[4], a[8]};
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return diag[static_cast<std::size_t>(i)] <
                                          diag[static_cast<std::size_t>(j)]; });
    for (int k = 0; k < 3; ++k) {
        const int src = order[static_cast<std::size_t>(k)];
        out.values[static_cast<std::size_t>(k)] =
            diag[static_cast<std::size_t>(src)];
        out.vectors[static_cast<std::size_t>(k)] = {
            v[static_cast<std::size_t>(0 * 3 + src)],
            v[static_cast<std::size_t>(1 * 3 + src)],
            v[static_cast<std::size_t>(2 * 3 + src)]};
    }
    return out;
}

Svd3 svd3(const Mat3& a) {
    // One-sided Jacobi: orthogonalize the columns of B = A V by accumulating
    // right rotations into V; then sigma_i = |b_i| and u_i = b_i / sigma_i.
    Mat3 b = a;
    Mat3 v{1, 0, 0, 0, 1, 0, 0, 0, 1};
    auto col = [](Mat3& m, int j) {
        return Vec3{m[static_cast<std::size_t>(j)],
                    m[static_cast<std::size_t>(3 + j)],
                    m[static_cast<std::size_t>(6 + j)]};
    };
    auto set_col = [](Mat3& m, int j, const Vec3& c) {
        m[static_cast<std::size_t>(j)] = c.x;
        m[static_cast<std::size_t>(3 + j)] = c.y;
        m[static_cast<std::size_t>(6 + j)] = c.z;
    };
    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (const auto& pq : pairs) {
            const int p = pq[0];
            const int q = pq[1];
            const Vec3 bp = col(b, p);
            const Vec3 bq = col(b, q);
            const double alpha = dot(bp, bp);
            const double beta = dot(bq, bq);
            const double gamma = dot(bp, bq);
            if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta) ||
                gamma == 0.0)
                continue;
            rotated = true;
            const double zeta = (beta - alpha) / (2.0 * gamma);
            const double t =
                (zeta >= 0.0 ? 1.0 : -1.0) /
                (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = c * t;
            set_col(b, p, bp * c - bq * s);
            set_col(b, q, bp * s + bq * c);
            const Vec3 vp = col(v, p);
            const Vec3 vq = col(v, q);
            set_col(v, p, vp * c - vq * s);
            set_col(v, q, vp * s + vq * c);
        }
        if (!rotated)
            break;
    }
    // Column norms, sorted descending.
    std::array<double, 3> sig{};
    std::array<Vec3, 3> bcols;
    std::array<Vec3, 3> vcols;
    for (int j = 0; j < 3; ++j) {
        bcols[static_cast<std::size_t>(j)] = col(b, j);
        vcols[static_cast<std::size_t>(j)] = col(v, j);
        sig[static_cast<std::size_t>(j)] =
            norm(bcols[static_cast<std::size_t>(j)]);
    }
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return sig[static_cast<std::size_t>(i)] >
               sig[static_cast<std::size_t>(j)];
    });
    Svd3 out;
    std::array<Vec3, 3> ucols;
    const double scale = std::max({sig[0], sig[1], sig[2], 1e-300});
    auto set_out_v = [&out](int j, const Vec3& c) {
        out.v[static_cast<std::size_t>(j)] = c.x;
        out.v[static_cast<std::size_t>(3 + j)] = c.y;
        out.v[static_cast<std::size_t>(6 + j)] = c.z;
    };
    for (int k = 0; k < 3; ++k) {
        const int src = order[static_cast<std::size_t>(k)];
        out.sigma[static_cast<std::size_t>(k)] =
            sig[static_cast<std::size_t>(src)];
        set_out_v(k, vcols[static_cast<std::size_t>(src)]);
        if (sig[static_cast<std::size_t>(src)] > 1e-12 * scale) {
            ucols[static_cast<std::size_t>(k)] =
                bcols[static_cast<std::size_t>(src)] /
                sig[static_cast<std::size_t>(src)];
        } else {
            ucols[static_cast<std::size_t>(k)] = {0, 0, 0}; // completed below
        }
    }
    // Complete U to an orthonormal basis where columns vanished.
    for (int k = 0; k < 3; ++k) {
        Vec3& u = ucols[static_cast<std::size_t>(k)];
        if (norm(u) > 0.5)
            continue;
        if (k == 2) {
            u = cross(ucols[0], ucols[1]);
            if (norm(u) < 1e-12)
                u = any_orthogonal(ucols[0]);
            else
                u = normalized(u);
        } else if (k == 1) {
            u = any_orthogonal(ucols[0]);
        } else {
            u = {1, 0, 0};
        }
        // Re-orthogonalize against earlier columns for safety.
        for (int j = 0; j < k; ++j)
            u -= ucols[static_cast<std::size_t>(j)] *
                 dot(u, ucols[static_cast<std::size_t>(j)]);
        u = normalized_or(u, any_orthogonal(ucols[0]));
    }
    for (int k = 0; k < 3; ++k) {
        out.u[static_cast<std::size_t>(k)] = ucols[static_cast<std::size_t>(k)].x;
        out.u[static_cast<std::size_t>(3 + k)] =
            ucols[static_cast<std::size_t>(k)].y;
        out.u[static_cast<std::size_t>(6 + k)] =
            ucols[static_cast<std::size_t>(k)].z;
    }
    return out;
}

} // namespace tact::geom
