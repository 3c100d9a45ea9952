#pragma once

#include "tactoshape/geom/vec3.hpp"

#include <array>

namespace tact::geom {

// 3x3 matrix, row-major.
using Mat3 = std::array<double, 9>;

Mat3 mat3_mul(const Mat3& a, const Mat3& b);
Mat3 mat3_transpose(const Mat3& a);
double mat3_det(const Mat3& a);
Vec3 mat3_apply(const Mat3& a, const Vec3& v);

struct SymEigen3 {
    // Ascending eigenvalues with matching unit eigenvectors (columns).
    std::array<double, 3> values;
    std::array<Vec3, 3> vectors;
};

// Cyclic Jacobi on a symmetric matrix. Deterministic for identical input.
SymEigen3 sym_eigen3(const Mat3& m);

struct Svd3 {
    Mat3 u;
    std::array<double, 3> sigma; // descending, non-negative
    Mat3 v;                      // a = u * diag(sigma) * v^T
};

// One-sided Jacobi SVD of a general 3x3 matrix.
Svd3 svd3(const Mat3& a);

} // namespace tact::geom
