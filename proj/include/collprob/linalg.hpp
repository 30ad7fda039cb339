#pragma once

/// Small fixed-dimension symmetric linear algebra and the standard normal CDF.
/// Everything here is closed-form or a short fixed-size iteration; no general
/// N-dimensional machinery.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "collprob/errors.hpp"

namespace collprob {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
    /// z-component of the 3D cross product of two planar vectors.
    constexpr double cross(const Vec2& r) const { return x * r.y - y * r.x; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& r) const { return {x + r.x, y + r.y, z + r.z}; }
    constexpr Vec3 operator-(const Vec3& r) const { return {x - r.x, y - r.y, z - r.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// 2x2 real symmetric matrix, stored as its upper triangle.
struct SymMat2 {
    double m00 = 0.0;
    double m01 = 0.0;
    double m11 = 0.0;

    constexpr SymMat2() = default;
    constexpr SymMat2(double a00, double a01, double a11) : m00(a00), m01(a01), m11(a11) {}

    static constexpr SymMat2 identity() { return {1.0, 0.0, 1.0}; }

    constexpr Vec2 mul(const Vec2& v) const {
        return {m00 * v.x + m01 * v.y, m01 * v.x + m11 * v.y};
    }
};

/// 3x3 real symmetric matrix, stored as its upper triangle row-major:
/// (m00, m01, m02, m11, m12, m22).
struct SymMat3 {
    double m00 = 0.0;
    double m01 = 0.0;
    double m02 = 0.0;
    double m11 = 0.0;
    double m12 = 0.0;
    double m22 = 0.0;

    constexpr SymMat3() = default;
    constexpr SymMat3(double a00, double a01, double a02, double a11, double a12, double a22)
        : m00(a00), m01(a01), m02(a02), m11(a11), m12(a12), m22(a22) {}

    static constexpr SymMat3 zero() { return {}; }
    static constexpr SymMat3 identity() { return {1.0, 0.0, 0.0, 1.0, 0.0, 1.0}; }
    static constexpr SymMat3 diag(double a, double b, double c) {
        return {a, 0.0, 0.0, b, 0.0, c};
    }
    static constexpr SymMat3 from_upper_triangle(const std::array<double, 6>& u) {
        return {u[0], u[1], u[2], u[3], u[4], u[5]};
    }

    constexpr std::array<double, 6> upper_triangle() const {
        return {m00, m01, m02, m11, m12, m22};
    }

    constexpr Vec3 mul(const Vec3& v) const {
        return {m00 * v.x + m01 * v.y + m02 * v.z,
                m01 * v.x + m11 * v.y + m12 * v.z,
                m02 * v.x + m12 * v.y + m22 * v.z};
    }

    constexpr SymMat3 operator+(const SymMat3& r) const {
        return {m00 + r.m00, m01 + r.m01, m02 + r.m02, m11 + r.m11, m12 + r.m12, m22 + r.m22};
    }

    constexpr SymMat3 operator*(double s) const {
        return {m00 * s, m01 * s, m02 * s, m11 * s, m12 * s, m22 * s};
    }

    double frobenius_norm() const {
        return std::sqrt(m00 * m00 + m11 * m11 + m22 * m22 +
                         2.0 * (m01 * m01 + m02 * m02 + m12 * m12));
    }

    constexpr bool is_zero() const {
        return m00 == 0.0 && m01 == 0.0 && m02 == 0.0 && m11 == 0.0 && m12 == 0.0 && m22 == 0.0;
    }
};

/// Upper-left 2x2 block (the position block of a pose covariance).
constexpr SymMat2 position_block(const SymMat3& m) { return {m.m00, m.m01, m.m11}; }

/// Eigendecomposition of a 2x2 symmetric matrix. Columns v1, v2 are
/// orthonormal; lambda1 >= lambda2.
struct EigenDecomp2 {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Vec2 v1{1.0, 0.0};
    Vec2 v2{0.0, 1.0};
};

/// Eigendecomposition of a 3x3 symmetric matrix, eigenvalues descending.
/// vectors[i] is the unit eigenvector for eigenvalues[i].
struct EigenDecomp3 {
    std::array<double, 3> eigenvalues{};
    std::array<Vec3, 3> vectors{};
};

/// Closed-form eigendecomposition of a 2x2 symmetric matrix.
inline EigenDecomp2 eig_sym2(const SymMat2& m) {
    EigenDecomp2 out;
    const double a = m.m00, b = m.m01, c = m.m11;
    if (b == 0.0) {
        if (a >= c) {
            out.lambda1 = a;
            out.lambda2 = c;
            out.v1 = {1.0, 0.0};
            out.v2 = {0.0, 1.0};
        } else {
            out.lambda1 = c;
            out.lambda2 = a;
            out.v1 = {0.0, 1.0};
            out.v2 = {-1.0, 0.0};
        }
        return out;
    }
    const double half_tr = 0.5 * (a + c);
    const double disc = std::hypot(0.5 * (a - c), b);
    out.lambda1 = half_tr + disc;
    out.lambda2 = half_tr - disc;
    // Pick the better-conditioned eigenvector expression.
    Vec2 u{b, out.lambda1 - a};
    Vec2 w{out.lambda1 - c, b};
    Vec2 v = (u.dot(u) >= w.dot(w)) ? u : w;
    const double n = v.norm();
    out.v1 = {v.x / n, v.y / n};
    out.v2 = {-out.v1.y, out.v1.x};
    return out;
}

namespace detail {

/// Cyclic Jacobi rotations for 3x3 symmetric matrices. Off-diagonal tolerance
/// 1e-13 (relative to the Frobenius norm), at most 50 sweeps.
inline void jacobi3(const SymMat3& m, double a[3][3], double v[3][3]) {
    a[0][0] = m.m00; a[0][1] = m.m01; a[0][2] = m.m02;
    a[1][0] = m.m01; a[1][1] = m.m11; a[1][2] = m.m12;
    a[2][0] = m.m02; a[2][1] = m.m12; a[2][2] = m.m22;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v[i][j] = (i == j) ? 1.0 : 0.0;

    const double tol = 1e-13 * std::max(1.0, m.frobenius_norm());
    constexpr int kMaxSweeps = 50;
    constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        const double off = std::sqrt(a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]);
        if (off <= tol) break;
        for (const auto& pq : pairs) {
            const int p = pq[0], q = pq[1];
            if (a[p][q] == 0.0) continue;
            const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            const double cs = 1.0 / std::sqrt(t * t + 1.0);
            const double sn = t * cs;
            for (int k = 0; k < 3; ++k) {
                const double akp = a[k][p], akq = a[k][q];
                a[k][p] = cs * akp - sn * akq;
                a[k][q] = sn * akp + cs * akq;
            }
            for (int k = 0; k < 3; ++k) {
                const double apk = a[p][k], aqk = a[q][k];
                a[p][k] = cs * apk - sn * aqk;
                a[q][k] = sn * apk + cs * aqk;
            }
            a[p][q] = a[q][p] = 0.0;
            for (int k = 0; k < 3; ++k) {
                const double vkp = v[k][p], vkq = v[k][q];
                v[k][p] = cs * vkp - sn * vkq;
                v[k][q] = sn * vkp + cs * vkq;
            }
        }
    }
}

/// Assemble V diag(d) V^T (columns of v are the eigenvectors).
inline SymMat3 compose_sym3(const double v[3][3], const double d[3]) {
    SymMat3 out;
    double full[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) full[i][j] += v[i][k] * d[k] * v[j][k];
    out.m00 = full[0][0];
    out.m11 = full[1][1];
    out.m22 = full[2][2];
    out.m01 = 0.5 * (full[0][1] + full[1][0]);
    out.m02 = 0.5 * (full[0][2] + full[2][0]);
    out.m12 = 0.5 * (full[1][2] + full[2][1]);
    return out;
}

}  // namespace detail

/// Jacobi eigendecomposition of a 3x3 symmetric matrix, eigenvalues sorted
/// descending.
inline EigenDecomp3 eig_sym3(const SymMat3& m) {
    double a[3][3], v[3][3];
    detail::jacobi3(m, a, v);
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });
    EigenDecomp3 out;
    for (int r = 0; r < 3; ++r) {
        const int c = idx[r];
        out.eigenvalues[r] = a[c][c];
        out.vectors[r] = {v[0][c], v[1][c], v[2][c]};
    }
    return out;
}

/// Principal (symmetric PSD) square root: S with S*S = m.
/// Eigenvalues in [-1e-9, 0) are clamped to zero; below -1e-9 throws NonPsdError.
inline SymMat3 sqrt_sym3(const SymMat3& m) {
    if (m.is_zero()) return SymMat3::zero();
    double a[3][3], v[3][3];
    detail::jacobi3(m, a, v);
    double d[3];
    for (int i = 0; i < 3; ++i) {
        double lam = a[i][i];
        if (lam < -1e-9) throw NonPsdError("sqrt_sym3: eigenvalue below -1e-9");
        if (lam < 0.0) lam = 0.0;
        d[i] = std::sqrt(lam);
    }
    return detail::compose_sym3(v, d);
}

/// Inverse of a symmetric 3x3 via the adjugate. Throws SingularError when
/// |det| <= 1e-15.
inline SymMat3 inv_sym3(const SymMat3& m) {
    const double c00 = m.m11 * m.m22 - m.m12 * m.m12;
    const double c01 = m.m02 * m.m12 - m.m01 * m.m22;
    const double c02 = m.m01 * m.m12 - m.m02 * m.m11;
    const double det = m.m00 * c00 + m.m01 * c01 + m.m02 * c02;
    if (std::abs(det) <= 1e-15) throw SingularError("inv_sym3: determinant below threshold");
    const double c11 = m.m00 * m.m22 - m.m02 * m.m02;
    const double c12 = m.m01 * m.m02 - m.m00 * m.m12;
    const double c22 = m.m00 * m.m11 - m.m01 * m.m01;
    return {c00 / det, c01 / det, c02 / det, c11 / det, c12 / det, c22 / det};
}

/// Standard normal CDF. Accurate to well under 1e-12 over [-8, 8].
inline double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z * M_SQRT1_2);
}

}  // namespace collprob
