#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace bipick {

using cplx = std::complex<double>;

/// Vector in C^3.
struct CVec3 {
    std::array<cplx, 3> e{};

    cplx& operator[](int i) { return e[static_cast<size_t>(i)]; }
    const cplx& operator[](int i) const { return e[static_cast<size_t>(i)]; }

    CVec3 operator+(const CVec3& o) const { return {{e[0] + o.e[0], e[1] + o.e[1], e[2] + o.e[2]}}; }
    CVec3 operator-(const CVec3& o) const { return {{e[0] - o.e[0], e[1] - o.e[1], e[2] - o.e[2]}}; }
    CVec3 operator*(cplx s) const { return {{e[0] * s, e[1] * s, e[2] * s}}; }

    double norm() const {
        return std::sqrt(std::norm(e[0]) + std::norm(e[1]) + std::norm(e[2]));
    }
};

/// <u, v> = sum_i u_i conj(v_i)
inline cplx dot(const CVec3& u, const CVec3& v) {
    return u.e[0] * std::conj(v.e[0]) + u.e[1] * std::conj(v.e[1]) + u.e[2] * std::conj(v.e[2]);
}

/// General complex 3x3 matrix, row major.
struct Mat3 {
    std::array<cplx, 9> m{};

    cplx& operator()(int i, int j) { return m[static_cast<size_t>(3 * i + j)]; }
    const cplx& operator()(int i, int j) const { return m[static_cast<size_t>(3 * i + j)]; }

    static Mat3 identity() {
        Mat3 r;
        r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
        return r;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (size_t k = 0; k < 9; ++k) r.m[k] = m[k] + o.m[k];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (size_t k = 0; k < 9; ++k) r.m[k] = m[k] - o.m[k];
        return r;
    }
    Mat3 operator*(cplx s) const {
        Mat3 r;
        for (size_t k = 0; k < 9; ++k) r.m[k] = m[k] * s;
        return r;
    }

    CVec3 operator*(const CVec3& v) const {
        CVec3 r;
        for (int i = 0; i < 3; ++i)
            r[i] = (*this)(i, 0) * v[0] + (*this)(i, 1) * v[1] + (*this)(i, 2) * v[2];
        return r;
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                cplx s = 0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }

    Mat3 adjoint() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = std::conj((*this)(j, i));
        return r;
    }

    double frobenius() const {
        double s = 0;
        for (const auto& z : m) s += std::norm(z);
        return std::sqrt(s);
    }

    CVec3 col(int j) const { return {{(*this)(0, j), (*this)(1, j), (*this)(2, j)}}; }
    CVec3 row(int i) const { return {{(*this)(i, 0), (*this)(i, 1), (*this)(i, 2)}}; }

    void set_col(int j, const CVec3& v) {
        for (int i = 0; i < 3; ++i) (*this)(i, j) = v[i];
    }
};

/// Cofactor-expansion determinant.
inline cplx det3(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

/// (u (x) u)_ij = u_i conj(u_j); rank-one positive semidefinite.
inline Mat3 outer(const CVec3& u) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = u[i] * std::conj(u[j]);
    return r;
}

/// (u (x) v)_ij = u_i conj(v_j).
inline Mat3 outer(const CVec3& u, const CVec3& v) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = u[i] * std::conj(v[j]);
    return r;
}

}  // namespace bipick
