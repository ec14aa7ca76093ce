#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bipick/errors.hpp"
#include "bipick/types.hpp"

namespace bipick {

/// Hermitian 3x3 matrix. Construction checks entrywise hermiticity and then
/// stores the symmetrized matrix, so downstream arithmetic cannot drift.
class HermMat3 {
  public:
    HermMat3() = default;

    explicit HermMat3(const Mat3& m, double tol = 1e-14) {
        double scale = std::max(1.0, m.frobenius());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (std::abs(m(i, j) - std::conj(m(j, i))) > tol * scale)
                    throw SolverError(ErrorKind::NotHermitian, "HermMat3",
                                      "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                          ") breaks hermiticity");
        m_ = symmetrize(m);
    }

    const Mat3& mat() const { return m_; }
    const cplx& operator()(int i, int j) const { return m_(i, j); }

    HermMat3 operator+(const HermMat3& o) const { return unchecked(m_ + o.m_); }
    HermMat3 operator-(const HermMat3& o) const { return unchecked(m_ - o.m_); }
    HermMat3 operator*(double s) const { return unchecked(m_ * cplx(s)); }

    static HermMat3 identity() { return unchecked(Mat3::identity()); }
    static HermMat3 zero() { return unchecked(Mat3{}); }

    /// Bypasses the hermiticity check; for results that are Hermitian by
    /// construction (sums, Schur products, spectral recompositions).
    static HermMat3 unchecked(const Mat3& m) {
        HermMat3 h;
        h.m_ = symmetrize(m);
        return h;
    }

  private:
    static Mat3 symmetrize(const Mat3& m) {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
        return r;
    }

    Mat3 m_;
};

/// Entrywise (Schur) product; Hermitian whenever both factors are.
inline HermMat3 schur_product(const HermMat3& x, const HermMat3& y) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = x(i, j) * y(i, j);
    return HermMat3::unchecked(r);
}

struct Eig3 {
    std::array<double, 3> values{};  ///< descending
    Mat3 vectors;                    ///< orthonormal eigenvectors as columns, matching order
};

/// Cyclic Jacobi eigendecomposition for Hermitian 3x3 matrices.
inline Eig3 herm_eig3(const HermMat3& h) {
    Mat3 a = h.mat();
    Mat3 v = Mat3::identity();
    const double scale = std::max(a.frobenius(), 1e-300);

    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = std::sqrt(std::norm(a(0, 1)) + std::norm(a(0, 2)) + std::norm(a(1, 2)));
        if (off <= 1e-16 * scale) break;
        for (int p = 0; p < 3; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                const cplx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-18 * scale) continue;
                const cplx phase = apq / mag;  // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * mag);
                // small-magnitude root of t^2 - 2 tau t - 1 = 0 for this
                // rotation convention
                const double t = (tau >= 0 ? -1.0 : 1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J: columns p,q -> (c, s e^{-i phi}) and (-s, c e^{-i phi})
                Mat3 j = Mat3::identity();
                j(p, p) = c;
                j(p, q) = -s;
                j(q, p) = s * std::conj(phase);
                j(q, q) = c * std::conj(phase);
                a = j.adjoint() * a * j;
                v = v * j;
            }
        }
    }

    Eig3 out;
    std::array<int, 3> idx = {0, 1, 2};
    std::array<double, 3> vals = {a(0, 0).real(), a(1, 1).real(), a(2, 2).real()};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return vals[i] > vals[j]; });
    for (int k = 0; k < 3; ++k) {
        out.values[static_cast<size_t>(k)] = vals[static_cast<size_t>(idx[static_cast<size_t>(k)])];
        out.vectors.set_col(k, v.col(idx[static_cast<size_t>(k)]));
    }
    return out;
}

inline double min_eigenvalue(const HermMat3& h) { return herm_eig3(h).values[2]; }

inline bool is_psd(const HermMat3& h, double tol) { return min_eigenvalue(h) >= -tol; }

/// Nearest positive semidefinite matrix in Frobenius norm: clip negative
/// eigenvalues at zero, keep eigenvectors.
inline HermMat3 psd_project(const HermMat3& h) {
    Eig3 eig = herm_eig3(h);
    Mat3 r;
    for (int k = 0; k < 3; ++k) {
        const double lam = eig.values[static_cast<size_t>(k)];
        if (lam <= 0.0) continue;
        const CVec3 vk = eig.vectors.col(k);
        r = r + outer(vk) * cplx(lam);
    }
    return HermMat3::unchecked(r);
}

/// Builds a unitary U with U x_j = y_j for j = 0,1,2, given matching
/// Grammians. When span{x_j} is proper, both orthogonal complements are
/// completed with arbitrary orthonormal bases paired in order.
inline Mat3 unitary_complete(const std::array<CVec3, 3>& x, const std::array<CVec3, 3>& y,
                             double gram_tol = 1e-9, double rank_tol = 1e-10) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (std::abs(dot(x[static_cast<size_t>(j)], x[static_cast<size_t>(i)]) -
                         dot(y[static_cast<size_t>(j)], y[static_cast<size_t>(i)])) > gram_tol)
                throw SolverError(ErrorKind::GrammianMismatch, "unitary_complete",
                                  "inner products of the two column families disagree");

    std::vector<CVec3> q, p;
    for (size_t j = 0; j < 3; ++j) {
        CVec3 u = x[j];
        CVec3 w = y[j];
        for (int pass = 0; pass < 2; ++pass) {
            for (size_t k = 0; k < q.size(); ++k) {
                const cplx c = dot(u, q[k]);
                u = u - q[k] * c;
                w = w - p[k] * c;
            }
        }
        const double nu = u.norm();
        if (nu > rank_tol * std::max(1.0, x[j].norm())) {
            q.push_back(u * cplx(1.0 / nu));
            p.push_back(w * cplx(1.0 / nu));
        }
    }

    // polish the image frame so U is unitary to machine precision
    for (size_t k = 0; k < p.size(); ++k) {
        for (int pass = 0; pass < 2; ++pass)
            for (size_t l = 0; l < k; ++l) p[k] = p[k] - p[l] * dot(p[k], p[l]);
        p[k] = p[k] * cplx(1.0 / p[k].norm());
    }

    auto complete = [](std::vector<CVec3>& basis) {
        for (int e = 0; e < 3 && basis.size() < 3; ++e) {
            CVec3 u;
            u[e] = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& b : basis) u = u - b * dot(u, b);
            const double nu = u.norm();
            if (nu > 1e-8) basis.push_back(u * cplx(1.0 / nu));
        }
    };
    complete(q);
    complete(p);

    Mat3 u;
    for (size_t k = 0; k < 3; ++k) u = u + outer(p[k], q[k]);
    return u;
}

}  // namespace bipick
