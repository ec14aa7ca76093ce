#pragma once

#include "bipick/extremal.hpp"
#include "bipick/numerics.hpp"
#include "bipick/pick.hpp"

namespace bipick {

/// Unitary colligation U = (A B; C D) with scalar A, realizing
/// psi(z) = A + B E_z (I - D E_z)^{-1} C, E_z = diag(z1, z2).
struct Realization {
    Mat3 U;

    cplx A() const { return U(0, 0); }
    std::array<cplx, 2> B() const { return {U(0, 1), U(0, 2)}; }
    std::array<cplx, 2> C() const { return {U(1, 0), U(2, 0)}; }
    std::array<std::array<cplx, 2>, 2> D() const {
        return {{{U(1, 1), U(1, 2)}, {U(2, 1), U(2, 2)}}};
    }

    double unitarity_defect() const { return (U.adjoint() * U - Mat3::identity()).frobenius(); }
};

/// (I - D E_z)^{-1} C by a 2x2 solve; throws on a singular resolvent
/// (possible only at boundary points).
inline std::array<cplx, 2> resolvent_times_c(const Realization& r, cplx z1, cplx z2) {
    const auto D = r.D();
    const auto C = r.C();
    // M = I - D E_z, E_z = diag(z1, z2)
    const cplx m00 = 1.0 - D[0][0] * z1, m01 = -D[0][1] * z2;
    const cplx m10 = -D[1][0] * z1, m11 = 1.0 - D[1][1] * z2;
    const cplx det = m00 * m11 - m01 * m10;
    if (std::abs(det) < 1e-12)
        throw SolverError(ErrorKind::SingularResolvent, "eval_transfer",
                          "I - D E_z is singular at the requested point");
    return {(m11 * C[0] - m01 * C[1]) / det, (m00 * C[1] - m10 * C[0]) / det};
}

/// psi(z) = A + B E_z (I - D E_z)^{-1} C.
inline cplx eval_transfer(const Realization& r, cplx z1, cplx z2) {
    const auto x = resolvent_times_c(r, z1, z2);
    const auto B = r.B();
    return r.A() + B[0] * z1 * x[0] + B[1] * z2 * x[1];
}

inline cplx eval_transfer(const Realization& r, const BidiskPoint& z) {
    return eval_transfer(r, z.z1, z.z2);
}

/// Unitary from the Grammian identity: U (1, l1_j conj(a_j), l2_j conj(b_j))^T
/// = (w_j, conj(a_j), conj(b_j))^T for the three nodes of the normalized
/// (already scaled) problem.
inline Realization build_realization(const CVec3& a, const CVec3& b, const PickData3& normalized,
                                     double gram_tol = 1e-9) {
    std::array<CVec3, 3> x, y;
    for (size_t j = 0; j < 3; ++j) {
        const cplx l1 = normalized.nodes[j].z1, l2 = normalized.nodes[j].z2;
        x[j] = {{1.0, l1 * std::conj(a[static_cast<int>(j)]), l2 * std::conj(b[static_cast<int>(j)])}};
        y[j] = {{normalized.targets[j], std::conj(a[static_cast<int>(j)]), std::conj(b[static_cast<int>(j)])}};
    }
    Realization r;
    r.U = unitary_complete(x, y, gram_tol);
    return r;
}

/// |LHS - RHS| of the innerness identity
/// 1 - conj(psi) psi = ((I - D E)^{-1} C)^* (I - E^* E) ((I - D E)^{-1} C).
inline double innerness_certificate(const Realization& r, cplx z1, cplx z2) {
    const auto x = resolvent_times_c(r, z1, z2);
    const cplx psi = [&] {
        const auto B = r.B();
        return r.A() + B[0] * z1 * x[0] + B[1] * z2 * x[1];
    }();
    const double lhs = 1.0 - std::norm(psi);
    const double rhs = (1.0 - std::norm(z1)) * std::norm(x[0]) + (1.0 - std::norm(z2)) * std::norm(x[1]);
    return std::abs(lhs - rhs);
}

inline double innerness_certificate(const Realization& r, const BidiskPoint& z) {
    return innerness_certificate(r, z.z1, z.z2);
}

/// max |psi - phi| over an n x n interior grid (radius 0.95, row-major).
inline double cross_validate(const Realization& r, const RationalInner2& phi, int n_grid) {
    double worst = 0.0;
    if (n_grid <= 1) return std::abs(eval_transfer(r, 0.0, 0.0) - phi.eval(0.0, 0.0));
    for (int i = 0; i < n_grid; ++i)
        for (int j = 0; j < n_grid; ++j) {
            const double u = -0.95 + 1.9 * i / (n_grid - 1);
            const double v = -0.95 + 1.9 * j / (n_grid - 1);
            worst = std::max(worst, std::abs(eval_transfer(r, u, v) - phi.eval(u, v)));
        }
    return worst;
}

}  // namespace bipick
