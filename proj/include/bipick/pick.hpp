#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "bipick/config.hpp"
#include "bipick/errors.hpp"
#include "bipick/hyperbolic.hpp"
#include "bipick/numerics.hpp"

namespace bipick {

/// Three bidisk nodes with complex targets. Nodes must be pairwise distinct;
/// targets must be finite. Operations that require interior targets
/// (classification, two-point solving) check |w_i| < 1 themselves, so the
/// extremal-scaling solver can treat targets as a ray.
struct PickData3 {
    std::array<BidiskPoint, 3> nodes;
    std::array<cplx, 3> targets;

    PickData3(const std::array<BidiskPoint, 3>& n, const std::array<cplx, 3>& w)
        : nodes(n), targets(w) {
        for (int i = 0; i < 3; ++i) {
            if (!std::isfinite(w[static_cast<size_t>(i)].real()) ||
                !std::isfinite(w[static_cast<size_t>(i)].imag()))
                throw SolverError(ErrorKind::InvalidInput, "PickData3", "non-finite target");
            for (int j = i + 1; j < 3; ++j)
                if (std::abs(n[static_cast<size_t>(i)].z1 - n[static_cast<size_t>(j)].z1) < 1e-15 &&
                    std::abs(n[static_cast<size_t>(i)].z2 - n[static_cast<size_t>(j)].z2) < 1e-15)
                    throw SolverError(ErrorKind::InvalidInput, "PickData3", "nodes not pairwise distinct");
        }
    }

    bool interior_targets() const {
        return std::abs(targets[0]) < 1.0 && std::abs(targets[1]) < 1.0 && std::abs(targets[2]) < 1.0;
    }

    PickData3 scaled_targets(double t) const {
        return PickData3(nodes, {targets[0] * t, targets[1] * t, targets[2] * t});
    }

    void require_interior(const char* stage) const {
        if (!interior_targets())
            throw SolverError(ErrorKind::InvalidInput, stage, "target outside the open disk");
    }
};

/// W = (1 - conj(w_i) w_j), L1 = (1 - conj(l1_i) l1_j), L2 likewise.
struct PickMatrices {
    HermMat3 W, L1, L2;
};

inline PickMatrices build_matrices(const PickData3& data) {
    Mat3 w, l1, l2;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            w(i, j) = 1.0 - std::conj(data.targets[static_cast<size_t>(i)]) * data.targets[static_cast<size_t>(j)];
            l1(i, j) = 1.0 - std::conj(data.nodes[static_cast<size_t>(i)].z1) * data.nodes[static_cast<size_t>(j)].z1;
            l2(i, j) = 1.0 - std::conj(data.nodes[static_cast<size_t>(i)].z2) * data.nodes[static_cast<size_t>(j)].z2;
        }
    return {HermMat3(w), HermMat3(l1), HermMat3(l2)};
}

/// Frobenius norm of W - L1 . Gamma - L2 . Delta.
inline double decomposition_residual(const HermMat3& gamma, const HermMat3& delta,
                                     const PickMatrices& mats) {
    return (mats.W - schur_product(mats.L1, gamma) - schur_product(mats.L2, delta)).mat().frobenius();
}

/// True iff both matrices are PSD and W = L1 . Gamma + L2 . Delta within tol.
inline bool is_permissible(const HermMat3& gamma, const HermMat3& delta, const PickMatrices& mats,
                           double tol) {
    if (!is_psd(gamma, tol) || !is_psd(delta, tol)) return false;
    return decomposition_residual(gamma, delta, mats) <= tol;
}

inline void require_kernel(const HermMat3& k, const char* stage) {
    if (min_eigenvalue(k) <= 0.0)
        throw SolverError(ErrorKind::NotAKernel, stage, "kernel is not positive definite");
}

/// Admissible kernel: positive definite K with L1 . K >= 0 and L2 . K >= 0.
inline bool is_admissible(const HermMat3& k, const PickMatrices& mats, double tol) {
    require_kernel(k, "is_admissible");
    return min_eigenvalue(schur_product(mats.L1, k)) >= -tol &&
           min_eigenvalue(schur_product(mats.L2, k)) >= -tol;
}

/// Active kernel: admissible and K . W is singular PSD.
inline bool is_active(const HermMat3& k, const PickMatrices& mats, double tol) {
    require_kernel(k, "is_active");
    if (!is_admissible(k, mats, tol)) return false;
    const double mu = min_eigenvalue(schur_product(k, mats.W));
    return mu >= -tol && mu <= tol;
}

enum class ProblemKind {
    Degenerate1,            ///< solvable by a function of z1 alone
    Degenerate2,            ///< solvable by a function of z2 alone
    TwoPointExtremal,       ///< a two-point subproblem is extremal (assumption (b) fails)
    NonDegenerateCandidate,
};

struct Classification {
    ProblemKind kind = ProblemKind::NonDegenerateCandidate;
    int pair_i = -1, pair_j = -1;  ///< binding pair for TwoPointExtremal
    std::string details;
};

inline const char* to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::Degenerate1: return "Degenerate1";
        case ProblemKind::Degenerate2: return "Degenerate2";
        case ProblemKind::TwoPointExtremal: return "TwoPointExtremal";
        case ProblemKind::NonDegenerateCandidate: return "NonDegenerateCandidate";
    }
    return "Unknown";
}

/// One-variable Pick matrix ((1 - conj(w_i) w_j)/(1 - conj(x_i) x_j)) for the
/// chosen coordinate; PSD iff the data is interpolable by a function of that
/// coordinate alone.
inline HermMat3 one_variable_pick(const PickData3& data, int coord) {
    Mat3 p;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const cplx xi = coord == 1 ? data.nodes[static_cast<size_t>(i)].z1 : data.nodes[static_cast<size_t>(i)].z2;
            const cplx xj = coord == 1 ? data.nodes[static_cast<size_t>(j)].z1 : data.nodes[static_cast<size_t>(j)].z2;
            p(i, j) = (1.0 - std::conj(data.targets[static_cast<size_t>(i)]) * data.targets[static_cast<size_t>(j)]) /
                      (1.0 - std::conj(xi) * xj);
        }
    return HermMat3(p);
}

/// Face-value classification of the data as given. Throws Infeasible when a
/// two-point subproblem already has no solution.
inline Classification classify(const PickData3& data, double tol = 1e-9) {
    data.require_interior("classify");
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double dw = pseudo_dist(data.targets[static_cast<size_t>(i)], data.targets[static_cast<size_t>(j)]);
            const double dl = kobayashi_dist(data.nodes[static_cast<size_t>(i)], data.nodes[static_cast<size_t>(j)]);
            if (dw > dl + tol)
                throw SolverError(ErrorKind::Infeasible, "classify",
                                  "pair (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                      ") has target distance exceeding the Kobayashi distance");
        }
    if (is_psd(one_variable_pick(data, 1), tol))
        return {ProblemKind::Degenerate1, -1, -1, "one-variable Pick matrix in z1 is PSD"};
    if (is_psd(one_variable_pick(data, 2), tol))
        return {ProblemKind::Degenerate2, -1, -1, "one-variable Pick matrix in z2 is PSD"};
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double dw = pseudo_dist(data.targets[static_cast<size_t>(i)], data.targets[static_cast<size_t>(j)]);
            const double dl = kobayashi_dist(data.nodes[static_cast<size_t>(i)], data.nodes[static_cast<size_t>(j)]);
            if (dw >= dl - tol)
                return {ProblemKind::TwoPointExtremal, i, j,
                        "two-point subproblem (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                            ") is extremal"};
        }
    return {ProblemKind::NonDegenerateCandidate, -1, -1, ""};
}

// ---------------------------------------------------------------------------
// two-point solver

enum class TwoPointKind { Infeasible, UniqueExtremal, BalancedExtremal, NonExtremal };

/// Result of the two-point bidisk problem. `witness` always interpolates when
/// the problem is solvable; for BalancedExtremal both coordinate solutions are
/// present and every pointwise convex combination solves.
struct TwoPointSolution {
    TwoPointKind kind = TwoPointKind::Infeasible;
    int coordinate = 0;              ///< attaining coordinate (1 or 2) when unique/non-extremal
    MobiusMap witness;               ///< solution in the attaining coordinate
    std::optional<MobiusMap> other;  ///< second coordinate solution (balanced case)

    cplx evaluate(const BidiskPoint& z) const {
        const cplx primary = witness.apply(coordinate == 1 ? z.z1 : z.z2);
        if (kind == TwoPointKind::BalancedExtremal && other)
            return 0.5 * (primary + other->apply(z.z2));
        return primary;
    }
};

namespace detail {

/// Interpolant through (p -> w1, q -> w2) in one variable, built from one step
/// of the Schur algorithm: z -> b_{w1}^{-1}( lambda b_p(z) ) with
/// lambda = b_{w1}(w2) / b_p(q). |lambda| = rho(w1,w2)/rho(p,q) <= 1, with
/// equality exactly in the extremal case (then the map is an automorphism).
inline MobiusMap schur_interpolant(cplx p, cplx q, cplx w1, cplx w2) {
    const cplx bq = (q - p) / (1.0 - std::conj(p) * q);
    const cplx bw = (w2 - w1) / (1.0 - std::conj(w1) * w2);
    const cplx lambda = bw / bq;
    // (lambda b_p(z) + w1) / (1 + conj(w1) lambda b_p(z))
    return MobiusMap{lambda - w1 * std::conj(p), w1 - lambda * p,
                     std::conj(w1) * lambda - std::conj(p), 1.0 - std::conj(w1) * lambda * p};
}

}  // namespace detail

inline TwoPointSolution solve_two_point(const BidiskPoint& p, const BidiskPoint& q, cplx w1, cplx w2,
                                        double tol = 1e-9) {
    if (!(std::abs(w1) < 1.0 && std::abs(w2) < 1.0))
        throw SolverError(ErrorKind::InvalidInput, "solve_two_point", "target outside the open disk");
    if (std::abs(p.z1 - q.z1) < 1e-15 && std::abs(p.z2 - q.z2) < 1e-15)
        throw SolverError(ErrorKind::InvalidInput, "solve_two_point", "the two nodes coincide");
    const double d1 = pseudo_dist(p.z1, q.z1);
    const double d2 = pseudo_dist(p.z2, q.z2);
    const double dk = std::max(d1, d2);
    const double dw = pseudo_dist(w1, w2);

    TwoPointSolution out;
    if (dw > dk + tol) {
        out.kind = TwoPointKind::Infeasible;
        return out;
    }
    const bool extremal = std::abs(dw - dk) <= tol;
    const int attain = d1 >= d2 ? 1 : 2;  // ties toward coordinate 1

    if (extremal && std::abs(d1 - d2) <= tol) {
        out.kind = TwoPointKind::BalancedExtremal;
        out.coordinate = 1;
        out.witness = detail::schur_interpolant(p.z1, q.z1, w1, w2);
        out.other = detail::schur_interpolant(p.z2, q.z2, w1, w2);
        return out;
    }
    out.coordinate = attain;
    const cplx pa = attain == 1 ? p.z1 : p.z2;
    const cplx qa = attain == 1 ? q.z1 : q.z2;
    out.witness = detail::schur_interpolant(pa, qa, w1, w2);
    out.kind = extremal ? TwoPointKind::UniqueExtremal : TwoPointKind::NonExtremal;
    return out;
}

}  // namespace bipick
