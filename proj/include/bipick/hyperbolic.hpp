#pragma once

#include <cmath>

#include "bipick/errors.hpp"
#include "bipick/types.hpp"

namespace bipick {

/// Point of the open unit disk.
struct DiskPoint {
    cplx value;

    explicit DiskPoint(cplx z) : value(z) {
        if (!(std::abs(z) < 1.0))
            throw SolverError(ErrorKind::InvalidInput, "DiskPoint", "|z| >= 1");
    }
};

/// Point of the open bidisk, coordinatewise inside the unit disk.
struct BidiskPoint {
    cplx z1, z2;

    BidiskPoint(cplx a, cplx b) : z1(a), z2(b) {
        if (!(std::abs(a) < 1.0 && std::abs(b) < 1.0))
            throw SolverError(ErrorKind::InvalidInput, "BidiskPoint", "coordinate outside the open disk");
    }
};

/// z -> (a z + b) / (c z + d). The disk-automorphism factories produce maps of
/// the closed disk onto itself; solve_two_point also uses the same carrier for
/// strict-contraction interpolants, which are not automorphisms.
struct MobiusMap {
    cplx a{1}, b{0}, c{0}, d{1};

    cplx apply(cplx z) const { return (a * z + b) / (c * z + d); }

    MobiusMap inverse() const { return {d, -b, -c, a}; }

    /// this(other(z))
    MobiusMap compose(const MobiusMap& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }

    static MobiusMap identity() { return {}; }

    /// Disk automorphism sending p to 0: z -> (z - p)/(1 - conj(p) z).
    static MobiusMap to_zero(cplx p) { return {1.0, -p, -std::conj(p), 1.0}; }

    /// |image of 0| < 1 and unimodular images at 16 boundary samples.
    bool is_disk_automorphism(double tol = 1e-10) const {
        if (std::abs(a * d - b * c) < 1e-300) return false;
        if (!(std::abs(apply(0.0)) < 1.0)) return false;
        for (int k = 0; k < 16; ++k) {
            const double th = 2.0 * M_PI * k / 16.0;
            const cplx z(std::cos(th), std::sin(th));
            if (std::abs(std::abs(apply(z)) - 1.0) > tol) return false;
        }
        return true;
    }
};

/// mobius_to_zero with the domain checked.
inline MobiusMap mobius_to_zero(const DiskPoint& p) { return MobiusMap::to_zero(p.value); }

/// Pseudohyperbolic distance rho(p,q) = |p - q| / |1 - conj(q) p|.
inline double pseudo_dist(cplx p, cplx q) {
    return std::abs(p - q) / std::abs(1.0 - std::conj(q) * p);
}

inline double pseudo_dist(const DiskPoint& p, const DiskPoint& q) {
    return pseudo_dist(p.value, q.value);
}

/// Kobayashi distance on the bidisk: max of the coordinatewise distances.
inline double kobayashi_dist(const BidiskPoint& p, const BidiskPoint& q) {
    return std::max(pseudo_dist(p.z1, q.z1), pseudo_dist(p.z2, q.z2));
}

/// A pair is balanced when the two coordinatewise distances coincide.
inline bool is_balanced(const BidiskPoint& p, const BidiskPoint& q, double tol = 1e-10) {
    return std::abs(pseudo_dist(p.z1, q.z1) - pseudo_dist(p.z2, q.z2)) <= tol;
}

}  // namespace bipick
