#pragma once

#include "bipick/hyperbolic.hpp"
#include "bipick/pick.hpp"

namespace bipick {

/// Coordinatewise Mobius maps taking the problem to lambda_1 = (0,0), w_1 = 0,
/// and back. `m1`, `m2` act on the two bidisk coordinates, `mw` on the target
/// disk; all three are disk automorphisms.
struct NormalizationFrame {
    MobiusMap m1, m2, mw;

    BidiskPoint forward(const BidiskPoint& p) const {
        return BidiskPoint(m1.apply(p.z1), m2.apply(p.z2));
    }
    cplx forward_target(cplx w) const { return mw.apply(w); }
    cplx backward_target(cplx w) const { return mw.inverse().apply(w); }

    bool is_identity(double tol = 1e-15) const {
        auto ident = [tol](const MobiusMap& m) {
            return std::abs(m.b) <= tol && std::abs(m.c) <= tol && std::abs(m.a - m.d) <= tol;
        };
        return ident(m1) && ident(m2) && ident(mw);
    }
};

struct NormalizedProblem {
    PickData3 data;
    NormalizationFrame frame;
};

/// Precompose with the bidisk automorphism sending lambda_1 to (0,0) and
/// postcompose with the disk automorphism sending w_1 to 0. Ray targets with
/// |w_1| >= 1 cannot be normalized on the target side.
inline NormalizedProblem normalize_problem(const PickData3& data) {
    if (!(std::abs(data.targets[0]) < 1.0))
        throw SolverError(ErrorKind::InvalidInput, "normalize_problem",
                          "target at the first node must be inside the open disk");
    NormalizationFrame frame{MobiusMap::to_zero(data.nodes[0].z1), MobiusMap::to_zero(data.nodes[0].z2),
                             MobiusMap::to_zero(data.targets[0])};
    std::array<BidiskPoint, 3> nodes = {frame.forward(data.nodes[0]), frame.forward(data.nodes[1]),
                                        frame.forward(data.nodes[2])};
    std::array<cplx, 3> targets;
    for (size_t i = 0; i < 3; ++i) targets[i] = frame.forward_target(data.targets[i]);
    targets[0] = 0.0;  // exact by construction
    nodes[0] = BidiskPoint(0.0, 0.0);
    return {PickData3(nodes, targets), frame};
}

}  // namespace bipick
