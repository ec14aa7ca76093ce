#pragma once

#include <cstdint>

namespace bipick {

/// Shared tolerances and iteration caps. Every knob the solver stack reads
/// lives here so runs are reproducible from a single record.
struct SolverConfig {
    // feasible_pair (alternating projections with Dykstra correction)
    double feas_tol = 1e-9;       ///< decomposition residual declaring a pair feasible
    double infeas_tol = 1e-7;     ///< stalled gap above this certifies infeasibility
    int max_iter = 50000;         ///< projection iteration cap per feasibility call
    int stall_window = 500;       ///< iterations over which the gap must be flat
    double stall_rel = 1e-12;     ///< relative gap change counted as flat

    // extremal scaling search
    double t_tol = 1e-10;         ///< accuracy contract for the returned t*
    int probe_budget = 20000;     ///< internal splitting-probe iteration cap
    int bisect_depth = 48;        ///< hard cap on bracket halvings
    double bracket_rel_width = 1e-4;  ///< stop shrinking at this width (relative to the cap)
    int island_starts = 8;        ///< multi-start attempts when entering the rank-one set

    // Newton refinement
    double newton_tol = 1e-12;
    int newton_max_iter = 100;

    // rank-one extraction and pair checks
    double rank_one_gap = 1e-6;   ///< second/first eigenvalue ratio admitted as rank one
    double psd_tol = 1e-9;

    // numerics
    double hermitian_tol = 1e-14;
    double gram_tol = 1e-9;       ///< Grammian mismatch admitted by unitary_complete
    double mgs_rank_tol = 1e-10;  ///< Gram-Schmidt column acceptance threshold

    // geometry / classification
    double balanced_tol = 1e-10;
    double two_point_band = 1e-9;     ///< distance-equality band for extremal two-point data
    double classify_tol = 1e-9;
    double degenerate_band = 1e-7;    ///< |t* - t_k*| band flagging a one-variable extremum

    // reproducibility
    std::uint64_t seed = 0;       ///< drives projection starts and Newton seed jitter
};

}  // namespace bipick
