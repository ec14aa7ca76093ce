#pragma once

#include <vector>

#include "bipick/io.hpp"

namespace bipick {

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Re-checks a solution file against its problem independently of the solver:
/// PSD-ness and rank of the pair, the decomposition identity in the
/// (recomputed) normalized frame, interpolation of the denormalized scaled
/// targets, and innerness on the distinguished boundary.
inline std::vector<CheckResult> verify_solution(const PickData3& problem, const io::SolutionFile& sol) {
    std::vector<CheckResult> out;
    auto push = [&out](const std::string& name, double measured, double tol) {
        out.push_back({name, measured, tol, measured <= tol});
    };

    push("gamma_psd", -std::min(min_eigenvalue(sol.gamma), 0.0), 1e-9);
    push("delta_psd", -std::min(min_eigenvalue(sol.delta), 0.0), 1e-9);

    const Eig3 eg = herm_eig3(sol.gamma);
    const Eig3 ed = herm_eig3(sol.delta);
    push("gamma_rank_one", std::abs(eg.values[1]) / std::max(eg.values[0], 1e-300), 1e-7);
    push("delta_rank_one", std::abs(ed.values[1]) / std::max(ed.values[0], 1e-300), 1e-7);

    push("gamma_matches_a", (sol.gamma - HermMat3::unchecked(outer(sol.a))).mat().frobenius(), 1e-9);
    push("delta_matches_b", (sol.delta - HermMat3::unchecked(outer(sol.b))).mat().frobenius(), 1e-9);

    const NormalizedProblem np = normalize_problem(problem);
    const PickData3 scaled = np.data.scaled_targets(sol.t_star);
    const PickMatrices mats = build_matrices(scaled);
    push("decomposition",
         (mats.W - schur_product(mats.L1, sol.gamma) - schur_product(mats.L2, sol.delta))
             .mat()
             .frobenius(),
         1e-9);

    double interp = 0.0;
    for (size_t j = 0; j < 3; ++j) {
        const cplx target = np.frame.backward_target(scaled.targets[j]);
        interp = std::max(interp,
                          std::abs(sol.phi.eval(problem.nodes[j].z1, problem.nodes[j].z2) - target));
    }
    push("interpolation", interp, 1e-9);

    push("innerness_torus", max_torus_deviation(sol.phi, 64), 1e-8);
    return out;
}

}  // namespace bipick
