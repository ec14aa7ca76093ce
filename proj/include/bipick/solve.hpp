#pragma once

#include <algorithm>
#include <random>

#include "bipick/extremal.hpp"

namespace bipick {

struct SolveDiagnostics {
    double bracket_lo = 0.0, bracket_hi = 0.0;
    int probes = 0;
    long projection_iterations = 0;
    int summit_iterations = 0;
    double summit_residual = 0.0;
    double newton_residual = 0.0;
    double decomposition_residual = 0.0;
    double interpolation_max = 0.0;       ///< original frame, vs denormalized scaled targets
    double innerness_torus_max = 0.0;     ///< 64x64 distinguished-boundary grid
    double rank_gap_gamma = 0.0, rank_gap_delta = 0.0;
    double one_var_t1 = 0.0, one_var_t2 = 0.0;
    double two_point_cap_min = 0.0;
};

struct SolveReport {
    bool solved = false;
    Classification classification;        ///< NonDegenerateCandidate when solved
    double t_star = 0.0;
    PermissiblePair pair;                 ///< normalized frame
    RationalInner2 phi;                   ///< original frame (denormalized)
    RationalInner2 phi_normalized;        ///< normalized frame
    NormalizationFrame frame;
    std::array<cplx, 3> scaled_targets{}; ///< what phi interpolates at the original nodes
    bool already_extremal = false;        ///< t* = 1 within 1e-6
    double minimal_norm_scale = 0.0;      ///< 1/t*: minimal solution norm for the original data
    SolveDiagnostics diagnostics;
};

namespace detail {

/// phi(m1(z1), m2(z2)) as coefficient quadruples; m1, m2 are linear-fractional.
inline RationalInner2 precompose(const RationalInner2& phi, const MobiusMap& m1, const MobiusMap& m2) {
    auto accumulate = [&](const std::array<cplx, 4>& coef) {
        std::array<cplx, 4> out{};
        struct Lin {
            cplx c0, c1;  // c0 + c1 * z
        };
        const Lin n1{m1.b, m1.a}, d1{m1.d, m1.c};
        const Lin n2{m2.b, m2.a}, d2{m2.d, m2.c};
        auto add = [&out](cplx w, const Lin& f, const Lin& g) {
            out[0] += w * f.c0 * g.c0;
            out[1] += w * f.c1 * g.c0;
            out[2] += w * f.c0 * g.c1;
            out[3] += w * f.c1 * g.c1;
        };
        add(coef[0], d1, d2);
        add(coef[1], n1, d2);
        add(coef[2], d1, n2);
        add(coef[3], n1, n2);
        return out;
    };
    RationalInner2 r;
    r.num = accumulate(phi.num);
    r.den = accumulate(phi.den);
    return r;
}

/// mw_inv(phi) with mw_inv(s) = (alpha s + beta)/(gamma s + delta).
inline RationalInner2 postcompose(const RationalInner2& phi, const MobiusMap& mw_inv) {
    RationalInner2 r;
    for (size_t k = 0; k < 4; ++k) {
        r.num[k] = mw_inv.a * phi.num[k] + mw_inv.b * phi.den[k];
        r.den[k] = mw_inv.c * phi.num[k] + mw_inv.d * phi.den[k];
    }
    return r;
}

inline void normalize_leading(RationalInner2& phi) {
    const cplx d0 = phi.den[0];
    if (std::abs(d0) < 1e-300)
        throw SolverError(ErrorKind::IdenticallyVanishingDenominator, "denormalize",
                          "denominator vanishes at the origin after conjugation");
    for (auto& z : phi.num) z /= d0;
    for (auto& z : phi.den) z /= d0;
}

struct SummitCandidate {
    std::array<double, 6> z{};
    double residual = 0.0;
};

struct CoreResult {
    Classification classification;
    bool solved = false;
    double t_star = 0.0;
    CVec3 a, b;
    PickData3 normalized;
    NormalizationFrame frame;
    SolveDiagnostics diag;
    CoreResult(const PickData3& n, const NormalizationFrame& f) : normalized(n), frame(f) {}
};

inline CVec3 rank_one_direction(const HermMat3& m) {
    const Eig3 eig = herm_eig3(m);
    return fix_phase(eig.vectors.col(0) * cplx(std::sqrt(std::max(eig.values[0], 0.0))));
}

/// Everything from normalization to the validated extremal pair; phi and the
/// report dressing live in solve_extremal.
inline CoreResult solve_core(const PickData3& data, const SolverConfig& cfg) {
    const double wscale = std::max({std::abs(data.targets[0]), std::abs(data.targets[1]),
                                    std::abs(data.targets[2])});
    if (wscale < 1e-14)
        throw SolverError(ErrorKind::ZeroTargetRay, "solve_extremal",
                          "all targets vanish; the extremal scaling is undefined");

    NormalizedProblem norm = normalize_problem(data);
    CoreResult res(norm.data, norm.frame);

    // face-value gate, possible only for interior targets
    if (data.interior_targets()) {
        res.classification = classify(data, cfg.classify_tol);
        if (res.classification.kind != ProblemKind::NonDegenerateCandidate) return res;
    }

    const PickData3& nd = res.normalized;
    const double wmax = std::max(std::abs(nd.targets[1]), std::abs(nd.targets[2]));
    if (wmax < 1e-14)
        throw SolverError(ErrorKind::ZeroTargetRay, "solve_extremal",
                          "targets collapse to zero after normalization");

    // certified upper bounds: closed-disk cap and the three two-point caps
    double hi0 = 1.0 / wmax;
    double cap_min = hi0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double K = kobayashi_dist(nd.nodes[static_cast<size_t>(i)], nd.nodes[static_cast<size_t>(j)]);
            const double cap = two_point_cap(K, nd.targets[static_cast<size_t>(i)], nd.targets[static_cast<size_t>(j)]);
            cap_min = std::min(cap_min, cap);
        }
    hi0 = std::min(hi0, cap_min);
    res.diag.two_point_cap_min = cap_min;

    if (hi0 < 1e-12)
        throw SolverError(ErrorKind::Infeasible, "solve_extremal",
                          "a two-point subproblem admits no positive scaling");

    // bisection on "Douglas-Rachford reaches a feasible pair within budget"
    double lo = 0.0, hi = hi0;
    std::optional<std::pair<HermMat3, HermMat3>> pair_lo;
    const double width_stop = cfg.bracket_rel_width * hi0;
    for (int depth = 0; depth < cfg.bisect_depth && hi - lo > width_stop; ++depth) {
        const double mid = 0.5 * (lo + hi);
        const PickMatrices mats = build_matrices(nd.scaled_targets(mid));
        const DrOutcome out = dr_reach_feasible(mats, cfg.probe_budget);
        res.diag.probes++;
        res.diag.projection_iterations += out.iterations;
        if (out.pair) {
            lo = mid;
            pair_lo = out.pair;
        } else {
            hi = mid;
        }
    }
    if (!pair_lo) {
        // retreat geometrically with the full budget until a pair appears
        for (double t = 0.5 * hi0; t > 1e-8 * hi0; t *= 0.5) {
            const PickMatrices mats = build_matrices(nd.scaled_targets(t));
            const DrOutcome out = dr_reach_feasible(mats, cfg.max_iter);
            res.diag.probes++;
            res.diag.projection_iterations += out.iterations;
            if (out.pair) {
                pair_lo = out.pair;
                lo = t;
                break;
            }
        }
        if (!pair_lo)
            throw SolverError(ErrorKind::StallWithoutVerdict, "extremal_t",
                              "no feasible scaling could be certified");
    }
    res.diag.bracket_lo = lo;
    res.diag.bracket_hi = hi;

    // binding checks before the rank-one phase: when a one-variable problem
    // or a two-point subproblem attains the extremal scaling, the unique-pair
    // theory does not apply (assumptions (b)/(c) style failures) and no
    // rank-one decomposition need exist near t*
    res.diag.one_var_t1 = one_var_extremal_scaling(nd, 1, hi0 * (1.0 + 1e-9));
    res.diag.one_var_t2 = one_var_extremal_scaling(nd, 2, hi0 * (1.0 + 1e-9));
    const double band = std::max(cfg.degenerate_band,
                                 std::max(3.0 * cfg.bracket_rel_width, 1e-7) * hi0);
    if (res.diag.one_var_t1 >= hi - band) {
        res.classification = {ProblemKind::Degenerate1, -1, -1,
                              "one-variable problem in z1 attains the extremal scaling"};
        return res;
    }
    if (res.diag.one_var_t2 >= hi - band) {
        res.classification = {ProblemKind::Degenerate2, -1, -1,
                              "one-variable problem in z2 attains the extremal scaling"};
        return res;
    }
    if (cap_min <= lo + band) {
        res.classification = {ProblemKind::TwoPointExtremal, -1, -1,
                              "a two-point subproblem binds at the extremal scaling"};
        return res;
    }

    // island entry: rank-one seed from the feasible pair, then multi-start LM
    const ReducedSystem sys(nd);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const CVec3 a_seed = rank_one_direction(pair_lo->first);
    const std::array<double, 5> y_base = {std::abs(a_seed[0].real()), a_seed[1].real(), a_seed[1].imag(),
                                          a_seed[2].real(), a_seed[2].imag()};

    std::optional<SummitCandidate> best;
    const double lo_slack = std::max(1e-6 * hi0, 100.0 * cfg.t_tol);
    const double hi_slack = 1e-7 * hi0;  // t* <= hi0 holds exactly; reject spurious points
    for (int attempt = 0; attempt < std::max(cfg.island_starts, 1); ++attempt) {
        std::array<double, 5> y = y_base;
        if (attempt > 0) {
            const double sigma = attempt <= 2 ? 1e-3 : (attempt <= 5 ? 3e-2 : 0.3);
            for (auto& v : y) v += sigma * gauss(rng);
            y[0] = std::min(std::abs(y[0]), 0.995);
        }
        const LmOutcome lm = lm_fixed_t(sys, y, lo);
        if (!lm.converged) continue;
        const SummitOutcome summit =
            kkt_summit(sys, {lm.y[0], lm.y[1], lm.y[2], lm.y[3], lm.y[4], lo});
        if (!summit.converged) continue;
        const double t_cand = summit.z[5];
        if (t_cand < lo - lo_slack || t_cand > hi0 + hi_slack) continue;
        if (!best || t_cand > best->z[5]) {
            best = SummitCandidate{summit.z, summit.residual};
            res.diag.summit_iterations = summit.iterations;
        }
        if (best && attempt >= 2 && t_cand <= best->z[5]) break;  // consensus reached early
    }
    if (!best) {
        // with binding configurations excluded above, a missing summit with a
        // near-cap bracket still points at a two-point-dominated problem
        if (cap_min <= hi + band) {
            res.classification = {ProblemKind::TwoPointExtremal, -1, -1,
                                  "the feasible bracket reaches the two-point cap"};
            return res;
        }
        throw SolverError(ErrorKind::NoConvergence, "extremal_t",
                          "no stationary extremal point found from the feasible seed");
    }

    double t_star = best->z[5];
    res.diag.summit_residual = best->residual;

    // local fold check: the rank-one slice exists just below t*, not above.
    // A stationary point with the slice persisting above is not the summit
    // (e.g. the bottom edge of a solution component); reseed upward from it.
    {
        const double eps = std::max(1e-5 * hi0, 1e6 * cfg.t_tol * hi0);
        std::array<double, 5> ys = {best->z[0], best->z[1], best->z[2], best->z[3], best->z[4]};
        const LmOutcome below = lm_fixed_t(sys, ys, t_star - eps);
        if (!below.converged)
            res.diag.summit_residual = std::max(res.diag.summit_residual, below.residual);
        const LmOutcome above = lm_fixed_t(sys, ys, t_star + eps);
        if (above.converged && above.residual < 1e-12 && t_star + eps <= hi0 + hi_slack) {
            const SummitOutcome retry = kkt_summit(
                sys, {above.y[0], above.y[1], above.y[2], above.y[3], above.y[4], t_star + eps});
            if (retry.converged && retry.z[5] > t_star && retry.z[5] <= hi0 + hi_slack) {
                best->z = retry.z;
                t_star = retry.z[5];
                res.diag.summit_residual = retry.residual;
            }
        }
    }

    // assemble the pair; the sign flip keeps a1 >= 0 (Gamma is unaffected)
    CVec3 a = {{best->z[0], cplx(best->z[1], best->z[2]), cplx(best->z[3], best->z[4])}};
    if (a[0].real() < 0.0) a = a * cplx(-1.0);
    CVec3 b = b_from_a(a);
    if (a.norm() < 1e-6 || b.norm() < 1e-6)
        throw SolverError(ErrorKind::DegenerateAtExtreme, "extremal_t",
                          "one member of the extremal pair vanishes");

    // precise extremality-relative classification at the located t*
    const double fine_band = std::max(cfg.degenerate_band, 1e-7 * hi0);
    if (res.diag.one_var_t1 >= t_star - fine_band) {
        res.classification = {ProblemKind::Degenerate1, -1, -1,
                              "one-variable problem in z1 attains the extremal scaling"};
        return res;
    }
    if (res.diag.one_var_t2 >= t_star - fine_band) {
        res.classification = {ProblemKind::Degenerate2, -1, -1,
                              "one-variable problem in z2 attains the extremal scaling"};
        return res;
    }
    if (cap_min <= t_star + fine_band) {
        res.classification = {ProblemKind::TwoPointExtremal, -1, -1,
                              "a two-point subproblem binds at the extremal scaling"};
        return res;
    }

    // final confirmation on the full nine-equation system at t*; the
    // stationarity solve already sits at ~1e-13, so a Levenberg stall on the
    // degenerate extremal root must not discard it
    const PickData3 scaled = nd.scaled_targets(t_star);
    try {
        a = refine_newton(a, scaled, cfg);
    } catch (const SolverError& e) {
        if (e.kind() != ErrorKind::NoConvergence && e.kind() != ErrorKind::JacobianSingular) throw;
    }
    if (a[0].real() < 0.0) a = a * cplx(-1.0);
    b = b_from_a(a);
    {
        const PickMatrices mats = build_matrices(scaled);
        res.diag.decomposition_residual = decomposition_residual(
            HermMat3::unchecked(outer(a)), HermMat3::unchecked(outer(b)), mats);
        const FullSystem fs(scaled);
        const auto fv = fs.residual({a[0].real(), a[1].real(), a[1].imag(), a[2].real(), a[2].imag(),
                                     b[1].real(), b[1].imag(), b[2].real(), b[2].imag()});
        double nf = 0.0;
        for (double v : fv) nf = std::max(nf, std::abs(v));
        res.diag.newton_residual = nf;
    }

    res.solved = true;
    res.classification = {ProblemKind::NonDegenerateCandidate, -1, -1, ""};
    res.t_star = t_star;
    res.a = a;
    res.b = b;
    return res;
}

}  // namespace detail

/// Largest t such that the problem with targets t*w is solvable, located by
/// bracketing feasibility probes and polished to ~1e-13 by the stationarity
/// Newton on the rank-one manifold. Aborted classifications surface as
/// DegenerateAtExtreme.
inline double extremal_t(const PickData3& data, const SolverConfig& cfg = {}) {
    const detail::CoreResult core = detail::solve_core(data, cfg);
    if (!core.solved)
        throw SolverError(ErrorKind::DegenerateAtExtreme, "extremal_t",
                          std::string("classification: ") + to_string(core.classification.kind) +
                              " (" + core.classification.details + ")");
    return core.t_star;
}

/// Full pipeline: normalize, classify, locate t*, extract the unique rank-one
/// pair, build the Cramer interpolant, verify, and conjugate back through the
/// normalization frame.
inline SolveReport solve_extremal(const PickData3& data, const SolverConfig& cfg = {}) {
    detail::CoreResult core = detail::solve_core(data, cfg);
    SolveReport rep;
    rep.classification = core.classification;
    rep.frame = core.frame;
    rep.diagnostics = core.diag;
    if (!core.solved) return rep;

    rep.solved = true;
    rep.t_star = core.t_star;
    rep.pair = PermissiblePair::from_vectors(core.a, core.b);
    {
        const Eig3 eg = herm_eig3(rep.pair.gamma);
        const Eig3 ed = herm_eig3(rep.pair.delta);
        rep.diagnostics.rank_gap_gamma = std::abs(eg.values[1]) / std::max(eg.values[0], 1e-300);
        rep.diagnostics.rank_gap_delta = std::abs(ed.values[1]) / std::max(ed.values[0], 1e-300);
    }

    const PickData3 scaled = core.normalized.scaled_targets(core.t_star);
    rep.phi_normalized = cramer_phi(core.a, core.b, scaled);

    // verification in the normalized frame
    double interp = 0.0;
    for (size_t j = 0; j < 3; ++j) {
        const cplx v = rep.phi_normalized.eval(scaled.nodes[j].z1, scaled.nodes[j].z2);
        interp = std::max(interp, std::abs(v - scaled.targets[j]));
    }
    const double inner_dev = max_torus_deviation(rep.phi_normalized, 64);
    if (interp > 1e-9)
        throw SolverError(ErrorKind::NoConvergence, "solve_extremal",
                          "interpolation residual " + std::to_string(interp) + " exceeds 1e-9");
    if (inner_dev > 1e-8)
        throw SolverError(ErrorKind::NoConvergence, "solve_extremal",
                          "innerness deviation " + std::to_string(inner_dev) + " exceeds 1e-8");

    // conjugate back: phi = mw^{-1} o phi_norm o (m1, m2)
    rep.phi = detail::postcompose(detail::precompose(rep.phi_normalized, core.frame.m1, core.frame.m2),
                                  core.frame.mw.inverse());
    detail::normalize_leading(rep.phi);
    for (size_t j = 0; j < 3; ++j)
        rep.scaled_targets[j] = core.frame.backward_target(scaled.targets[j]);

    double interp_orig = 0.0;
    for (size_t j = 0; j < 3; ++j) {
        const cplx v = rep.phi.eval(data.nodes[j].z1, data.nodes[j].z2);
        interp_orig = std::max(interp_orig, std::abs(v - rep.scaled_targets[j]));
    }
    rep.diagnostics.interpolation_max = interp_orig;
    rep.diagnostics.innerness_torus_max = std::max(inner_dev, max_torus_deviation(rep.phi, 64));
    if (interp_orig > 1e-9)
        throw SolverError(ErrorKind::NoConvergence, "solve_extremal",
                          "denormalized interpolation residual exceeds 1e-9");

    rep.already_extremal = std::abs(rep.t_star - 1.0) <= 1e-6;
    rep.minimal_norm_scale = 1.0 / rep.t_star;
    return rep;
}

}  // namespace bipick
