#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bipick/config.hpp"
#include "bipick/errors.hpp"
#include "bipick/normalize.hpp"
#include "bipick/numerics.hpp"
#include "bipick/pick.hpp"

namespace bipick {

/// Rank-one pair (Gamma, Delta) = (a (x) a, b (x) b) decomposing
/// W = L1 . Gamma + L2 . Delta, with phases fixed so a1 >= 0 and b1 > 0.
struct PermissiblePair {
    HermMat3 gamma, delta;
    CVec3 a, b;

    static PermissiblePair from_vectors(const CVec3& a, const CVec3& b) {
        return {HermMat3::unchecked(outer(a)), HermMat3::unchecked(outer(b)), a, b};
    }
};

/// Rational function with numerator and denominator spanned by
/// {1, z1, z2, z1 z2}; inner of degree 2 when built from an extremal pair.
struct RationalInner2 {
    std::array<cplx, 4> num{};  ///< coefficients of 1, z1, z2, z1*z2
    std::array<cplx, 4> den{};

    cplx eval(cplx z1, cplx z2) const {
        const cplx m1 = z1, m2 = z2, m3 = z1 * z2;
        return (num[0] + num[1] * m1 + num[2] * m2 + num[3] * m3) /
               (den[0] + den[1] * m1 + den[2] * m2 + den[3] * m3);
    }
};

/// Largest deviation of |phi| from 1 over an n x n grid on the torus.
/// Half-offset angles keep the sampling away from denominator zeros on the
/// distinguished boundary.
inline double max_torus_deviation(const RationalInner2& phi, int n) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double th = 2.0 * M_PI * (i + 0.5) / n;
            const double ph = 2.0 * M_PI * (j + 0.5) / n;
            const cplx z1(std::cos(th), std::sin(th));
            const cplx z2(std::cos(ph), std::sin(ph));
            worst = std::max(worst, std::abs(std::abs(phi.eval(z1, z2)) - 1.0));
        }
    return worst;
}

/// Largest |phi| over an n^3-point interior sample (radial x angular grid).
inline double max_interior_modulus(const RationalInner2& phi, int n) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r1 = (i + 0.5) / n;
        for (int j = 0; j < n; ++j) {
            const double th = 2.0 * M_PI * j / n;
            const cplx z1 = r1 * cplx(std::cos(th), std::sin(th));
            for (int k = 0; k < n; ++k) {
                const double r2 = (k + 0.5) / n;
                worst = std::max(worst, std::abs(phi.eval(z1, cplx(r2, 0.0))));
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// feasibility by alternating projections (Dykstra)

struct FeasibilityResult {
    bool feasible = false;
    HermMat3 gamma, delta;  ///< PSD pair with small decomposition residual when feasible
    double gap = 0.0;       ///< certified distance between affine set and cone when infeasible
    double residual = 0.0;
    int iterations = 0;
};

namespace detail {

/// Least-norm correction onto {L1 . G + L2 . D = W}; decouples entrywise.
inline void project_affine(HermMat3& g, HermMat3& d, const PickMatrices& m) {
    Mat3 gm = g.mat(), dm = d.mat();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const cplx c1 = m.L1(i, j), c2 = m.L2(i, j);
            const cplx r = c1 * gm(i, j) + c2 * dm(i, j) - m.W(i, j);
            const cplx rho = r / (std::norm(c1) + std::norm(c2));
            gm(i, j) -= std::conj(c1) * rho;
            dm(i, j) -= std::conj(c2) * rho;
        }
    g = HermMat3::unchecked(gm);
    d = HermMat3::unchecked(dm);
}

inline double pair_distance(const HermMat3& g1, const HermMat3& d1, const HermMat3& g2,
                            const HermMat3& d2) {
    const double a = (g1 - g2).mat().frobenius();
    const double b = (d1 - d2).mat().frobenius();
    return std::sqrt(a * a + b * b);
}

}  // namespace detail

/// Alternating projections between the affine slice {L1.G + L2.D = W} and the
/// PSD x PSD cone, with Dykstra correction on the cone side. Feasible when the
/// cone iterate meets the affine constraint within cfg.feas_tol; infeasible
/// when the projection gap stalls above cfg.infeas_tol.
inline FeasibilityResult feasible_pair(const PickMatrices& mats, const SolverConfig& cfg,
                                       const HermMat3& start_gamma = HermMat3::zero(),
                                       const HermMat3& start_delta = HermMat3::zero()) {
    HermMat3 g = start_gamma, d = start_delta;
    HermMat3 pg = HermMat3::zero(), pd = HermMat3::zero();
    std::vector<double> gap_hist;
    gap_hist.reserve(static_cast<size_t>(cfg.max_iter));

    for (int k = 1; k <= cfg.max_iter; ++k) {
        HermMat3 ga = g, da = d;
        detail::project_affine(ga, da, mats);
        const HermMat3 gi = ga + pg, di = da + pd;
        const HermMat3 gc = psd_project(gi), dc = psd_project(di);
        pg = gi - gc;
        pd = di - dc;
        const double res = decomposition_residual(gc, dc, mats);
        if (res < cfg.feas_tol) {
            FeasibilityResult r;
            r.feasible = true;
            r.gamma = gc;
            r.delta = dc;
            r.residual = res;
            r.iterations = k;
            return r;
        }
        const double gap = detail::pair_distance(ga, da, gc, dc);
        gap_hist.push_back(gap);
        const size_t win = static_cast<size_t>(cfg.stall_window);
        if (gap_hist.size() > win) {
            const double old = gap_hist[gap_hist.size() - 1 - win];
            if (std::abs(gap - old) < cfg.stall_rel * std::max(gap, 1e-30) && gap > cfg.infeas_tol) {
                FeasibilityResult r;
                r.feasible = false;
                r.gap = gap;
                r.residual = res;
                r.iterations = k;
                return r;
            }
        }
        g = gc;
        d = dc;
    }
    throw SolverError(ErrorKind::StallWithoutVerdict, "feasible_pair",
                      "no verdict within " + std::to_string(cfg.max_iter) + " iterations");
}

// ---------------------------------------------------------------------------
// rank-one vectors

/// b from a via the first column of the normalized decomposition:
/// b = (sqrt(1-a1^2), (1 - a1 a2)/sqrt(1-a1^2), (1 - a1 a3)/sqrt(1-a1^2)).
inline CVec3 b_from_a(const CVec3& a) {
    const double a1 = a[0].real();
    if (std::abs(a[0].imag()) > 1e-9 || a1 < 0.0)
        throw SolverError(ErrorKind::InvalidInput, "b_from_a", "a1 must be real and nonnegative");
    if (a1 >= 1.0 - 1e-12)
        throw SolverError(ErrorKind::DegenerateFirstEntry, "b_from_a", "a1 too close to 1");
    const double s = std::sqrt(1.0 - a1 * a1);
    return {{s, (1.0 - a1 * a[1]) / s, (1.0 - a1 * a[2]) / s}};
}

namespace detail {

/// Rotate u by a unimodular phase so its first entry of magnitude > 1e-12
/// becomes positive real.
inline CVec3 fix_phase(const CVec3& u) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(u[i]) > 1e-12) {
            const cplx ph = std::conj(u[i]) / std::abs(u[i]);
            return u * ph;
        }
    }
    return u;
}

}  // namespace detail

/// Rank-one vectors of a near-rank-one PSD pair: a = sqrt(mu1) v1 with the
/// phase fixed (a1 >= 0, b1 > 0).
inline std::pair<CVec3, CVec3> extract_rank_one(const HermMat3& gamma, const HermMat3& delta,
                                                double gap_tol = 1e-6) {
    auto extract = [&](const HermMat3& m, const char* which) {
        const Eig3 eig = herm_eig3(m);
        if (eig.values[0] <= 0.0 || eig.values[1] > gap_tol * eig.values[0] ||
            eig.values[2] < -gap_tol * eig.values[0])
            throw SolverError(ErrorKind::NotRankOne, "extract_rank_one",
                              std::string(which) + " is not close to a rank-one PSD matrix");
        return detail::fix_phase(eig.vectors.col(0) * cplx(std::sqrt(eig.values[0])));
    };
    return {extract(gamma, "Gamma"), extract(delta, "Delta")};
}

// ---------------------------------------------------------------------------
// the reduced rank-one system and its stationarity structure
//
// Unknowns y = (a1, Re a2, Im a2, Re a3, Im a3) with b eliminated through the
// first column; residual rows are entries (2,2), (3,3) and Re/Im of (2,3) of
// W(t) = L1 . (a x a) + L2 . (b x b). Solutions at fixed t < t* form curves;
// the extremal point is the maximum of t over the solution manifold, located
// by a Newton iteration on the constrained-maximum stationarity system.

namespace detail {

struct ReducedSystem {
    // normalized problem constants
    cplx alpha2, alpha3, beta2, beta3, w2, w3;
    double p2, p3, q2, q3;  // 1 - |alpha|^2, 1 - |beta|^2
    cplx m1, m2;            // 1 - conj(alpha2) alpha3, 1 - conj(beta2) beta3

    explicit ReducedSystem(const PickData3& normalized) {
        alpha2 = normalized.nodes[1].z1;
        alpha3 = normalized.nodes[2].z1;
        beta2 = normalized.nodes[1].z2;
        beta3 = normalized.nodes[2].z2;
        w2 = normalized.targets[1];
        w3 = normalized.targets[2];
        p2 = 1.0 - std::norm(alpha2);
        p3 = 1.0 - std::norm(alpha3);
        q2 = 1.0 - std::norm(beta2);
        q3 = 1.0 - std::norm(beta3);
        m1 = 1.0 - std::conj(alpha2) * alpha3;
        m2 = 1.0 - std::conj(beta2) * beta3;
    }

    bool valid(const std::array<double, 6>& z) const { return 1.0 - z[0] * z[0] > 1e-12; }

    std::array<double, 4> residual(const std::array<double, 6>& z) const {
        const double a1 = z[0];
        const cplx a2(z[1], z[2]), a3(z[3], z[4]);
        const double t = z[5];
        const double s2 = 1.0 - a1 * a1;
        const double s = std::sqrt(s2);
        const cplx b2 = (1.0 - a1 * a2) / s;
        const cplx b3 = (1.0 - a1 * a3) / s;
        const double g1 = std::norm(a2) * p2 + std::norm(b2) * q2 - 1.0 + t * t * std::norm(w2);
        const double g2 = std::norm(a3) * p3 + std::norm(b3) * q3 - 1.0 + t * t * std::norm(w3);
        const cplx gc = a2 * std::conj(a3) * m1 + b2 * std::conj(b3) * m2 - 1.0 +
                        t * t * std::conj(w2) * w3;
        return {g1, g2, gc.real(), gc.imag()};
    }

    /// 4x6 Jacobian w.r.t. (a1, Re a2, Im a2, Re a3, Im a3, t), row major.
    std::array<double, 24> jacobian(const std::array<double, 6>& z) const {
        const double a1 = z[0];
        const cplx a2(z[1], z[2]), a3(z[3], z[4]);
        const double t = z[5];
        const double s2 = 1.0 - a1 * a1;
        const double s = std::sqrt(s2);
        const cplx b2 = (1.0 - a1 * a2) / s;
        const cplx b3 = (1.0 - a1 * a3) / s;
        const cplx db2_da1 = -a2 / s + a1 * b2 / s2;
        const cplx db3_da1 = -a3 / s + a1 * b3 / s2;
        const double dbda = -a1 / s;  // d b_k / d a_k (holomorphic part)

        std::array<double, 24> J{};
        auto set = [&J](int r, int c, double v) { J[static_cast<size_t>(6 * r + c)] = v; };

        const cplx e2 = std::conj(b2) * dbda;
        set(0, 0, q2 * 2.0 * (std::conj(b2) * db2_da1).real());
        set(0, 1, 2.0 * p2 * z[1] + 2.0 * q2 * e2.real());
        set(0, 2, 2.0 * p2 * z[2] - 2.0 * q2 * e2.imag());
        set(0, 5, 2.0 * t * std::norm(w2));

        const cplx e3 = std::conj(b3) * dbda;
        set(1, 0, q3 * 2.0 * (std::conj(b3) * db3_da1).real());
        set(1, 3, 2.0 * p3 * z[3] + 2.0 * q3 * e3.real());
        set(1, 4, 2.0 * p3 * z[4] - 2.0 * q3 * e3.imag());
        set(1, 5, 2.0 * t * std::norm(w3));

        const cplx dgc_da1 = m2 * (db2_da1 * std::conj(b3) + b2 * std::conj(db3_da1));
        const cplx c2 = std::conj(a3) * m1 + m2 * std::conj(b3) * dbda;
        const cplx c3 = a2 * m1 + b2 * m2 * dbda;
        const cplx dgc_dt = 2.0 * t * std::conj(w2) * w3;
        const std::array<std::pair<int, cplx>, 6> cols = {
            std::pair<int, cplx>{0, dgc_da1}, {1, c2},          {2, cplx(0, 1) * c2},
            {3, c3},                          {4, -cplx(0, 1) * c3}, {5, dgc_dt}};
        for (const auto& [c, v] : cols) {
            set(2, c, v.real());
            set(3, c, v.imag());
        }
        return J;
    }
};

/// In-place Gaussian elimination with partial pivoting; returns false when the
/// pivot collapses.
template <int N>
bool solve_linear(std::array<double, N * N>& a, std::array<double, N>& b) {
    std::array<int, N> piv;
    for (int i = 0; i < N; ++i) piv[static_cast<size_t>(i)] = i;
    for (int col = 0; col < N; ++col) {
        int best = col;
        double mag = std::abs(a[static_cast<size_t>(N * col + col)]);
        for (int r = col + 1; r < N; ++r) {
            const double m = std::abs(a[static_cast<size_t>(N * r + col)]);
            if (m > mag) {
                mag = m;
                best = r;
            }
        }
        if (mag < 1e-300) return false;
        if (best != col) {
            for (int c = 0; c < N; ++c)
                std::swap(a[static_cast<size_t>(N * col + c)], a[static_cast<size_t>(N * best + c)]);
            std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(best)]);
        }
        for (int r = col + 1; r < N; ++r) {
            const double f = a[static_cast<size_t>(N * r + col)] / a[static_cast<size_t>(N * col + col)];
            if (f == 0.0) continue;
            for (int c = col; c < N; ++c)
                a[static_cast<size_t>(N * r + c)] -= f * a[static_cast<size_t>(N * col + c)];
            b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
        }
    }
    for (int r = N - 1; r >= 0; --r) {
        double s = b[static_cast<size_t>(r)];
        for (int c = r + 1; c < N; ++c) s -= a[static_cast<size_t>(N * r + c)] * b[static_cast<size_t>(c)];
        b[static_cast<size_t>(r)] = s / a[static_cast<size_t>(N * r + r)];
    }
    return true;
}

struct LmOutcome {
    std::array<double, 5> y{};
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

/// Levenberg-Marquardt on the reduced system at fixed t. Solutions are
/// non-isolated below the extremal scaling, so the normal matrix is damped
/// rather than inverted.
inline LmOutcome lm_fixed_t(const ReducedSystem& sys, std::array<double, 5> y, double t,
                            int max_iter = 120, double tol = 1e-13) {
    double nu = 1e-8;
    LmOutcome out;
    for (int it = 0; it < max_iter; ++it) {
        const std::array<double, 6> z = {y[0], y[1], y[2], y[3], y[4], t};
        if (!sys.valid(z)) break;
        const auto f = sys.residual(z);
        const double nf = std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2] + f[3] * f[3]);
        if (nf < tol) {
            out.y = y;
            out.residual = nf;
            out.converged = true;
            return out;
        }
        const auto J = sys.jacobian(z);
        std::array<double, 25> jtj{};
        std::array<double, 5> jtf{};
        for (int r = 0; r < 4; ++r)
            for (int i = 0; i < 5; ++i) {
                jtf[static_cast<size_t>(i)] += J[static_cast<size_t>(6 * r + i)] * f[static_cast<size_t>(r)];
                for (int j = 0; j < 5; ++j)
                    jtj[static_cast<size_t>(5 * i + j)] +=
                        J[static_cast<size_t>(6 * r + i)] * J[static_cast<size_t>(6 * r + j)];
            }
        bool stepped = false;
        for (int tries = 0; tries < 40; ++tries) {
            std::array<double, 25> lhs = jtj;
            for (int i = 0; i < 5; ++i) lhs[static_cast<size_t>(6 * i)] += nu;
            std::array<double, 5> rhs;
            for (int i = 0; i < 5; ++i) rhs[static_cast<size_t>(i)] = -jtf[static_cast<size_t>(i)];
            if (!solve_linear<5>(lhs, rhs)) {
                nu *= 10.0;
                continue;
            }
            std::array<double, 5> yn;
            for (int i = 0; i < 5; ++i) yn[static_cast<size_t>(i)] = y[static_cast<size_t>(i)] + rhs[static_cast<size_t>(i)];
            const std::array<double, 6> zn = {yn[0], yn[1], yn[2], yn[3], yn[4], t};
            if (std::abs(yn[0]) < 0.99999 && sys.valid(zn)) {
                const auto fn = sys.residual(zn);
                const double nfn =
                    std::sqrt(fn[0] * fn[0] + fn[1] * fn[1] + fn[2] * fn[2] + fn[3] * fn[3]);
                if (nfn < nf) {
                    y = yn;
                    nu = std::max(nu * 0.3, 1e-14);
                    stepped = true;
                    break;
                }
            }
            nu *= 10.0;
        }
        if (!stepped) {
            out.y = y;
            out.residual = nf;
            return out;
        }
    }
    const std::array<double, 6> z = {y[0], y[1], y[2], y[3], y[4], t};
    out.y = y;
    const auto f = sys.residual(z);
    out.residual = std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2] + f[3] * f[3]);
    out.converged = out.residual < tol;
    return out;
}

struct SummitOutcome {
    std::array<double, 6> z{};  ///< (a1, Re a2, Im a2, Re a3, Im a3, t*)
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Newton iteration on the stationarity system of `max t s.t. G(y, t) = 0`:
/// unknowns (y, t, mu) with grad(t) = J^T mu and G = 0. The Jacobian of the
/// stationarity residual is formed by central differences of the analytic
/// first-order terms.
inline SummitOutcome kkt_summit(const ReducedSystem& sys, std::array<double, 6> z0,
                                int max_iter = 100, double tol = 5e-14) {
    auto residual = [&sys](const std::array<double, 10>& v, std::array<double, 10>& out) -> bool {
        std::array<double, 6> z;
        for (int i = 0; i < 6; ++i) z[static_cast<size_t>(i)] = v[static_cast<size_t>(i)];
        if (!sys.valid(z) || std::abs(z[0]) >= 0.99999) return false;
        const auto J = sys.jacobian(z);
        const auto g = sys.residual(z);
        for (int c = 0; c < 6; ++c) {
            double s = (c == 5) ? 1.0 : 0.0;
            for (int r = 0; r < 4; ++r)
                s -= J[static_cast<size_t>(6 * r + c)] * v[static_cast<size_t>(6 + r)];
            out[static_cast<size_t>(c)] = s;
        }
        for (int r = 0; r < 4; ++r) out[static_cast<size_t>(6 + r)] = g[static_cast<size_t>(r)];
        return true;
    };

    // multiplier seed: least squares J^T mu ~ grad(t) via the 4x4 normal system
    const auto J0 = sys.jacobian(z0);
    std::array<double, 16> jjt{};
    std::array<double, 4> rhs{};
    for (int r = 0; r < 4; ++r) {
        rhs[static_cast<size_t>(r)] = J0[static_cast<size_t>(6 * r + 5)];  // row r of J times grad(t)
        for (int c = 0; c < 4; ++c)
            for (int k = 0; k < 6; ++k)
                jjt[static_cast<size_t>(4 * r + c)] +=
                    J0[static_cast<size_t>(6 * r + k)] * J0[static_cast<size_t>(6 * c + k)];
    }
    std::array<double, 4> mu = rhs;
    {
        std::array<double, 16> lhs = jjt;
        for (int i = 0; i < 4; ++i) lhs[static_cast<size_t>(5 * i)] += 1e-12;
        if (!solve_linear<4>(lhs, mu)) mu = {0, 0, 0, 0};
    }

    std::array<double, 10> v;
    for (int i = 0; i < 6; ++i) v[static_cast<size_t>(i)] = z0[static_cast<size_t>(i)];
    for (int i = 0; i < 4; ++i) v[static_cast<size_t>(6 + i)] = mu[static_cast<size_t>(i)];

    SummitOutcome out;
    std::array<double, 10> R;
    if (!residual(v, R)) return out;

    for (int it = 0; it < max_iter; ++it) {
        double nr = 0;
        for (double x : R) nr += x * x;
        nr = std::sqrt(nr);
        out.iterations = it;
        if (nr < tol) {
            for (int i = 0; i < 6; ++i) out.z[static_cast<size_t>(i)] = v[static_cast<size_t>(i)];
            out.residual = nr;
            out.converged = true;
            return out;
        }
        std::array<double, 100> JR{};
        std::array<double, 10> plus, minus;
        bool ok = true;
        for (int c = 0; c < 10 && ok; ++c) {
            const double h = 1e-7 * std::max(1.0, std::abs(v[static_cast<size_t>(c)]));
            auto vp = v, vm = v;
            vp[static_cast<size_t>(c)] += h;
            vm[static_cast<size_t>(c)] -= h;
            ok = residual(vp, plus) && residual(vm, minus);
            for (int r = 0; r < 10 && ok; ++r)
                JR[static_cast<size_t>(10 * r + c)] =
                    (plus[static_cast<size_t>(r)] - minus[static_cast<size_t>(r)]) / (2.0 * h);
        }
        if (!ok) break;
        std::array<double, 10> dv;
        for (int i = 0; i < 10; ++i) dv[static_cast<size_t>(i)] = -R[static_cast<size_t>(i)];
        if (!solve_linear<10>(JR, dv)) break;
        double lam = 1.0;
        bool stepped = false;
        for (int ls = 0; ls < 40; ++ls) {
            auto vn = v;
            for (int i = 0; i < 10; ++i) vn[static_cast<size_t>(i)] += lam * dv[static_cast<size_t>(i)];
            std::array<double, 10> Rn;
            if (residual(vn, Rn)) {
                double nrn = 0;
                for (double x : Rn) nrn += x * x;
                if (std::sqrt(nrn) < nr) {
                    v = vn;
                    R = Rn;
                    stepped = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if (!stepped) break;
    }
    double nr = 0;
    for (double x : R) nr += x * x;
    out.residual = std::sqrt(nr);
    for (int i = 0; i < 6; ++i) out.z[static_cast<size_t>(i)] = v[static_cast<size_t>(i)];
    out.converged = out.residual < tol;
    return out;
}

/// Douglas-Rachford splitting between the affine slice and the PSD x PSD
/// cone. Returns the (machine-exact) feasible pair when one is reached within
/// the budget; nullopt means "not proven feasible" (slow or infeasible) —
/// callers outside use it only as a conservative bracketing predicate.
struct DrOutcome {
    std::optional<std::pair<HermMat3, HermMat3>> pair;
    int iterations = 0;
};

inline DrOutcome dr_reach_feasible(const PickMatrices& mats, int budget, double feas_tol = 1e-11) {
    HermMat3 g = HermMat3::zero(), d = HermMat3::zero();
    double plateau_ref = -1.0;
    int plateau_age = 0;
    DrOutcome out;
    for (int k = 1; k <= budget; ++k) {
        const HermMat3 gc = psd_project(g), dc = psd_project(d);
        const double res = decomposition_residual(gc, dc, mats);
        if (res < feas_tol) {
            out.pair = {gc, dc};
            out.iterations = k;
            return out;
        }
        HermMat3 rg = gc * 2.0 - g, rd = dc * 2.0 - d;
        detail::project_affine(rg, rd, mats);
        const HermMat3 dg = rg - gc, dd = rd - dc;
        g = g + dg;
        d = d + dd;
        const double disp = detail::pair_distance(rg, rd, gc, dc);
        // displacement plateau: both verdicts are out of cheap reach; bail
        if (plateau_ref >= 0.0 && std::abs(disp - plateau_ref) < 1e-9 * std::max(disp, 1e-30)) {
            if (++plateau_age > 1500) {
                out.iterations = k;
                return out;
            }
        } else {
            plateau_ref = disp;
            plateau_age = 0;
        }
    }
    out.iterations = budget;
    return out;
}

/// sup{ t : rho(t u, t v) <= K }; +inf when the pair never binds.
inline double two_point_cap(double K, cplx u, cplx v) {
    const double inf = std::numeric_limits<double>::infinity();
    const double d = std::norm(u - v);
    if (d < 1e-30) return inf;
    if (K <= 0.0) return 0.0;
    const cplx c = std::conj(v) * u;
    const double A = K * K * std::norm(c);
    const double B = -(2.0 * K * K * c.real() + d);
    const double C = K * K;
    if (A < 1e-30) {
        if (B >= 0.0) return inf;
        const double tau = -C / B;
        return std::sqrt(tau);
    }
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) return inf;
    const double sq = std::sqrt(disc);
    for (double tau : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)})
        if (tau > 0.0) return std::sqrt(tau);
    return inf;
}

/// sup{ t : the one-variable Pick matrix of the t-scaled data is PSD }.
inline double one_var_extremal_scaling(const PickData3& normalized, int coord, double t_max) {
    double lo = 0.0, hi = t_max;
    const auto psd_at = [&](double t) {
        return is_psd(one_variable_pick(normalized.scaled_targets(t), coord), 1e-12);
    };
    if (psd_at(hi)) return hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (psd_at(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// jan-system residuals and Newton refinement

/// Residuals of the scaled normalized-frame equations that determine a:
/// [jan11, jan13, Re jan12, Im jan12], with b eliminated through the first
/// column. All four vanish iff rows 2-3 of the decomposition hold.
inline std::array<double, 4> residual_jan(const CVec3& a, const PickData3& normalized) {
    if (std::abs(normalized.nodes[0].z1) > 1e-12 || std::abs(normalized.nodes[0].z2) > 1e-12 ||
        std::abs(normalized.targets[0]) > 1e-12)
        throw SolverError(ErrorKind::InvalidInput, "residual_jan",
                          "data must be normalized: lambda1 = (0,0), w1 = 0");
    const double a1 = a[0].real();
    const double s2 = 1.0 - a1 * a1;
    const cplx a2 = a[1], a3 = a[2];
    const cplx al2 = normalized.nodes[1].z1, al3 = normalized.nodes[2].z1;
    const cplx be2 = normalized.nodes[1].z2, be3 = normalized.nodes[2].z2;
    const cplx w2 = normalized.targets[1], w3 = normalized.targets[2];

    const double r11 = s2 * (1.0 - std::norm(w2)) -
                       (s2 * std::norm(a2) * (1.0 - std::norm(al2)) +
                        std::norm(1.0 - a1 * a2) * (1.0 - std::norm(be2)));
    const double r13 = s2 * (1.0 - std::norm(w3)) -
                       (s2 * std::norm(a3) * (1.0 - std::norm(al3)) +
                        std::norm(1.0 - a1 * a3) * (1.0 - std::norm(be3)));
    const cplx r12 = s2 * (1.0 - std::conj(w2) * w3) -
                     (s2 * a2 * std::conj(a3) * (1.0 - std::conj(al2) * al3) +
                      (1.0 - a1 * a2) * (1.0 - a1 * std::conj(a3)) * (1.0 - std::conj(be2) * be3));
    return {r11, r13, r12.real(), r12.imag()};
}

namespace detail {

/// Nine real residuals of W = L1.(a x a) + L2.(b x b) on the normalized
/// problem, rows (1,1), (2,1), (3,1), (2,2), (3,3), (2,3) with b1 eliminated.
/// Unknowns x = (a1, Re a2, Im a2, Re a3, Im a3, Re b2, Im b2, Re b3, Im b3).
struct FullSystem {
    PickMatrices mats;

    explicit FullSystem(const PickData3& normalized) : mats(build_matrices(normalized)) {}

    std::array<double, 9> residual(const std::array<double, 9>& x) const {
        const double a1 = x[0];
        const double b1 = std::sqrt(std::max(1.0 - a1 * a1, 0.0));
        const cplx a2(x[1], x[2]), a3(x[3], x[4]), b2(x[5], x[6]), b3(x[7], x[8]);
        const auto& W = mats.W;
        const auto& L1 = mats.L1;
        const auto& L2 = mats.L2;
        const double r11 = (L1(0, 0) * a1 * a1 + L2(0, 0) * b1 * b1 - W(0, 0)).real();
        const cplx r21 = L1(1, 0) * a2 * a1 + L2(1, 0) * b2 * b1 - W(1, 0);
        const cplx r31 = L1(2, 0) * a3 * a1 + L2(2, 0) * b3 * b1 - W(2, 0);
        const double r22 = (L1(1, 1) * std::norm(a2) + L2(1, 1) * std::norm(b2) - W(1, 1)).real();
        const double r33 = (L1(2, 2) * std::norm(a3) + L2(2, 2) * std::norm(b3) - W(2, 2)).real();
        const cplx r23 = L1(1, 2) * a2 * std::conj(a3) + L2(1, 2) * b2 * std::conj(b3) - W(1, 2);
        return {r11, r21.real(), r21.imag(), r31.real(), r31.imag(), r22, r33, r23.real(), r23.imag()};
    }

    std::array<double, 81> jacobian(const std::array<double, 9>& x) const {
        std::array<double, 81> J{};
        for (int c = 0; c < 9; ++c) {
            const double h = 1e-8 * std::max(1.0, std::abs(x[static_cast<size_t>(c)]));
            auto xp = x, xm = x;
            xp[static_cast<size_t>(c)] += h;
            xm[static_cast<size_t>(c)] -= h;
            const auto fp = residual(xp);
            const auto fm = residual(xm);
            for (int r = 0; r < 9; ++r)
                J[static_cast<size_t>(9 * r + c)] =
                    (fp[static_cast<size_t>(r)] - fm[static_cast<size_t>(r)]) / (2.0 * h);
        }
        return J;
    }
};

}  // namespace detail

/// Damped Newton (Levenberg) on the nine-equation system at the given
/// (already scaled) normalized data. Returns the refined a; b follows from
/// the first column. The Jacobian is singular along the sub-extremal solution
/// curves, so steps are damped rather than taken raw.
inline CVec3 refine_newton(const CVec3& seed_a, const PickData3& normalized, const SolverConfig& cfg) {
    detail::FullSystem sys(normalized);
    CVec3 b = b_from_a(seed_a);
    std::array<double, 9> x = {seed_a[0].real(), seed_a[1].real(), seed_a[1].imag(),
                               seed_a[2].real(), seed_a[2].imag(), b[1].real(),
                               b[1].imag(),      b[2].real(),      b[2].imag()};
    double nu = 1e-10;
    double nf = 0.0;
    double min_sv_proxy = 1.0;
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        const auto f = sys.residual(x);
        nf = 0.0;
        for (double v : f) nf = std::max(nf, std::abs(v));
        if (nf < cfg.newton_tol)
            return {{x[0], cplx(x[1], x[2]), cplx(x[3], x[4])}};
        const auto J = sys.jacobian(x);
        std::array<double, 81> jtj{};
        std::array<double, 9> jtf{};
        for (int r = 0; r < 9; ++r)
            for (int i = 0; i < 9; ++i) {
                jtf[static_cast<size_t>(i)] += J[static_cast<size_t>(9 * r + i)] * f[static_cast<size_t>(r)];
                for (int j = 0; j < 9; ++j)
                    jtj[static_cast<size_t>(9 * i + j)] +=
                        J[static_cast<size_t>(9 * r + i)] * J[static_cast<size_t>(9 * r + j)];
            }
        double trace = 0.0, mindiag = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 9; ++i) {
            trace += jtj[static_cast<size_t>(10 * i)];
            mindiag = std::min(mindiag, jtj[static_cast<size_t>(10 * i)]);
        }
        min_sv_proxy = mindiag / std::max(trace, 1e-30);
        bool stepped = false;
        for (int tries = 0; tries < 40 && !stepped; ++tries) {
            std::array<double, 81> lhs = jtj;
            for (int i = 0; i < 9; ++i) lhs[static_cast<size_t>(10 * i)] += nu * std::max(trace, 1e-30);
            std::array<double, 9> step;
            for (int i = 0; i < 9; ++i) step[static_cast<size_t>(i)] = -jtf[static_cast<size_t>(i)];
            if (!detail::solve_linear<9>(lhs, step)) {
                nu *= 10.0;
                continue;
            }
            auto xn = x;
            for (int i = 0; i < 9; ++i) xn[static_cast<size_t>(i)] += step[static_cast<size_t>(i)];
            if (std::abs(xn[0]) < 1.0 - 1e-12) {
                const auto fn = sys.residual(xn);
                double nfn = 0.0;
                for (double v : fn) nfn = std::max(nfn, std::abs(v));
                if (nfn < nf) {
                    x = xn;
                    nu = std::max(nu * 0.25, 1e-14);
                    stepped = true;
                }
            }
            if (!stepped) nu *= 10.0;
        }
        if (!stepped) break;
    }
    if (min_sv_proxy < 1e-14)
        throw SolverError(ErrorKind::JacobianSingular, "refine_newton",
                          "normal system rank-deficient; residual " + std::to_string(nf));
    throw SolverError(ErrorKind::NoConvergence, "refine_newton",
                      "residual " + std::to_string(nf) + " after " +
                          std::to_string(cfg.newton_max_iter) + " iterations");
}

// ---------------------------------------------------------------------------
// closed form interpolant

/// Cramer's-rule interpolant from a rank-one pair on the normalized problem:
/// both determinants expand over {1, z1, z2, z1 z2} (columns are affine in one
/// coordinate each), so no pure square can occur.
inline RationalInner2 cramer_phi(const CVec3& a, const CVec3& b, const PickData3& normalized) {
    CVec3 c10 = a, c20 = b, c11, c21;
    for (int i = 0; i < 3; ++i) {
        c11[i] = -a[i] * std::conj(normalized.nodes[static_cast<size_t>(i)].z1);
        c21[i] = -b[i] * std::conj(normalized.nodes[static_cast<size_t>(i)].z2);
    }
    CVec3 ones = {{1.0, 1.0, 1.0}};
    CVec3 wbar;
    for (int i = 0; i < 3; ++i) wbar[i] = std::conj(normalized.targets[static_cast<size_t>(i)]);

    auto det = [](const CVec3& u, const CVec3& v, const CVec3& s) {
        return u[0] * (v[1] * s[2] - v[2] * s[1]) - v[0] * (u[1] * s[2] - u[2] * s[1]) +
               s[0] * (u[1] * v[2] - u[2] * v[1]);
    };
    auto expand = [&](const CVec3& c3) {
        return std::array<cplx, 4>{det(c10, c20, c3), det(c11, c20, c3), det(c10, c21, c3),
                                   det(c11, c21, c3)};
    };

    RationalInner2 phi;
    phi.num = expand(ones);
    phi.den = expand(wbar);

    double den_scale = 0.0;
    for (const auto& z : phi.den) den_scale = std::max(den_scale, std::abs(z));
    if (den_scale < 1e-14)
        throw SolverError(ErrorKind::IdenticallyVanishingDenominator, "cramer_phi",
                          "denominator determinant vanishes identically; assumptions (b)/(c) fail");
    if (std::abs(phi.den[0]) < 1e-12 * den_scale)
        throw SolverError(ErrorKind::IdenticallyVanishingDenominator, "cramer_phi",
                          "denominator vanishes at the origin; cannot normalize");
    const cplx d0 = phi.den[0];
    for (auto& z : phi.num) z /= d0;
    for (auto& z : phi.den) z /= d0;
    return phi;
}

}  // namespace bipick
