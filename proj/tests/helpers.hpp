#pragma once

#include <random>

#include "bipick/bipick.hpp"

namespace bipick::testing {

inline cplx rand_cplx(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    return {g(rng), g(rng)};
}

inline Mat3 rand_mat(std::mt19937_64& rng, double scale = 1.0) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = rand_cplx(rng, scale);
    return m;
}

inline HermMat3 rand_herm(std::mt19937_64& rng, double scale = 1.0) {
    const Mat3 m = rand_mat(rng, scale);
    return HermMat3::unchecked(m + m.adjoint());
}

inline HermMat3 rand_psd(std::mt19937_64& rng, double scale = 1.0) {
    const Mat3 m = rand_mat(rng, scale);
    return HermMat3::unchecked(m * m.adjoint());
}

inline CVec3 rand_vec(std::mt19937_64& rng, double scale = 1.0) {
    return {{rand_cplx(rng, scale), rand_cplx(rng, scale), rand_cplx(rng, scale)}};
}

/// Haar-ish random unitary via Gram-Schmidt on Gaussian columns.
inline Mat3 rand_unitary(std::mt19937_64& rng) {
    std::array<CVec3, 3> cols = {rand_vec(rng), rand_vec(rng), rand_vec(rng)};
    for (int j = 0; j < 3; ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (int k = 0; k < j; ++k)
                cols[static_cast<size_t>(j)] =
                    cols[static_cast<size_t>(j)] -
                    cols[static_cast<size_t>(k)] * dot(cols[static_cast<size_t>(j)], cols[static_cast<size_t>(k)]);
        cols[static_cast<size_t>(j)] =
            cols[static_cast<size_t>(j)] * cplx(1.0 / cols[static_cast<size_t>(j)].norm());
    }
    Mat3 u;
    for (int j = 0; j < 3; ++j) u.set_col(j, cols[static_cast<size_t>(j)]);
    return u;
}

/// Random point of the bidisk with both coordinates of radius < rmax.
inline BidiskPoint rand_bidisk(std::mt19937_64& rng, double rmax = 0.7) {
    std::uniform_real_distribution<double> u(-rmax, rmax);
    return BidiskPoint(cplx(u(rng), u(rng)) * 0.7071, cplx(u(rng), u(rng)) * 0.7071);
}

/// Random Mobius disk automorphism z -> e^{i th} (z - p)/(1 - conj(p) z).
inline MobiusMap rand_automorphism(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    const cplx p(u(rng) * 0.7, u(rng) * 0.7);
    const double th = ang(rng);
    const cplx rot(std::cos(th), std::sin(th));
    MobiusMap m = MobiusMap::to_zero(p);
    m.a *= rot;
    m.b *= rot;
    return m;
}

/// Instance whose targets are values of the inner function realized by a
/// random unitary: solvable with norm one by construction, so t* >= 1.
struct RoundTripInstance {
    PickData3 data;
    Mat3 unitary;
};

inline RoundTripInstance random_round_trip(std::mt19937_64& rng, double rmax = 0.7) {
    for (int tries = 0; tries < 200; ++tries) {
        const Mat3 u = rand_unitary(rng);
        Realization r{u};
        std::array<BidiskPoint, 3> nodes = {rand_bidisk(rng, rmax), rand_bidisk(rng, rmax),
                                            rand_bidisk(rng, rmax)};
        std::array<cplx, 3> w;
        bool ok = true;
        for (size_t i = 0; i < 3; ++i) {
            w[i] = eval_transfer(r, nodes[i]);
            if (!(std::abs(w[i]) < 0.999)) ok = false;
        }
        if (!ok) continue;
        // nodes too close make poorly-scaled instances; resample
        double sep = 1e9;
        for (size_t i = 0; i < 3; ++i)
            for (size_t j = i + 1; j < 3; ++j)
                sep = std::min(sep, kobayashi_dist(nodes[i], nodes[j]));
        if (sep < 0.15) continue;
        try {
            PickData3 data(nodes, w);
            if (classify(data).kind != ProblemKind::NonDegenerateCandidate) continue;
            return {data, u};
        } catch (const SolverError&) {
            continue;
        }
    }
    throw std::runtime_error("could not build a round-trip instance");
}

}  // namespace bipick::testing
