#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "bipick/config.hpp"
#include "bipick/solve.hpp"

namespace bipick {

using nlohmann::json;

namespace io {

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw SolverError(ErrorKind::InvalidInput, "parse", "field '" + field + "' must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json herm_to_json(const HermMat3& m) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) {
        json row = json::array();
        for (int j = 0; j < 3; ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

inline HermMat3 herm_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3)
        throw SolverError(ErrorKind::InvalidInput, "parse", "field '" + field + "' must be a 3x3 array");
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
        if (!j[static_cast<size_t>(i)].is_array() || j[static_cast<size_t>(i)].size() != 3)
            throw SolverError(ErrorKind::InvalidInput, "parse", "field '" + field + "' must be a 3x3 array");
        for (int k = 0; k < 3; ++k)
            m(i, k) = complex_from_json(j[static_cast<size_t>(i)][static_cast<size_t>(k)], field);
    }
    return HermMat3(m, 1e-9);
}

inline CVec3 vec_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3)
        throw SolverError(ErrorKind::InvalidInput, "parse", "field '" + field + "' must have 3 entries");
    CVec3 v;
    for (int i = 0; i < 3; ++i) v[i] = complex_from_json(j[static_cast<size_t>(i)], field);
    return v;
}

// ---------------------------------------------------------------------------
// SolverConfig

inline void apply_config_field(SolverConfig& cfg, const std::string& key, const json& value) {
    auto num = [&](double& slot) { slot = value.get<double>(); };
    auto integer = [&](int& slot) { slot = value.get<int>(); };
    if (key == "feas_tol") num(cfg.feas_tol);
    else if (key == "infeas_tol") num(cfg.infeas_tol);
    else if (key == "max_iter") integer(cfg.max_iter);
    else if (key == "stall_window") integer(cfg.stall_window);
    else if (key == "stall_rel") num(cfg.stall_rel);
    else if (key == "t_tol") num(cfg.t_tol);
    else if (key == "probe_budget") integer(cfg.probe_budget);
    else if (key == "bisect_depth") integer(cfg.bisect_depth);
    else if (key == "bracket_rel_width") num(cfg.bracket_rel_width);
    else if (key == "island_starts") integer(cfg.island_starts);
    else if (key == "newton_tol") num(cfg.newton_tol);
    else if (key == "newton_max_iter") integer(cfg.newton_max_iter);
    else if (key == "rank_one_gap") num(cfg.rank_one_gap);
    else if (key == "psd_tol") num(cfg.psd_tol);
    else if (key == "hermitian_tol") num(cfg.hermitian_tol);
    else if (key == "gram_tol") num(cfg.gram_tol);
    else if (key == "mgs_rank_tol") num(cfg.mgs_rank_tol);
    else if (key == "balanced_tol") num(cfg.balanced_tol);
    else if (key == "two_point_band") num(cfg.two_point_band);
    else if (key == "classify_tol") num(cfg.classify_tol);
    else if (key == "degenerate_band") num(cfg.degenerate_band);
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else
        throw SolverError(ErrorKind::InvalidInput, "parse", "unknown config field '" + key + "'");
}

inline SolverConfig config_from_json(const json& j, SolverConfig base = {}) {
    if (!j.is_object())
        throw SolverError(ErrorKind::InvalidInput, "parse", "field 'config' must be an object");
    for (const auto& [key, value] : j.items()) apply_config_field(base, key, value);
    return base;
}

inline json config_to_json(const SolverConfig& c) {
    return json{{"feas_tol", c.feas_tol},
                {"infeas_tol", c.infeas_tol},
                {"max_iter", c.max_iter},
                {"stall_window", c.stall_window},
                {"stall_rel", c.stall_rel},
                {"t_tol", c.t_tol},
                {"probe_budget", c.probe_budget},
                {"bisect_depth", c.bisect_depth},
                {"bracket_rel_width", c.bracket_rel_width},
                {"island_starts", c.island_starts},
                {"newton_tol", c.newton_tol},
                {"newton_max_iter", c.newton_max_iter},
                {"rank_one_gap", c.rank_one_gap},
                {"psd_tol", c.psd_tol},
                {"hermitian_tol", c.hermitian_tol},
                {"gram_tol", c.gram_tol},
                {"mgs_rank_tol", c.mgs_rank_tol},
                {"balanced_tol", c.balanced_tol},
                {"two_point_band", c.two_point_band},
                {"classify_tol", c.classify_tol},
                {"degenerate_band", c.degenerate_band},
                {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// ProblemFile

struct ProblemFile {
    PickData3 data;
    SolverConfig config;
};

/// points: 3 x [re(z1), im(z1), re(z2), im(z2)]; targets: 3 x [re, im];
/// optional config object. Nodes must lie strictly inside the bidisk; targets
/// must be finite (the solve path treats them as a scaling direction).
inline ProblemFile parse_problem(const json& j, SolverConfig base = {}) {
    if (!j.is_object())
        throw SolverError(ErrorKind::InvalidInput, "parse", "problem file must be a JSON object");
    if (!j.contains("points"))
        throw SolverError(ErrorKind::InvalidInput, "parse", "missing field 'points'");
    if (!j.contains("targets"))
        throw SolverError(ErrorKind::InvalidInput, "parse", "missing field 'targets'");
    const json& pts = j["points"];
    const json& tgt = j["targets"];
    if (!pts.is_array() || pts.size() != 3)
        throw SolverError(ErrorKind::InvalidInput, "parse", "field 'points' must have exactly 3 entries");
    if (!tgt.is_array() || tgt.size() != 3)
        throw SolverError(ErrorKind::InvalidInput, "parse", "field 'targets' must have exactly 3 entries");

    std::array<cplx, 3> z1s, z2s, ws;
    for (size_t i = 0; i < 3; ++i) {
        const json& p = pts[i];
        if (!p.is_array() || p.size() != 4)
            throw SolverError(ErrorKind::InvalidInput, "parse",
                              "field 'points[" + std::to_string(i) + "]' must be [re1, im1, re2, im2]");
        for (const auto& v : p)
            if (!v.is_number())
                throw SolverError(ErrorKind::InvalidInput, "parse",
                                  "field 'points[" + std::to_string(i) + "]' must hold numbers");
        z1s[i] = {p[0].get<double>(), p[1].get<double>()};
        z2s[i] = {p[2].get<double>(), p[3].get<double>()};
        if (!(std::abs(z1s[i]) < 1.0 && std::abs(z2s[i]) < 1.0))
            throw SolverError(ErrorKind::InvalidInput, "parse",
                              "field 'points[" + std::to_string(i) + "]' lies outside the open bidisk");
        ws[i] = complex_from_json(tgt[i], "targets[" + std::to_string(i) + "]");
    }

    SolverConfig cfg = base;
    if (j.contains("config")) cfg = config_from_json(j["config"], base);

    try {
        return ProblemFile{PickData3({BidiskPoint(z1s[0], z2s[0]), BidiskPoint(z1s[1], z2s[1]),
                                      BidiskPoint(z1s[2], z2s[2])},
                                     ws),
                           cfg};
    } catch (const SolverError& e) {
        throw SolverError(ErrorKind::InvalidInput, "parse", e.what());
    }
}

inline json problem_to_json(const PickData3& data) {
    json pts = json::array();
    json tgt = json::array();
    for (size_t i = 0; i < 3; ++i) {
        pts.push_back(json::array({data.nodes[i].z1.real(), data.nodes[i].z1.imag(),
                                   data.nodes[i].z2.real(), data.nodes[i].z2.imag()}));
        tgt.push_back(complex_to_json(data.targets[i]));
    }
    return json{{"points", pts}, {"targets", tgt}};
}

// ---------------------------------------------------------------------------
// SolutionFile

inline json phi_to_json(const RationalInner2& phi) {
    json num = json::array(), den = json::array();
    for (size_t k = 0; k < 4; ++k) {
        num.push_back(complex_to_json(phi.num[k]));
        den.push_back(complex_to_json(phi.den[k]));
    }
    return json{{"num", num}, {"den", den}, {"monomials", json::array({"1", "z1", "z2", "z1z2"})}};
}

inline RationalInner2 phi_from_json(const json& j) {
    if (!j.is_object() || !j.contains("num") || !j.contains("den"))
        throw SolverError(ErrorKind::InvalidInput, "parse", "field 'phi' must hold 'num' and 'den'");
    RationalInner2 phi;
    const json& num = j["num"];
    const json& den = j["den"];
    if (!num.is_array() || num.size() != 4 || !den.is_array() || den.size() != 4)
        throw SolverError(ErrorKind::InvalidInput, "parse", "field 'phi' coefficients must be 4-vectors");
    for (size_t k = 0; k < 4; ++k) {
        phi.num[k] = complex_from_json(num[k], "phi.num");
        phi.den[k] = complex_from_json(den[k], "phi.den");
    }
    return phi;
}

inline json classification_to_json(const Classification& c) {
    json out{{"kind", to_string(c.kind)}, {"details", c.details}};
    if (c.kind == ProblemKind::TwoPointExtremal && c.pair_i >= 0)
        out["pair"] = json::array({c.pair_i + 1, c.pair_j + 1});
    return out;
}

inline json solution_to_json(const SolveReport& rep) {
    json a = json::array(), b = json::array();
    for (int i = 0; i < 3; ++i) {
        a.push_back(complex_to_json(rep.pair.a[i]));
        b.push_back(complex_to_json(rep.pair.b[i]));
    }
    const auto& d = rep.diagnostics;
    return json{{"t_star", rep.t_star},
                {"a", a},
                {"b", b},
                {"gamma", herm_to_json(rep.pair.gamma)},
                {"delta", herm_to_json(rep.pair.delta)},
                {"phi", phi_to_json(rep.phi)},
                {"residuals",
                 {{"decomposition", d.decomposition_residual},
                  {"newton", d.newton_residual},
                  {"summit", d.summit_residual},
                  {"interpolation_max", d.interpolation_max},
                  {"innerness_torus_max", d.innerness_torus_max},
                  {"rank_gap_gamma", d.rank_gap_gamma},
                  {"rank_gap_delta", d.rank_gap_delta}}},
                {"classification", classification_to_json(rep.classification)}};
}

struct SolutionFile {
    double t_star = 0.0;
    CVec3 a, b;
    HermMat3 gamma, delta;
    RationalInner2 phi;
};

inline SolutionFile parse_solution(const json& j) {
    if (!j.is_object())
        throw SolverError(ErrorKind::InvalidInput, "parse", "solution file must be a JSON object");
    for (const char* field : {"t_star", "a", "b", "gamma", "delta", "phi"})
        if (!j.contains(field))
            throw SolverError(ErrorKind::InvalidInput, "parse",
                              std::string("missing field '") + field + "'");
    SolutionFile s;
    if (!j["t_star"].is_number())
        throw SolverError(ErrorKind::InvalidInput, "parse", "field 't_star' must be a number");
    s.t_star = j["t_star"].get<double>();
    s.a = vec_from_json(j["a"], "a");
    s.b = vec_from_json(j["b"], "b");
    s.gamma = herm_from_json(j["gamma"], "gamma");
    s.delta = herm_from_json(j["delta"], "delta");
    s.phi = phi_from_json(j["phi"]);
    return s;
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SolverError(ErrorKind::InvalidInput, "parse", "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw SolverError(ErrorKind::InvalidInput, "parse", std::string("invalid JSON: ") + e.what());
    }
    return j;
}

}  // namespace io
}  // namespace bipick
