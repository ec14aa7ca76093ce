// Command-line interface for the three-point bidisk Pick solver.
//
// Exit codes: 0 solved / all checks passed; 2 classified away (degenerate,
// two-point extremal, infeasible); 1 numerical failure; 64 malformed input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bipick/bipick.hpp"
#include "bipick/io.hpp"
#include "bipick/verify.hpp"

namespace {

using namespace bipick;
using nlohmann::json;

constexpr int kExitSolved = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitClassified = 2;
constexpr int kExitBadInput = 64;

struct GlobalOptions {
    std::string config_path;
    std::vector<std::string> tol_overrides;
    std::string out_path;
    bool quiet = false;
};

SolverConfig effective_config(const GlobalOptions& g, SolverConfig base = {}) {
    if (!g.config_path.empty()) base = io::config_from_json(io::load_json(g.config_path), base);
    for (const std::string& kv : g.tol_overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw SolverError(ErrorKind::InvalidInput, "parse",
                              "--tol expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        json value;
        try {
            value = json::parse(kv.substr(eq + 1));
        } catch (const json::parse_error&) {
            throw SolverError(ErrorKind::InvalidInput, "parse", "--tol value for '" + key + "' not numeric");
        }
        io::apply_config_field(base, key, value);
    }
    return base;
}

void emit(const GlobalOptions& g, const std::string& text) {
    if (g.out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(g.out_path);
    if (!out) throw SolverError(ErrorKind::InvalidInput, "output", "cannot write '" + g.out_path + "'");
    out << text << "\n";
}

int classify_exit(const SolverError& e) {
    switch (e.kind()) {
        case ErrorKind::InvalidInput:
        case ErrorKind::ZeroTargetRay:
        case ErrorKind::NotHermitian:
            return kExitBadInput;
        case ErrorKind::Infeasible:
            return kExitClassified;
        default:
            return kExitNumerical;
    }
}

std::vector<double> parse_doubles(const std::string& csv, size_t expect, const char* flag) {
    std::vector<double> vals;
    std::string token;
    std::stringstream ss(csv);
    while (std::getline(ss, token, ',')) {
        try {
            vals.push_back(std::stod(token));
        } catch (...) {
            throw SolverError(ErrorKind::InvalidInput, "parse",
                              std::string(flag) + " expects comma-separated numbers");
        }
    }
    if (vals.size() != expect)
        throw SolverError(ErrorKind::InvalidInput, "parse",
                          std::string(flag) + " expects " + std::to_string(expect) + " numbers");
    return vals;
}

int cmd_solve(const GlobalOptions& g, const std::string& in_path) {
    const io::ProblemFile pf = io::parse_problem(io::load_json(in_path), effective_config(g));
    const SolveReport rep = solve_extremal(pf.data, pf.config);
    if (!rep.solved) {
        emit(g, io::classification_to_json(rep.classification).dump(2));
        return kExitClassified;
    }
    emit(g, io::solution_to_json(rep).dump(2));
    if (!g.quiet)
        std::cerr << "solved: t_star = " << rep.t_star
                  << ", interpolation residual = " << rep.diagnostics.interpolation_max << "\n";
    return kExitSolved;
}

int cmd_verify(const GlobalOptions& g, const std::string& sol_path, const std::string& prob_path) {
    const io::ProblemFile pf = io::parse_problem(io::load_json(prob_path), effective_config(g));
    const io::SolutionFile sol = io::parse_solution(io::load_json(sol_path));
    const std::vector<CheckResult> checks = verify_solution(pf.data, sol);
    bool all = true;
    std::string report;
    char line[160];
    for (const CheckResult& c : checks) {
        all = all && c.pass;
        std::snprintf(line, sizeof line, "%-18s %s  measured %.3e  tolerance %.1e", c.name.c_str(),
                      c.pass ? "PASS" : "FAIL", c.measured, c.tolerance);
        report += line;
        report += "\n";
    }
    report += all ? "verify: PASS" : "verify: FAIL";
    emit(g, report);
    return all ? kExitSolved : kExitNumerical;
}

int cmd_classify(const GlobalOptions& g, const std::string& in_path) {
    const io::ProblemFile pf = io::parse_problem(io::load_json(in_path), effective_config(g));
    json out;
    try {
        out = io::classification_to_json(classify(pf.data, pf.config.classify_tol));
    } catch (const SolverError& e) {
        if (e.kind() != ErrorKind::Infeasible) throw;
        out = json{{"kind", "Infeasible"}, {"details", e.what()}};
    }
    emit(g, out.dump(2));
    return kExitSolved;
}

int cmd_eval(const GlobalOptions& g, const std::string& sol_path, const std::string& at, int grid,
             bool boundary) {
    const io::SolutionFile sol = io::parse_solution(io::load_json(sol_path));
    std::string csv = "re(z1),im(z1),re(z2),im(z2),re(phi),im(phi),abs(phi)\n";
    char line[220];
    auto add_row = [&](cplx z1, cplx z2) {
        const cplx v = sol.phi.eval(z1, z2);
        std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g", z1.real(),
                      z1.imag(), z2.real(), z2.imag(), v.real(), v.imag(), std::abs(v));
        csv += line;
        csv += "\n";
    };
    if (!at.empty()) {
        const auto v = parse_doubles(at, 4, "--at");
        add_row(cplx(v[0], v[1]), cplx(v[2], v[3]));
    } else if (grid > 0 && boundary) {
        for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j) {
                const double th = 2.0 * M_PI * (i + 0.5) / grid;
                const double ph = 2.0 * M_PI * (j + 0.5) / grid;
                add_row(std::polar(1.0, th), std::polar(1.0, ph));
            }
    } else if (grid > 0) {
        // interior sample: the real slice (-1, 1)^2, row-major
        for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j)
                add_row(cplx(-1.0 + 2.0 * (i + 0.5) / grid, 0.0), cplx(-1.0 + 2.0 * (j + 0.5) / grid, 0.0));
    } else {
        throw SolverError(ErrorKind::InvalidInput, "parse", "eval needs --at or --grid");
    }
    if (!csv.empty() && csv.back() == '\n') csv.pop_back();
    emit(g, csv);
    return kExitSolved;
}

int cmd_example(const GlobalOptions& g, double r) {
    if (!(r > 0.0 && r < 1.0))
        throw SolverError(ErrorKind::InvalidInput, "parse", "--r must lie in (0, 1)");
    const PickData3 data({BidiskPoint(0, 0), BidiskPoint(r, 0), BidiskPoint(0, r)}, {0.0, 1.0, 1.0});
    // the family shares one extremal interpolant: (z1 + z2 - 2 z1 z2)/(2 - z1 - z2)
    RationalInner2 phi;
    phi.num = {0.0, 0.5, 0.5, -1.0};
    phi.den = {1.0, -0.5, -0.5, 0.0};
    const json out{{"problem", io::problem_to_json(data)},
                   {"expected_solution", {{"t_star", r / (2.0 - r)}, {"phi", io::phi_to_json(phi)}}}};
    emit(g, out.dump(2));
    return kExitSolved;
}

int cmd_distance(const GlobalOptions& g, const std::string& p_csv, const std::string& q_csv) {
    const auto pv = parse_doubles(p_csv, 4, "--p");
    const auto qv = parse_doubles(q_csv, 4, "--q");
    const BidiskPoint p(cplx(pv[0], pv[1]), cplx(pv[2], pv[3]));
    const BidiskPoint q(cplx(qv[0], qv[1]), cplx(qv[2], qv[3]));
    const json out{{"kobayashi", kobayashi_dist(p, q)},
                   {"rho1", pseudo_dist(p.z1, q.z1)},
                   {"rho2", pseudo_dist(p.z2, q.z2)},
                   {"balanced", is_balanced(p, q)}};
    emit(g, out.dump(2));
    return kExitSolved;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-point Pick interpolation on the bidisk"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON file with solver configuration overrides");
    app.add_option("--tol", g.tol_overrides, "configuration override key=value (repeatable)");
    app.add_option("--out", g.out_path, "write output to this path instead of stdout");
    app.add_flag("--quiet", g.quiet, "suppress informational stderr output");

    std::string in_path, sol_path, prob_path, at, p_csv, q_csv;
    int grid = 0;
    bool boundary = false;
    double r = 0.5;

    CLI::App* solve = app.add_subcommand("solve", "solve a problem file");
    solve->add_option("input", in_path, "problem JSON file")->required();

    CLI::App* verify = app.add_subcommand("verify", "re-check a solution against its problem");
    verify->add_option("solution", sol_path, "solution JSON file")->required();
    verify->add_option("problem", prob_path, "problem JSON file")->required();

    CLI::App* classify_cmd = app.add_subcommand("classify", "classify a problem file");
    classify_cmd->add_option("input", in_path, "problem JSON file")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a solution's interpolant");
    eval->add_option("solution", sol_path, "solution JSON file")->required();
    eval->add_option("--at", at, "single point re,im,re,im");
    eval->add_option("--grid", grid, "N x N sample grid");
    eval->add_flag("--boundary", boundary, "sample the distinguished boundary torus");

    CLI::App* example = app.add_subcommand("example", "emit the symmetric example instance");
    example->add_option("--r", r, "node radius in (0,1)")->required();

    CLI::App* distance = app.add_subcommand("distance", "Kobayashi distance between two bidisk points");
    distance->add_option("--p", p_csv, "first point re,im,re,im")->required();
    distance->add_option("--q", q_csv, "second point re,im,re,im")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitBadInput;
    }

    try {
        if (solve->parsed()) return cmd_solve(g, in_path);
        if (verify->parsed()) return cmd_verify(g, sol_path, prob_path);
        if (classify_cmd->parsed()) return cmd_classify(g, in_path);
        if (eval->parsed()) return cmd_eval(g, sol_path, at, grid, boundary);
        if (example->parsed()) return cmd_example(g, r);
        if (distance->parsed()) return cmd_distance(g, p_csv, q_csv);
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify_exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitBadInput;
}
