#include <catch2/catch_amalgamated.hpp>

#include "bipick/bipick.hpp"
#include "bipick/io.hpp"
#include "bipick/verify.hpp"

using namespace bipick;
using nlohmann::json;

namespace {

json worked_problem_json() {
    return json::parse(R"({
        "points": [[0,0,0,0],[0.5,0,0,0],[0,0,0.5,0]],
        "targets": [[0,0],[1,0],[1,0]]
    })");
}

}  // namespace

TEST_CASE("parse_problem accepts the worked example and ray targets") {
    const io::ProblemFile pf = io::parse_problem(worked_problem_json());
    CHECK(pf.data.nodes[1].z1 == cplx(0.5));
    CHECK(pf.data.targets[1] == cplx(1.0));
    CHECK_FALSE(pf.data.interior_targets());
}

TEST_CASE("parse_problem diagnostics name the offending field") {
    auto expect_message = [](json j, const std::string& needle) {
        try {
            io::parse_problem(j);
            FAIL("expected a parse error");
        } catch (const SolverError& e) {
            CHECK(e.kind() == ErrorKind::InvalidInput);
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    json j = worked_problem_json();
    j.erase("targets");
    expect_message(j, "targets");

    j = worked_problem_json();
    j["points"][1] = json::array({0.5, 0, 0});
    expect_message(j, "points[1]");

    j = worked_problem_json();
    j["points"][2] = json::array({1.2, 0, 0, 0});
    expect_message(j, "points[2]");

    j = worked_problem_json();
    j["targets"][0] = json::array({0});
    expect_message(j, "targets[0]");

    // duplicate nodes fail PickData3 validation through the parse path
    j = worked_problem_json();
    j["points"][1] = j["points"][0];
    CHECK_THROWS_AS(io::parse_problem(j), SolverError);
}

TEST_CASE("config parsing and overrides") {
    json j = worked_problem_json();
    j["config"] = {{"feas_tol", 1e-8}, {"max_iter", 1234}, {"seed", 7}};
    const io::ProblemFile pf = io::parse_problem(j);
    CHECK(pf.config.feas_tol == 1e-8);
    CHECK(pf.config.max_iter == 1234);
    CHECK(pf.config.seed == 7);

    SolverConfig cfg;
    io::apply_config_field(cfg, "newton_tol", json(1e-10));
    CHECK(cfg.newton_tol == 1e-10);
    CHECK_THROWS_AS(io::apply_config_field(cfg, "no_such_knob", json(1.0)), SolverError);

    // round trip through JSON keeps every field
    const SolverConfig back = io::config_from_json(io::config_to_json(pf.config));
    CHECK(back.feas_tol == pf.config.feas_tol);
    CHECK(back.max_iter == pf.config.max_iter);
    CHECK(back.seed == pf.config.seed);
}

TEST_CASE("solution serialization round trip") {
    const io::ProblemFile pf = io::parse_problem(worked_problem_json());
    const SolveReport rep = solve_extremal(pf.data, pf.config);
    REQUIRE(rep.solved);

    const json out = io::solution_to_json(rep);
    CHECK_FALSE(out.contains("monomials"));  // monomials live inside phi
    CHECK(out["phi"]["monomials"][3] == "z1z2");
    CHECK(out["classification"]["kind"] == "NonDegenerateCandidate");
    CHECK(out["residuals"].contains("decomposition"));

    const io::SolutionFile sol = io::parse_solution(out);
    CHECK(sol.t_star == Catch::Approx(rep.t_star));
    CHECK((sol.a - rep.pair.a).norm() < 1e-12);
    CHECK((sol.gamma - rep.pair.gamma).mat().frobenius() < 1e-12);
    for (size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(sol.phi.num[k] - rep.phi.num[k]) < 1e-12);
        CHECK(std::abs(sol.phi.den[k] - rep.phi.den[k]) < 1e-12);
    }
}

TEST_CASE("verify_solution passes solver output and flags corruption") {
    const io::ProblemFile pf = io::parse_problem(worked_problem_json());
    const SolveReport rep = solve_extremal(pf.data, pf.config);
    REQUIRE(rep.solved);
    const json out = io::solution_to_json(rep);

    const io::SolutionFile good = io::parse_solution(out);
    for (const CheckResult& c : verify_solution(pf.data, good)) {
        INFO(c.name << " measured " << c.measured);
        CHECK(c.pass);
    }

    // corrupt one phi coefficient: interpolation or innerness must fail
    json bad_phi = out;
    bad_phi["phi"]["num"][1][0] = bad_phi["phi"]["num"][1][0].get<double>() + 1e-3;
    bool failed = false;
    for (const CheckResult& c : verify_solution(pf.data, io::parse_solution(bad_phi)))
        if ((c.name == "interpolation" || c.name == "innerness_torus") && !c.pass) failed = true;
    CHECK(failed);

    // corrupt a gamma entry: the decomposition residual must fail
    json bad_gamma = out;
    bad_gamma["gamma"][1][1][0] = bad_gamma["gamma"][1][1][0].get<double>() + 1e-3;
    failed = false;
    for (const CheckResult& c : verify_solution(pf.data, io::parse_solution(bad_gamma)))
        if ((c.name == "decomposition" || c.name == "gamma_matches_a") && !c.pass) failed = true;
    CHECK(failed);
}

TEST_CASE("parse_solution rejects missing fields") {
    const io::ProblemFile pf = io::parse_problem(worked_problem_json());
    const SolveReport rep = solve_extremal(pf.data, pf.config);
    json out = io::solution_to_json(rep);
    out.erase("gamma");
    CHECK_THROWS_AS(io::parse_solution(out), SolverError);
}
