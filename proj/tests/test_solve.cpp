#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <fstream>
#include <thread>

#include "test_helpers.hpp"

#ifndef TEST_SOURCE_DIR
#define TEST_SOURCE_DIR "."
#endif

using namespace dlfit;

namespace {

Cnf random_3cnf(std::mt19937& rng, int num_vars, int num_clauses) {
    Cnf cnf;
    cnf.num_vars = num_vars;
    for (int i = 0; i < num_clauses; ++i) {
        std::vector<int> clause;
        for (int j = 0; j < 3; ++j) {
            int v = 1 + (int)(rng() % num_vars);
            clause.push_back(rng() % 2 ? v : -v);
        }
        cnf.clauses.push_back(std::move(clause));
    }
    return cnf;
}

// n+1 pigeons into n holes; classically hard for resolution-based solvers.
Cnf pigeonhole(int holes) {
    Cnf cnf;
    auto var = [&](int pigeon, int hole) { return pigeon * holes + hole + 1; };
    cnf.num_vars = (holes + 1) * holes;
    for (int p = 0; p <= holes; ++p) {
        std::vector<int> clause;
        for (int h = 0; h < holes; ++h)
            clause.push_back(var(p, h));
        cnf.clauses.push_back(clause);
    }
    for (int h = 0; h < holes; ++h)
        for (int p1 = 0; p1 <= holes; ++p1)
            for (int p2 = p1 + 1; p2 <= holes; ++p2)
                cnf.clauses.push_back({-var(p1, h), -var(p2, h)});
    return cnf;
}

const std::string kFixture = std::string("python3 ") + TEST_SOURCE_DIR + "/dpll_solver.py";

}  // namespace

TEST_CASE("cdcl agrees with the dpll reference on random formulas") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        int vars = 4 + (int)(rng() % 10);
        int clauses = (int)(vars * (2.0 + (rng() % 30) / 10.0));
        Cnf cnf = random_3cnf(rng, vars, clauses);
        SolveResult r = solve(cnf);
        bool want = testutil::dpll_satisfiable(cnf);
        INFO("trial=" << trial << " vars=" << vars << " clauses=" << clauses);
        REQUIRE(r.status == (want ? SolveStatus::Sat : SolveStatus::Unsat));
        if (r.status == SolveStatus::Sat)
            REQUIRE(verify_model(cnf, r.model));
    }
}

TEST_CASE("cdcl handles degenerate formulas") {
    CHECK(solve({0, {}}).status == SolveStatus::Sat);
    CHECK(solve({2, {}}).status == SolveStatus::Sat);
    CHECK(solve({1, {{1}, {-1}}}).status == SolveStatus::Unsat);
    CHECK(solve({1, {{}}}).status == SolveStatus::Unsat);
    CHECK(solve({1, {{1, -1}}}).status == SolveStatus::Sat);
    CHECK(solve({3, {{1}, {-1, 2}, {-2, 3}}}).status == SolveStatus::Sat);
}

TEST_CASE("cdcl refutes pigeonhole instances") {
    SolveResult r = solve(pigeonhole(5));
    CHECK(r.status == SolveStatus::Unsat);
    CHECK(r.stats.conflicts > 0);
}

TEST_CASE("tiny time budgets give a timeout verdict") {
    SolveBudget budget;
    budget.timeout_seconds = 0.02;
    SolveResult r = solve(pigeonhole(9), budget);
    CHECK(r.status == SolveStatus::Timeout);
}

TEST_CASE("the stop flag cancels a running solve") {
    std::atomic<bool> stop{false};
    SolveBudget budget;
    budget.stop = &stop;
    std::thread killer([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        stop.store(true);
    });
    SolveResult r = solve(pigeonhole(10), budget);
    killer.join();
    CHECK(r.status == SolveStatus::Timeout);
}

TEST_CASE("solver statistics are populated") {
    std::mt19937 rng(55);
    Cnf cnf = random_3cnf(rng, 20, 85);
    SolveResult r = solve(cnf);
    CHECK(r.stats.propagations > 0);
    CHECK(r.stats.wall_seconds >= 0.0);
}

TEST_CASE("external fixture solver agrees with the internal one") {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 15; ++trial) {
        int vars = 4 + (int)(rng() % 7);
        Cnf cnf = random_3cnf(rng, vars, vars * 3);
        SolveResult internal = solve(cnf);
        SolveResult external = solve_external(cnf, kFixture);
        REQUIRE(external.status == internal.status);
        if (external.status == SolveStatus::Sat)
            REQUIRE(verify_model(cnf, external.model));
    }
}

TEST_CASE("external solver timeouts map to the timeout verdict") {
    SolveBudget budget;
    budget.timeout_seconds = 1.0;
    std::string slow = "sh -c 'sleep 30; echo s SATISFIABLE' --";
    SolveResult r = solve_external(pigeonhole(3), slow, budget);
    CHECK(r.status == SolveStatus::Timeout);
}

TEST_CASE("external solver failures are reported by kind") {
    Cnf cnf{1, {{1}}};
    try {
        solve_external(cnf, "/nonexistent/solver/binary");
        FAIL("expected a spawn error");
    } catch (const ExternalSolverError& e) {
        CHECK(e.kind == ExternalSolverError::Kind::Spawn);
    }
    try {
        solve_external(cnf, "echo not-a-solver-output;true");
        FAIL("expected a protocol error");
    } catch (const ExternalSolverError& e) {
        CHECK(e.kind == ExternalSolverError::Kind::Protocol);
    }
    try {
        // Claims SAT with a model that falsifies the only clause.
        solve_external(cnf, "sh -c 'echo s SATISFIABLE; echo v -1 0' --");
        FAIL("expected a model verification error");
    } catch (const ExternalSolverError& e) {
        CHECK(e.kind == ExternalSolverError::Kind::ModelVerification);
    }
    try {
        solve_external(cnf, "sh -c 'echo s SATISFIABLE; echo v 7 0' --");
        FAIL("expected a protocol error");
    } catch (const ExternalSolverError& e) {
        CHECK(e.kind == ExternalSolverError::Kind::Protocol);
    }
}
