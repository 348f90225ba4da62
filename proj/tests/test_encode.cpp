#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace dlfit;

namespace {

FittingProblem random_split(std::mt19937& rng, DatabasePtr db) {
    std::vector<int> pos, neg;
    while (pos.empty() || neg.empty()) {
        pos.clear();
        neg.clear();
        for (int a = 0; a < db->num_individuals(); ++a) {
            unsigned roll = rng() % 3;
            if (roll == 0)
                pos.push_back(a);
            else if (roll == 1)
                neg.push_back(a);
        }
    }
    return FittingProblem::from_ids(db, pos, neg);
}

// Smallest k in 1..kmax whose encoding is satisfiable, or -1.
int encoder_min_size(const FittingProblem& problem, int kmax, int g, bool counting) {
    for (int k = 1; k <= kmax; ++k) {
        EncodeOptions opt;
        opt.k = k;
        opt.g_bound = g;
        opt.counting = counting;
        CnfInstance inst = encode(problem, opt);
        SolveResult r = solve(inst.cnf());
        REQUIRE(r.status != SolveStatus::Timeout);
        if (r.status == SolveStatus::Sat) {
            Concept c = decode(r.model, inst);
            REQUIRE(c != nullptr);
            REQUIRE((int)node_count(c) <= k);
            REQUIRE(fits(c, problem).fits);
            return k;
        }
    }
    return -1;
}

}  // namespace

TEST_CASE("topology enumeration matches the counting recurrence") {
    std::vector<std::uint64_t> expected;
    for (int m = 1; m <= 10; ++m)
        expected.push_back(count_topologies_exact(m));
    CHECK(expected[0] == 1);
    CHECK(expected[1] == 1);
    CHECK(expected[2] == 2);
    CHECK(expected[3] == 4);
    CHECK(expected[4] == 9);
    for (int m = 1; m <= 8; ++m)
        CHECK(enumerate_topologies_exact(m).size() == count_topologies_exact(m));
}

TEST_CASE("enumerated topologies are well formed trees in layout order") {
    for (int m = 1; m <= 7; ++m)
        for (const Topology& t : enumerate_topologies_exact(m)) {
            REQUIRE(t.num_nodes() == m);
            REQUIRE((int)t.arity.size() == m);
            int total = 0;
            for (int i = 0; i < m; ++i) {
                REQUIRE(t.arity[i] >= 0);
                REQUIRE(t.arity[i] <= 2);
                total += t.arity[i];
                // Ballot property: the first i+1 nodes wire all earlier slots.
                if (i + 1 < m)
                    REQUIRE(total >= i + 1);
            }
            REQUIRE(total == m - 1);
            std::vector<int> parent(m, -1);
            for (int i = 0; i < m; ++i)
                for (int c = 0; c < t.arity[i]; ++c) {
                    int child = t.child[i] + c;
                    REQUIRE(child > i);
                    REQUIRE(child < m);
                    REQUIRE(parent[child] == -1);
                    parent[child] = i;
                }
            for (int i = 1; i < m; ++i)
                REQUIRE(parent[i] != -1);
        }
    auto all = enumerate_topologies(4);
    CHECK(all.size() == 1 + 1 + 2 + 4);
}

TEST_CASE("encoder minimal size matches the extension exhaustion oracle") {
    std::mt19937 rng(3001);
    testutil::RandomDbOptions opts;
    for (int trial = 0; trial < 50; ++trial) {
        opts.individuals = 3 + (int)(rng() % 4);
        opts.concept_names = 1 + (int)(rng() % 2);
        opts.role_names = 1 + (int)(rng() % 2);
        opts.edge_p = 0.2 + 0.2 * (trial % 3);
        auto db = testutil::random_db(rng, opts);
        FittingProblem problem = random_split(rng, db);
        bool counting = trial % 2 == 0;
        int g = 1 + (int)(rng() % 2);
        int kmax = 4;
        int want = testutil::brute_min_fit_size(problem, kmax, g, counting, false);
        int got = encoder_min_size(problem, kmax, g, counting);
        INFO("trial=" << trial << " counting=" << counting << " g=" << g);
        REQUIRE(got == want);
    }
}

TEST_CASE("the encoding is deterministic") {
    std::mt19937 rng(3002);
    testutil::RandomDbOptions opts;
    opts.individuals = 5;
    auto db = testutil::random_db(rng, opts);
    FittingProblem problem = random_split(rng, db);
    EncodeOptions opt;
    opt.k = 3;
    opt.g_bound = 2;
    CnfInstance a = encode(problem, opt);
    CnfInstance b = encode(problem, opt);
    CHECK(a.cnf().num_vars == b.cnf().num_vars);
    CHECK(a.cnf().clauses == b.cnf().clauses);
}

TEST_CASE("topology pinning partitions the satisfiable space") {
    std::mt19937 rng(3003);
    testutil::RandomDbOptions opts;
    opts.individuals = 5;
    for (int trial = 0; trial < 12; ++trial) {
        auto db = testutil::random_db(rng, opts);
        FittingProblem problem = random_split(rng, db);
        EncodeOptions opt;
        opt.k = 3;
        opt.g_bound = 1;
        CnfInstance inst = encode(problem, opt);
        bool plain_sat = solve(inst.cnf()).status == SolveStatus::Sat;

        auto shapes = enumerate_topologies(opt.k);
        bool any_sat = false;
        for (const Topology& shape : shapes) {
            Cnf pinned = with_topologies(inst, {shape});
            SolveResult r = solve(pinned);
            if (r.status == SolveStatus::Sat) {
                any_sat = true;
                Concept c = decode(r.model, inst);
                CHECK(fits(c, problem).fits);
            }
        }
        CHECK(any_sat == plain_sat);
        // Pinning to the whole shape list changes nothing.
        Cnf all = with_topologies(inst, shapes);
        CHECK((solve(all).status == SolveStatus::Sat) == plain_sat);
    }
}

TEST_CASE("indicator encoding counts correctly classified examples") {
    std::mt19937 rng(3004);
    testutil::RandomDbOptions opts;
    opts.individuals = 5;
    for (int trial = 0; trial < 10; ++trial) {
        auto db = testutil::random_db(rng, opts);
        FittingProblem problem = random_split(rng, db);
        EncodeOptions opt;
        opt.k = 3;
        opt.g_bound = 1;
        opt.add_fitting_units = false;
        opt.add_indicators = true;
        CnfInstance inst = encode(problem, opt);
        REQUIRE((int)inst.indicators.size() == problem.num_examples());
        REQUIRE((int)inst.count_geq.size() == problem.num_examples());

        // Demanding every example correct is the plain fitting question.
        EncodeOptions plain;
        plain.k = 3;
        plain.g_bound = 1;
        bool fit_sat = solve(encode(problem, plain).cnf()).status == SolveStatus::Sat;
        Cnf all = inst.cnf();
        all.clauses.push_back({inst.count_geq[problem.num_examples() - 1]});
        CHECK((solve(all).status == SolveStatus::Sat) == fit_sat);

        // Any concept of size <= k yields some correctness count, so
        // demanding at least the approx_select floor is satisfiable.
        SolveResult any = solve(inst.cnf());
        REQUIRE(any.status == SolveStatus::Sat);
        Concept c = decode(any.model, inst, false);
        FitCheck check = fits(c, problem);
        int correct = (int)std::count(check.per_example.begin(), check.per_example.end(), true);
        for (int e = 0; e < problem.num_examples(); ++e) {
            bool model_says = any.model[(std::size_t)inst.indicators[e] - 1];
            REQUIRE(model_says == check.per_example[e]);
        }
        (void)correct;
    }
}

TEST_CASE("counting clause growth stays within the quadratic envelope") {
    std::mt19937 rng(3005);
    testutil::RandomDbOptions opts;
    opts.individuals = 6;
    opts.concept_names = 2;
    opts.role_names = 2;
    auto db = testutil::random_db(rng, opts);
    FittingProblem problem = random_split(rng, db);
    for (int k = 1; k <= 5; ++k)
        for (int g = 1; g <= 3; ++g) {
            EncodeOptions opt;
            opt.k = k;
            opt.g_bound = g;
            CnfInstance inst = encode(problem, opt);
            std::size_t sigma = db->concept_names().size() + db->role_names().size();
            std::size_t bound = 64ull * k * k * db->num_individuals() * sigma * g * g;
            INFO("k=" << k << " g=" << g << " counting=" << inst.counting_clauses);
            REQUIRE(inst.counting_clauses <= bound);
        }
}

TEST_CASE("the encoder refuses unreasonable stage parameters") {
    auto db = testutil::db_from_text("A(a)\nB(b)\n");
    FittingProblem problem(db, {"a"}, {"b"});
    EncodeOptions opt;
    opt.k = 70;
    CHECK_THROWS(encode(problem, opt));
    opt.k = 2;
    opt.clause_ceiling = 3;
    CHECK_THROWS(encode(problem, opt));
}
