#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace dlfit;

namespace {

// Partition and pairwise-relation views must induce the same equivalence.
void check_against_oracle(const Database& db, BisimKind kind) {
    BisimPartition part = max_bisimulation(db, kind);
    auto rel = testutil::naive_bisim(db, kind);
    for (int a = 0; a < db.num_individuals(); ++a)
        for (int b = 0; b < db.num_individuals(); ++b) {
            INFO("kind=" << (kind == BisimKind::Alc ? "alc" : "alcq") << " a="
                         << db.individual_name(a) << " b=" << db.individual_name(b));
            REQUIRE(part.same_class(a, b) == rel[a][b]);
        }
}

}  // namespace

TEST_CASE("maximal bisimulation matches the pairwise fixpoint oracle") {
    std::mt19937 rng(411);
    testutil::RandomDbOptions opts;
    for (int trial = 0; trial < 60; ++trial) {
        opts.individuals = 2 + (int)(rng() % 7);
        opts.concept_names = 1 + (int)(rng() % 2);
        opts.role_names = 1 + (int)(rng() % 2);
        opts.edge_p = 0.15 + 0.3 * (trial % 3);
        auto db = testutil::random_db(rng, opts);
        check_against_oracle(*db, BisimKind::Alc);
        check_against_oracle(*db, BisimKind::Alcq);
    }
}

TEST_CASE("counting bisimilarity is finer than plain bisimilarity") {
    std::mt19937 rng(412);
    testutil::RandomDbOptions opts;
    opts.individuals = 7;
    for (int trial = 0; trial < 30; ++trial) {
        auto db = testutil::random_db(rng, opts);
        BisimPartition alc = max_bisimulation(*db, BisimKind::Alc);
        BisimPartition alcq = max_bisimulation(*db, BisimKind::Alcq);
        CHECK(alcq.num_classes >= alc.num_classes);
        for (int a = 0; a < db->num_individuals(); ++a)
            for (int b = 0; b < db->num_individuals(); ++b)
                if (alcq.same_class(a, b))
                    CHECK(alc.same_class(a, b));
    }
}

TEST_CASE("successor multiplicity separates counting bisimilarity only") {
    // a has two B successors, b has one; plain bisimilarity ignores the count.
    auto db = testutil::db_from_text("r(a, x)\nr(a, y)\nr(b, z)\nB(x)\nB(y)\nB(z)\n");
    int a = db->individual_id("a"), b = db->individual_id("b");
    CHECK(max_bisimulation(*db, BisimKind::Alc).same_class(a, b));
    CHECK_FALSE(max_bisimulation(*db, BisimKind::Alcq).same_class(a, b));
}

TEST_CASE("bisimulation rejects databases with feature facts") {
    auto db = testutil::db_from_text("height(a, 3)\n");
    CHECK_THROWS(max_bisimulation(*db, BisimKind::Alcq));
}

TEST_CASE("separating concepts hold on the left and fail on the right") {
    std::mt19937 rng(413);
    testutil::RandomDbOptions opts;
    opts.individuals = 6;
    opts.concept_names = 2;
    opts.role_names = 2;
    for (int trial = 0; trial < 25; ++trial) {
        auto db = testutil::random_db(rng, opts);
        BisimPartition part = max_bisimulation(*db, BisimKind::Alcq);
        SeparatorBuilder builder(*db, part);
        for (int a = 0; a < db->num_individuals(); ++a)
            for (int b = 0; b < db->num_individuals(); ++b) {
                if (a == b || part.same_class(a, b))
                    continue;
                Concept c = builder.separating_concept(a, b);
                REQUIRE(c != nullptr);
                INFO("a=" << a << " b=" << b);
                CHECK(testutil::naive_holds(c, *db, a));
                CHECK_FALSE(testutil::naive_holds(c, *db, b));
            }
    }
}

TEST_CASE("quotient preserves counting concepts through the example map") {
    std::mt19937 rng(414);
    testutil::RandomDbOptions opts;
    opts.individuals = 7;
    opts.concept_names = 2;
    opts.role_names = 2;
    for (int trial = 0; trial < 25; ++trial) {
        auto db = testutil::random_db(rng, opts);
        QuotientDatabase q = quotient(*db);
        CHECK((int)q.db->num_individuals() <= 49);
        for (int c = 0; c < 8; ++c) {
            Concept cpt = testutil::random_concept(rng, *db, 3, true, false);
            std::vector<bool> orig = eval_concept(cpt, *db);
            std::vector<bool> quot = eval_concept(cpt, *q.db);
            for (int a = 0; a < db->num_individuals(); ++a) {
                int qa = q.db->individual_id(q.example_map.at(db->individual_name(a)));
                REQUIRE(qa >= 0);
                INFO("concept=" << render_concept(cpt) << " a=" << db->individual_name(a));
                REQUIRE(orig[a] == quot[qa]);
            }
        }
    }
}

TEST_CASE("collapsed quotient preserves plain concepts through the example map") {
    std::mt19937 rng(415);
    testutil::RandomDbOptions opts;
    opts.individuals = 7;
    opts.concept_names = 2;
    opts.role_names = 2;
    for (int trial = 0; trial < 25; ++trial) {
        auto db = testutil::random_db(rng, opts);
        QuotientDatabase q = alc_quotient(*db);
        CHECK((int)q.db->num_individuals() == q.partition.num_classes);
        for (int c = 0; c < 8; ++c) {
            Concept cpt = testutil::random_concept(rng, *db, 3, false, false);
            std::vector<bool> orig = eval_concept(cpt, *db);
            std::vector<bool> quot = eval_concept(cpt, *q.db);
            for (int a = 0; a < db->num_individuals(); ++a) {
                int qa = q.db->individual_id(q.example_map.at(db->individual_name(a)));
                REQUIRE(qa >= 0);
                INFO("concept=" << render_concept(cpt) << " a=" << db->individual_name(a));
                REQUIRE(orig[a] == quot[qa]);
            }
        }
    }
}

TEST_CASE("quotient is stable under repetition") {
    std::mt19937 rng(416);
    testutil::RandomDbOptions opts;
    opts.individuals = 8;
    for (int trial = 0; trial < 10; ++trial) {
        auto db = testutil::random_db(rng, opts);
        QuotientDatabase q1 = quotient(*db);
        QuotientDatabase q2 = quotient(*q1.db);
        CHECK(q2.partition.num_classes == q1.partition.num_classes);
    }
}
