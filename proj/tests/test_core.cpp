#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace dlfit;

TEST_CASE("decimal parse and print round trip") {
    for (const char* text : {"0", "1", "-1", "145", "2.5", "-0.75", "100.001", "0.0001", "-20"}) {
        Decimal d = Decimal::parse(text);
        CHECK(d.str() == text);
        CHECK(Decimal::parse(d.str()) == d);
    }
}

TEST_CASE("decimal normalizes trailing zeros and redundant signs") {
    CHECK(Decimal::parse("2.50") == Decimal::parse("2.5"));
    CHECK(Decimal::parse("2.50").str() == "2.5");
    CHECK(Decimal::parse("-0.0") == Decimal::parse("0"));
    CHECK(Decimal::parse("007") == Decimal::parse("7"));
    CHECK(Decimal::parse("3.000") == Decimal::parse("3"));
    CHECK(Decimal::parse("2.50").hash() == Decimal::parse("2.5").hash());
}

TEST_CASE("decimal ordering agrees with rational value") {
    std::vector<std::string> texts{"-3", "-2.71", "-0.5", "0", "0.001", "0.01", "0.1",
                                   "1",  "1.05",  "1.5",  "2", "10",    "10.2"};
    for (std::size_t i = 0; i < texts.size(); ++i)
        for (std::size_t j = 0; j < texts.size(); ++j) {
            Decimal a = Decimal::parse(texts[i]), b = Decimal::parse(texts[j]);
            CHECK((a < b) == (i < j));
            CHECK((a == b) == (i == j));
        }
}

TEST_CASE("decimal rejects malformed input") {
    for (const char* bad : {"", "-", ".", "1.2.3", "1e5", "abc", "--2", "1 2"})
        CHECK_THROWS(Decimal::parse(bad));
    // Digits on one side of the point suffice.
    CHECK(Decimal::parse("1.") == Decimal::parse("1"));
    CHECK(Decimal::parse(".5") == Decimal::parse("0.5"));
}

TEST_CASE("database interns individuals in first-mention order") {
    auto db = testutil::db_from_text("A(b)\nr(b, a)\nA(a)\nr(c, c)\n");
    REQUIRE(db->num_individuals() == 3);
    CHECK(db->individual_name(0) == "b");
    CHECK(db->individual_name(1) == "a");
    CHECK(db->individual_name(2) == "c");
    CHECK(db->individual_id("a") == 1);
    CHECK(db->individual_id("missing") == -1);
}

TEST_CASE("database successors honor inverse roles") {
    auto db = testutil::db_from_text("r(a, b)\nr(a, c)\nr(b, c)\n");
    int a = db->individual_id("a"), b = db->individual_id("b"), c = db->individual_id("c");
    CHECK(db->successors(a, {"r", false}) == std::vector<int>{b, c});
    CHECK(db->successors(c, {"r", true}) == std::vector<int>{a, b});
    CHECK(db->successors(c, {"r", false}).empty());
    CHECK(db->successors(a, {"s", false}).empty());
}

TEST_CASE("database keeps factless individuals via extra_individuals") {
    FactSet facts;
    facts.concepts.push_back({"A", "x"});
    facts.extra_individuals = {"lonely", "x"};
    auto db = facts.build();
    CHECK(db->num_individuals() == 2);
    CHECK(db->individual_id("lonely") >= 0);
}

TEST_CASE("fact text round trips through serialization") {
    std::string text = "A(a)\nB(b)\nr(a, b)\nheight(a, 145.5)\nheight(b, -2)\n";
    auto db = testutil::db_from_text(text);
    auto db2 = testutil::db_from_text(serialize_facts(*db));
    CHECK(db->num_individuals() == db2->num_individuals());
    CHECK(db->fact_count() == db2->fact_count());
    CHECK(db2->has_concept_fact("A", db2->individual_id("a")));
    REQUIRE(db2->feature_value("height", db2->individual_id("a")) != nullptr);
    CHECK(*db2->feature_value("height", db2->individual_id("a")) == Decimal::parse("145.5"));
}

TEST_CASE("fact parser reports malformed lines with positions") {
    try {
        parse_fact_text("A(a)\nnonsense here\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse_fact_text("r(a)extra(b)\n"), ParseError);
    CHECK_THROWS_AS(parse_fact_text("__inv_r(a, b)\n"), ParseError);
    CHECK_THROWS_AS(parse_fact_text("__fge_h_3(a)\n"), ParseError);
}

TEST_CASE("hash consing makes structurally equal concepts pointer equal") {
    Concept a = conjunction(concept_name("A"), exists({"r", false}, top()));
    Concept b = conjunction(concept_name("A"), exists({"r", false}, top()));
    CHECK(a.get() == b.get());
    Concept c = conjunction(exists({"r", false}, top()), concept_name("A"));
    CHECK(a.get() != c.get());
    CHECK(forall({"r", false}, concept_name("A")).get() ==
          at_most(0, {"r", false}, negation(concept_name("A"))).get());
}

TEST_CASE("node count treats number restrictions as single constructors") {
    RoleRef r{"r", false};
    CHECK(node_count(top()) == 1);
    CHECK(node_count(concept_name("A")) == 1);
    CHECK(node_count(negation(concept_name("A"))) == 2);
    CHECK(node_count(conjunction(concept_name("A"), concept_name("B"))) == 3);
    CHECK(node_count(exists(r, concept_name("A"))) == 2);
    CHECK(node_count(forall(r, concept_name("A"))) == 2);
    CHECK(node_count(at_least(3, r, concept_name("A"))) == 2);
    CHECK(node_count(at_most(2, r, conjunction(top(), bot()))) == 4);
}

TEST_CASE("string size adds unary-coded numbers beyond the sugar forms") {
    RoleRef r{"r", false};
    CHECK(string_size(exists(r, top())) == 2);
    CHECK(string_size(exists(r, top()), true) == 3);
    CHECK(string_size(forall(r, top())) == 2);
    CHECK(string_size(at_least(3, r, top())) == 5);
    CHECK(string_size(at_most(2, r, top())) == 4);
}

TEST_CASE("parser round trips rendered concepts") {
    RoleRef r{"r", false}, rinv{"r", true};
    std::vector<Concept> cases{
        top(),
        bot(),
        concept_name("Branch"),
        negation(disjunction(concept_name("A"), concept_name("B"))),
        exists(r, forall(rinv, concept_name("A"))),
        at_least(2, r, at_most(3, rinv, top())),
        conjunction(feature_geq("height", Decimal::parse("145.5")),
                    feature_leq("height", Decimal::parse("-2"))),
        forall(r, exists(r, negation(top()))),
    };
    for (const Concept& c : cases) {
        Concept back = parse_concept(render_concept(c));
        CHECK(back.get() == c.get());
    }
}

TEST_CASE("parser accepts explicit grammar forms") {
    CHECK(parse_concept("(atleast 1 r . top)").get() == exists({"r", false}, top()).get());
    CHECK(parse_concept("(atmost 0 r . not A)").get() ==
          forall({"r", false}, concept_name("A")).get());
    CHECK(parse_concept("not not A").get() == negation(negation(concept_name("A"))).get());
    CHECK(parse_concept("(exists inv(r) . (A and B))")->role.inverse);
}

TEST_CASE("parser rejects malformed concepts") {
    for (const char* bad :
         {"", "(A and)", "A and B", "(A and B or C)", "(atleast 0 r . top)", "exists r . A",
          "(h >= )", "(atleast x r . top)", "(A and B))", "((A and B)", "inv(r)"})
        CHECK_THROWS(parse_concept(bad));
}

TEST_CASE("evaluation matches naive recursive semantics") {
    std::mt19937 rng(20260823);
    testutil::RandomDbOptions opts;
    opts.individuals = 6;
    opts.concept_names = 2;
    opts.role_names = 2;
    for (int trial = 0; trial < 60; ++trial) {
        auto db = testutil::random_db(rng, opts);
        testutil::NaiveSemantics sem(*db);
        for (int c = 0; c < 5; ++c) {
            Concept cpt = testutil::random_concept(rng, *db, 3, true, true);
            std::vector<bool> ext = eval_concept(cpt, *db);
            for (int a = 0; a < db->num_individuals(); ++a)
                REQUIRE(ext[a] == sem.holds(cpt, a));
        }
    }
}

TEST_CASE("evaluation handles features and inverse roles together") {
    auto db = testutil::db_from_text("r(a, b)\nheight(b, 2.5)\nheight(a, -1)\n");
    Concept c = exists({"r", false}, feature_geq("height", Decimal::parse("2.5")));
    std::vector<bool> ext = eval_concept(c, *db);
    CHECK(ext[db->individual_id("a")]);
    CHECK_FALSE(ext[db->individual_id("b")]);
    Concept back = exists({"r", true}, feature_leq("height", Decimal::parse("0")));
    ext = eval_concept(back, *db);
    CHECK(ext[db->individual_id("b")]);
    CHECK_FALSE(ext[db->individual_id("a")]);
}

TEST_CASE("fitting problems reject overlapping example sets") {
    auto db = testutil::db_from_text("A(a)\nA(b)\n");
    CHECK_THROWS_WITH(FittingProblem(db, {"a"}, {"a"}),
                      Catch::Matchers::ContainsSubstring("both positive and negative"));
    CHECK_THROWS(FittingProblem(db, {"a"}, {"ghost"}));
    FittingProblem p(db, {"a"}, {"b"});
    FitCheck check = fits(top(), p);
    CHECK_FALSE(check.fits);
    CHECK(check.per_example == std::vector<bool>{true, false});
}
