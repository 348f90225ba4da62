#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace dlfit;
using Catch::Approx;

TEST_CASE("metric identities hold for random splits") {
    std::mt19937 rng(7001);
    testutil::RandomDbOptions opts;
    opts.individuals = 8;
    for (int trial = 0; trial < 40; ++trial) {
        auto db = testutil::random_db(rng, opts);
        std::vector<int> pos, neg;
        for (int a = 0; a < db->num_individuals(); ++a)
            (rng() % 2 ? pos : neg).push_back(a);
        if (pos.empty() || neg.empty())
            continue;
        FittingProblem problem = FittingProblem::from_ids(db, pos, neg);
        Concept c = testutil::random_concept(rng, *db, 3, true, false);
        Metrics m = compute_metrics(c, problem);

        std::vector<bool> ext = eval_concept(c, *db);
        int tp = 0, fp = 0, tn = 0, fn = 0;
        for (int a : pos)
            ext[a] ? ++tp : ++fn;
        for (int b : neg)
            ext[b] ? ++fp : ++tn;
        CHECK(m.true_pos == tp);
        CHECK(m.false_pos == fp);
        CHECK(m.true_neg == tn);
        CHECK(m.false_neg == fn);
        CHECK(m.accuracy == Approx((double)(tp + tn) / (tp + tn + fp + fn)));
        if (tp + fp > 0 && tp + fn > 0) {
            CHECK(m.precision == Approx((double)tp / (tp + fp)));
            CHECK(m.recall == Approx((double)tp / (tp + fn)));
            if (m.precision + m.recall > 0) {
                CHECK_FALSE(m.f1_ill_defined);
                CHECK(m.f1 ==
                      Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
            }
        } else {
            CHECK(m.f1_ill_defined);
            CHECK(m.f1 == 0.0);
        }
    }
}

TEST_CASE("degenerate predictions set the ill-defined flag") {
    auto db = testutil::db_from_text("A(a)\nB(b)\n");
    FittingProblem problem(db, {"a"}, {"b"});
    Metrics none = compute_metrics(bot(), problem);
    CHECK(none.f1_ill_defined);
    CHECK(none.accuracy == Approx(0.5));
    Metrics all = compute_metrics(top(), problem);
    CHECK_FALSE(all.f1_ill_defined);
    CHECK(all.precision == Approx(0.5));
    CHECK(all.recall == Approx(1.0));
}

TEST_CASE("mean and sample standard deviation") {
    MeanStddev m = mean_stddev({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
    CHECK(m.mean == Approx(5.0));
    CHECK(m.stddev == Approx(2.13809).margin(1e-4));
    CHECK(mean_stddev({3.0}).stddev == 0.0);
    CHECK(mean_stddev({}).mean == 0.0);
}

TEST_CASE("fold assignment is a balanced partition, deterministic by seed") {
    std::mt19937 rng(42);
    std::vector<int> fold = fold_assignment(23, 5, rng);
    REQUIRE(fold.size() == 23);
    std::vector<int> sizes(5, 0);
    for (int f : fold) {
        REQUIRE(f >= 0);
        REQUIRE(f < 5);
        ++sizes[f];
    }
    CHECK(*std::max_element(sizes.begin(), sizes.end()) -
              *std::min_element(sizes.begin(), sizes.end()) <=
          1);
    std::mt19937 rng2(42);
    CHECK(fold_assignment(23, 5, rng2) == fold);
    std::mt19937 rng3(43);
    CHECK(fold_assignment(23, 5, rng3) != fold);
}

TEST_CASE("the deal offset staggers where the next class starts") {
    std::mt19937 rng(42);
    std::vector<int> fold = fold_assignment(3, 5, rng, 2);
    std::vector<int> sorted = fold;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{2, 3, 4});
}

TEST_CASE("cross-validation is deterministic and covers every fold") {
    std::mt19937 rng(7002);
    testutil::RandomDbOptions opts;
    opts.individuals = 10;
    opts.concept_names = 2;
    auto db = testutil::random_db(rng, opts);
    std::vector<int> pos, neg;
    for (int a = 0; a < db->num_individuals(); ++a)
        (a % 2 ? pos : neg).push_back(a);
    FittingProblem problem = FittingProblem::from_ids(db, pos, neg);
    SearchConfig cfg;
    cfg.fragment = Fragment::Alcq;
    cfg.max_stage = 3;
    cfg.approx = true;

    CrossvalReport r1 = crossval(problem, cfg, 5, 7);
    CrossvalReport r2 = crossval(problem, cfg, 5, 7);
    REQUIRE(r1.fold_reports.size() == 5);
    CHECK(r1.accuracy.mean == r2.accuracy.mean);
    CHECK(r1.node_count.mean == r2.node_count.mean);

    std::vector<double> accs, sizes;
    int tested = 0;
    for (const auto& f : r1.fold_reports) {
        accs.push_back(f.test.accuracy);
        sizes.push_back(f.node_count);
        tested += f.test.true_pos + f.test.false_pos + f.test.true_neg + f.test.false_neg;
        CHECK(f.seconds >= 0.0);
    }
    CHECK(tested == problem.num_examples());
    CHECK(r1.accuracy.mean == Approx(mean_stddev(accs).mean));
    CHECK(r1.node_count.stddev == Approx(mean_stddev(sizes).stddev));
}

TEST_CASE("folds without a learnable concept fall back to top") {
    auto db = testutil::db_from_text("A(a)\nA(b)\nA(c)\nA(d)\n");
    FittingProblem problem(db, {"a", "b"}, {"c", "d"});
    SearchConfig cfg;
    cfg.fragment = Fragment::Alcq;
    cfg.max_stage = 2;
    CrossvalReport r = crossval(problem, cfg, 2, 1);
    for (const auto& f : r.fold_reports) {
        CHECK(f.fallback_top);
        CHECK(f.node_count == 1);
    }
}

TEST_CASE("cross-validation rejects impossible fold counts") {
    auto db = testutil::db_from_text("A(a)\nB(b)\nA(c)\n");
    FittingProblem problem(db, {"a", "c"}, {"b"});
    SearchConfig cfg;
    CHECK_THROWS(crossval(problem, cfg, 1, 0));
    CHECK_THROWS(crossval(problem, cfg, 4, 0));
    CHECK_NOTHROW(crossval(problem, cfg, 3, 0));
}
