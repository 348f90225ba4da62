#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "concept.hpp"
#include "driver.hpp"
#include "eval.hpp"

namespace dlfit {

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool f1_ill_defined = false;  // no predicted or no actual positives
    int true_pos = 0, false_pos = 0, true_neg = 0, false_neg = 0;
};

inline Metrics compute_metrics(const Concept& c, const FittingProblem& problem) {
    std::vector<bool> ext = eval_concept(c, *problem.db);
    Metrics m;
    for (int a : problem.positives)
        ext[a] ? ++m.true_pos : ++m.false_neg;
    for (int b : problem.negatives)
        ext[b] ? ++m.false_pos : ++m.true_neg;
    int total = m.true_pos + m.false_pos + m.true_neg + m.false_neg;
    if (total == 0)
        throw std::invalid_argument("metrics require at least one example");
    m.accuracy = (double)(m.true_pos + m.true_neg) / total;
    int predicted = m.true_pos + m.false_pos;
    int actual = m.true_pos + m.false_neg;
    if (predicted == 0 || actual == 0) {
        m.f1_ill_defined = true;  // precision, recall and F1 reported as 0
    } else {
        m.precision = (double)m.true_pos / predicted;
        m.recall = (double)m.true_pos / actual;
        if (m.precision + m.recall > 0.0)
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        else
            m.f1_ill_defined = true;
    }
    return m;
}

struct FoldReport {
    int fold = 0;
    FitStatus status = FitStatus::None;
    int node_count = 0;
    Metrics train;
    Metrics test;
    double seconds = 0.0;
    bool fallback_top = false;  // no concept was learned; evaluated with top
};

struct MeanStddev {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
};

inline MeanStddev mean_stddev(const std::vector<double>& xs) {
    MeanStddev out;
    if (xs.empty())
        return out;
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - out.mean) * (x - out.mean);
        out.stddev = std::sqrt(ss / (xs.size() - 1));
    }
    return out;
}

struct CrossvalReport {
    int folds = 0;
    unsigned seed = 0;
    std::vector<FoldReport> fold_reports;
    MeanStddev node_count;
    MeanStddev accuracy;
    MeanStddev f1;
};

// Deterministic stratified fold assignment: positives and negatives are
// shuffled separately under the seed and dealt round-robin, so each fold
// receives every example exactly once and class ratios stay balanced.
inline std::vector<int> fold_assignment(int count, int folds, std::mt19937& rng, int offset = 0) {
    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold_of(count);
    for (int i = 0; i < count; ++i)
        fold_of[order[i]] = (offset + i) % folds;
    return fold_of;
}

inline CrossvalReport crossval(const FittingProblem& problem, const SearchConfig& config,
                               int folds, unsigned seed) {
    if (folds < 2)
        throw std::invalid_argument("cross-validation requires at least 2 folds");
    if (problem.num_examples() < folds)
        throw std::invalid_argument("cross-validation requires at least one example per fold");
    CrossvalReport report;
    report.folds = folds;
    report.seed = seed;
    std::mt19937 rng(seed);
    // The negative deal starts where the positive one left off, so every fold
    // is nonempty whenever folds <= |P| + |N|.
    std::vector<int> pos_fold = fold_assignment((int)problem.positives.size(), folds, rng);
    std::vector<int> neg_fold = fold_assignment((int)problem.negatives.size(), folds, rng,
                                                (int)problem.positives.size() % folds);

    std::vector<double> sizes, accs, f1s;
    for (int f = 0; f < folds; ++f) {
        std::vector<int> train_pos, train_neg, test_pos, test_neg;
        for (std::size_t i = 0; i < problem.positives.size(); ++i)
            (pos_fold[i] == f ? test_pos : train_pos).push_back(problem.positives[i]);
        for (std::size_t i = 0; i < problem.negatives.size(); ++i)
            (neg_fold[i] == f ? test_neg : train_neg).push_back(problem.negatives[i]);

        FoldReport fr;
        fr.fold = f;
        auto t0 = std::chrono::steady_clock::now();
        FittingProblem train = FittingProblem::from_ids(problem.db, train_pos, train_neg);
        FitResult fit = config.approx ? max_fit(train, config) : bounded_fit(train, config);
        fr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        fr.status = fit.status;
        Concept learned = fit.learned;
        if (!learned) {
            learned = top();
            fr.fallback_top = true;
        }
        fr.node_count = (int)node_count(learned);
        fr.train = compute_metrics(learned, train);
        FittingProblem test = FittingProblem::from_ids(problem.db, test_pos, test_neg);
        fr.test = compute_metrics(learned, test);
        report.fold_reports.push_back(fr);
        sizes.push_back((double)fr.node_count);
        accs.push_back(fr.test.accuracy);
        f1s.push_back(fr.test.f1);
    }
    report.node_count = mean_stddev(sizes);
    report.accuracy = mean_stddev(accs);
    report.f1 = mean_stddev(f1s);
    return report;
}

}  // namespace dlfit
