#pragma once

#include <stdexcept>
#include <vector>

#include "bisim.hpp"
#include "concept.hpp"
#include "eval.hpp"

namespace dlfit {

// A fitting ALCQ concept exists iff no positive is bisimilar to a negative.
inline bool fitting_exists(const FittingProblem& problem, const BisimPartition& partition) {
    for (int a : problem.positives)
        for (int b : problem.negatives)
            if (partition.same_class(a, b))
                return false;
    return true;
}

inline bool fitting_exists(const FittingProblem& problem) {
    return fitting_exists(problem, max_bisimulation(*problem.db, BisimKind::Alcq));
}

// Per-class keep/drop record of the approximate selection.
struct ClassReport {
    int cls = 0;
    int positives_in_class = 0;
    int negatives_in_class = 0;
    bool kept_positives = false;
};

struct ApproxSelection {
    std::vector<int> kept_positives;
    std::vector<int> kept_negatives;
    std::vector<ClassReport> class_report;  // only classes containing examples

    int num_kept() const { return (int)(kept_positives.size() + kept_negatives.size()); }
};

// Per equivalence class X of the maximal bisimulation, keeps P cap X when
// |P cap X| >= |N cap X| and N cap X otherwise. The kept sets are separable
// and of maximal total size (the per-class choice is independent).
inline ApproxSelection approx_select(const FittingProblem& problem,
                                     const BisimPartition& partition) {
    std::map<int, std::pair<std::vector<int>, std::vector<int>>> by_class;
    for (int a : problem.positives)
        by_class[partition.class_of[a]].first.push_back(a);
    for (int b : problem.negatives)
        by_class[partition.class_of[b]].second.push_back(b);
    ApproxSelection out;
    for (const auto& [cls, members] : by_class) {
        const auto& [pos, neg] = members;
        bool keep_pos = pos.size() >= neg.size();
        out.class_report.push_back({cls, (int)pos.size(), (int)neg.size(), keep_pos});
        const auto& kept = keep_pos ? pos : neg;
        auto& sink = keep_pos ? out.kept_positives : out.kept_negatives;
        sink.insert(sink.end(), kept.begin(), kept.end());
    }
    return out;
}

inline ApproxSelection approx_select(const FittingProblem& problem) {
    return approx_select(problem, max_bisimulation(*problem.db, BisimKind::Alcq));
}

// The overfitting concept of the separable problem: the disjunction over
// positives a of the conjunction over negatives b of C_ab. Shared C_ab
// subconcepts make this a DAG of polynomial size. Empty disjunction is bot,
// empty conjunction is top.
inline Concept construct_fitting(const Database& db, const std::vector<int>& positives,
                                 const std::vector<int>& negatives,
                                 const BisimPartition& partition) {
    for (int a : positives)
        for (int b : negatives)
            if (partition.same_class(a, b))
                throw std::invalid_argument("no fitting concept exists: '" +
                                            db.individual_name(a) + "' and '" +
                                            db.individual_name(b) + "' are bisimilar");
    SeparatorBuilder builder(db, partition);
    Concept result;
    for (int a : positives) {
        Concept inner;
        for (int b : negatives) {
            Concept cab = builder.separating_concept(a, b);
            inner = inner ? conjunction(inner, cab) : cab;
        }
        if (!inner)
            inner = top();
        result = result ? disjunction(result, inner) : inner;
    }
    return result ? result : bot();
}

inline Concept construct_fitting(const FittingProblem& problem, const BisimPartition& partition) {
    return construct_fitting(*problem.db, problem.positives, problem.negatives, partition);
}

inline Concept construct_fitting(const FittingProblem& problem) {
    return construct_fitting(problem, max_bisimulation(*problem.db, BisimKind::Alcq));
}

inline Concept construct_fitting(const FittingProblem& problem, const ApproxSelection& selection,
                                 const BisimPartition& partition) {
    return construct_fitting(*problem.db, selection.kept_positives, selection.kept_negatives,
                             partition);
}

}  // namespace dlfit
