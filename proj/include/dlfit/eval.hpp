#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "concept.hpp"
#include "database.hpp"

namespace dlfit {

namespace detail {

inline const std::vector<bool>& eval_rec(
    const Concept& c, const Database& db,
    std::unordered_map<const ConceptNode*, std::vector<bool>>& memo) {
    auto it = memo.find(c.get());
    if (it != memo.end())
        return it->second;
    const int n = db.num_individuals();
    std::vector<bool> ext(n, false);
    switch (c->kind) {
        case ConceptKind::Top:
            ext.assign(n, true);
            break;
        case ConceptKind::Bot:
            break;
        case ConceptKind::Name:
            // Unknown names denote empty extensions.
            if (const auto* members = db.concept_extension(c->name))
                ext = *members;
            break;
        case ConceptKind::Not: {
            const auto& child = eval_rec(c->left, db, memo);
            for (int a = 0; a < n; ++a)
                ext[a] = !child[a];
            break;
        }
        case ConceptKind::And: {
            const auto& l = eval_rec(c->left, db, memo);
            const auto& r = eval_rec(c->right, db, memo);
            for (int a = 0; a < n; ++a)
                ext[a] = l[a] && r[a];
            break;
        }
        case ConceptKind::Or: {
            const auto& l = eval_rec(c->left, db, memo);
            const auto& r = eval_rec(c->right, db, memo);
            for (int a = 0; a < n; ++a)
                ext[a] = l[a] || r[a];
            break;
        }
        case ConceptKind::AtLeast:
        case ConceptKind::AtMost: {
            const auto& child = eval_rec(c->left, db, memo);
            for (int a = 0; a < n; ++a) {
                unsigned count = 0;
                for (int b : db.successors(a, c->role))
                    if (child[b])
                        ++count;
                ext[a] = c->kind == ConceptKind::AtLeast ? count >= c->number
                                                         : count <= c->number;
            }
            break;
        }
        case ConceptKind::FeatureGeq:
        case ConceptKind::FeatureLeq:
            // Individuals lacking a feature fact never satisfy a comparison.
            for (int a = 0; a < n; ++a) {
                const Decimal* v = db.feature_value(c->name, a);
                if (!v)
                    continue;
                ext[a] = c->kind == ConceptKind::FeatureGeq ? *v >= c->value : *v <= c->value;
            }
            break;
    }
    return memo.emplace(c.get(), std::move(ext)).first->second;
}

}  // namespace detail

// Computes C^I bottom-up with memoization on shared DAG nodes.
inline std::vector<bool> eval_concept(const Concept& c, const Database& db) {
    std::unordered_map<const ConceptNode*, std::vector<bool>> memo;
    return detail::eval_rec(c, db, memo);
}

// Labeled examples over a database. Positives and negatives must resolve to
// adom individuals and be disjoint.
struct FittingProblem {
    DatabasePtr db;
    std::vector<int> positives;
    std::vector<int> negatives;

    FittingProblem() = default;

    FittingProblem(DatabasePtr database, const std::vector<std::string>& pos,
                   const std::vector<std::string>& neg)
        : db(std::move(database)) {
        auto resolve = [&](const std::string& name) {
            int id = db->individual_id(name);
            if (id < 0)
                throw std::invalid_argument("example individual not in database: " + name);
            return id;
        };
        for (const auto& p : pos)
            positives.push_back(resolve(p));
        for (const auto& n : neg)
            negatives.push_back(resolve(n));
        check_disjoint();
    }

    static FittingProblem from_ids(DatabasePtr database, std::vector<int> pos,
                                   std::vector<int> neg) {
        FittingProblem p;
        p.db = std::move(database);
        p.positives = std::move(pos);
        p.negatives = std::move(neg);
        for (int a : p.positives)
            if (a < 0 || a >= p.db->num_individuals())
                throw std::invalid_argument("example id out of range");
        for (int a : p.negatives)
            if (a < 0 || a >= p.db->num_individuals())
                throw std::invalid_argument("example id out of range");
        p.check_disjoint();
        return p;
    }

    int num_examples() const { return (int)(positives.size() + negatives.size()); }

private:
    void check_disjoint() const {
        for (int a : positives)
            for (int b : negatives)
                if (a == b)
                    throw std::invalid_argument("example '" + db->individual_name(a) +
                                                "' is both positive and negative");
    }
};

struct FitCheck {
    bool fits = false;
    // One entry per example, positives first then negatives: true iff the
    // example is classified correctly.
    std::vector<bool> per_example;
};

inline FitCheck fits(const Concept& c, const FittingProblem& problem) {
    std::vector<bool> ext = eval_concept(c, *problem.db);
    FitCheck out;
    out.fits = true;
    for (int a : problem.positives) {
        out.per_example.push_back(ext[a]);
        out.fits = out.fits && ext[a];
    }
    for (int b : problem.negatives) {
        out.per_example.push_back(!ext[b]);
        out.fits = out.fits && !ext[b];
    }
    return out;
}

}  // namespace dlfit
