#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bisim.hpp"
#include "database.hpp"

namespace dlfit {

// Hard fitting instance derived from a hitting-set instance: one r-path per
// set plus the empty-set path, path nodes expanded into groups of pairwise
// bisimilar individuals, and s-detours bridging every index missing from a
// set. A fitting concept of at most k' = k + n + 2 nodes exists iff the set
// collection has a hitting set of size at most k.
struct HittingSetInstance {
    DatabasePtr db;
    std::string positive;  // a member of the root group of the empty-set path
    std::string negative;  // a member of the other root group
    int n = 0;             // universe is {1..n}
    int k = 0;
    int k_prime = 0;       // k + n + 2
    int group_size = 0;
    bool has_hitting_set = false;
    int min_hitting_set = 0;  // 0 when none exists within {1..n}
};

// Smallest hitting set size by exhaustive search; returns n + 1 if the
// (covering) collection somehow admits none, which cannot happen when the
// union of the sets is the whole universe.
inline int brute_force_min_hitting_set(const std::vector<std::set<int>>& sets, int n) {
    for (int size = 0; size <= n; ++size) {
        std::vector<int> pick(size);
        auto rec = [&](auto&& self, int start, int depth) -> bool {
            if (depth == size) {
                for (const auto& s : sets) {
                    bool hit = false;
                    for (int d = 0; d < size; ++d)
                        if (s.count(pick[d]))
                            hit = true;
                    if (!hit)
                        return false;
                }
                return true;
            }
            for (int v = start; v <= n; ++v) {
                pick[depth] = v;
                if (self(self, v + 1, depth + 1))
                    return true;
            }
            return false;
        };
        if (rec(rec, 1, 0))
            return size;
    }
    return n + 1;
}

inline HittingSetInstance gen_hitting_set(const std::vector<std::set<int>>& sets, int k,
                                          int group_size = 0) {
    if (sets.empty())
        throw std::invalid_argument("hitting-set generator needs at least one set");
    if (k < 1)
        throw std::invalid_argument("hitting-set bound k must be >= 1");
    int n = 0;
    for (const auto& s : sets)
        for (int v : s) {
            if (v < 1)
                throw std::invalid_argument("set elements must be positive");
            n = std::max(n, v);
        }
    std::set<int> covered;
    for (const auto& s : sets)
        covered.insert(s.begin(), s.end());
    if ((int)covered.size() != n)
        throw std::invalid_argument("sets must cover the whole universe {1..n}");

    HittingSetInstance out;
    out.n = n;
    out.k = k;
    out.k_prime = k + n + 2;
    out.group_size = group_size > 0 ? group_size : out.k_prime + 1;
    const int G = out.group_size;
    const int m = (int)sets.size();

    FactSet facts;
    auto member = [&](const std::string& group, int c) {
        return group + "_" + std::to_string(c);
    };
    auto group_edge = [&](const std::string& role, const std::string& from,
                          const std::string& to) {
        for (int c = 1; c <= G; ++c)
            for (int d = 1; d <= G; ++d)
                facts.roles.push_back({role, member(from, c), member(to, d)});
    };
    auto group_label = [&](const std::string& name, const std::string& group) {
        for (int c = 1; c <= G; ++c)
            facts.concepts.push_back({name, member(group, c)});
    };
    auto group_pin = [&](const std::string& group) {
        for (int c = 1; c <= G; ++c)
            facts.extra_individuals.push_back(member(group, c));
    };
    auto a_node = [&](int i) { return "a" + std::to_string(i); };
    auto a_prime = [&](int i) { return "ap" + std::to_string(i); };
    auto b_node = [&](int j, int i) { return "b" + std::to_string(j) + "_" + std::to_string(i); };
    auto b_prime = [&](int j, int i) {
        return "bp" + std::to_string(j) + "_" + std::to_string(i);
    };

    // Domain, including the primed detour groups that stay isolated.
    group_pin("a");
    group_pin("b");
    for (int i = 0; i <= n; ++i) {
        group_pin(a_node(i));
        group_pin(a_prime(i));
    }
    for (int j = 1; j <= m; ++j)
        for (int i = 0; i <= n; ++i) {
            group_pin(b_node(j, i));
            group_pin(b_prime(j, i));
        }

    // Path ends carry A.
    group_label("A", a_node(n));
    for (int j = 1; j <= m; ++j)
        group_label("A", b_node(j, n));

    // Roots connect to the path starts; the positive root also sees every
    // set path.
    group_edge("r", "a", a_node(0));
    for (int j = 1; j <= m; ++j) {
        group_edge("r", "a", b_node(j, 0));
        group_edge("r", "b", b_node(j, 0));
    }
    // r-paths.
    for (int i = 1; i <= n; ++i)
        group_edge("r", a_node(i - 1), a_node(i));
    for (int j = 1; j <= m; ++j)
        for (int i = 1; i <= n; ++i)
            group_edge("r", b_node(j, i - 1), b_node(j, i));
    // s-detours: everywhere on the empty-set path, and at the missing
    // indices of each set path.
    for (int i = 1; i <= n; ++i) {
        group_edge("s", a_node(i - 1), a_prime(i));
        group_edge("s", a_prime(i), a_node(i));
    }
    for (int j = 1; j <= m; ++j) {
        const auto& s = sets[j - 1];
        for (int i = 1; i <= n; ++i) {
            if (s.count(i))
                continue;
            group_edge("s", b_node(j, i - 1), b_prime(j, i));
            group_edge("s", b_prime(j, i), b_node(j, i));
        }
    }

    out.db = facts.build();
    out.positive = member("a", 1);
    out.negative = member("b", 1);
    out.min_hitting_set = brute_force_min_hitting_set(sets, n);
    out.has_hitting_set = out.min_hitting_set <= k;
    return out;
}

// One generated separation problem: positives and negatives are
// representatives of ALCQ classes inside a single ALC class, so an ALCQ
// fitting exists while no ALC concept can separate them.
struct SeparationProblem {
    std::vector<std::string> positives;
    std::vector<std::string> negatives;
    std::vector<int> alc_classes;  // source ALC class ids (one, or two merged)
};

inline std::vector<SeparationProblem> gen_alcq_separation(const Database& db, unsigned seed) {
    if (db.has_feature_facts())
        throw std::invalid_argument("separation generator requires a feature-free database");
    BisimPartition alc = max_bisimulation(db, BisimKind::Alc);
    BisimPartition alcq = max_bisimulation(db, BisimKind::Alcq);

    // ALCQ class representatives grouped by enclosing ALC class.
    std::map<int, std::map<int, int>> reps;  // alc class -> alcq class -> representative
    for (int a = 0; a < db.num_individuals(); ++a) {
        auto& inner = reps[alc.class_of[a]];
        inner.emplace(alcq.class_of[a], a);
    }
    std::mt19937 rng(seed);
    std::vector<SeparationProblem> out;
    for (const auto& [alc_cls, inner] : reps) {
        if (inner.size() < 2)
            continue;
        std::vector<int> members;
        for (const auto& [_, rep] : inner)
            members.push_back(rep);
        std::shuffle(members.begin(), members.end(), rng);
        // Half the ALCQ classes become positives; for odd counts a coin flip
        // decides which side gets the extra representative.
        std::size_t half = members.size() / 2;
        if (members.size() % 2 == 1 && std::uniform_int_distribution<int>(0, 1)(rng) == 1)
            ++half;
        SeparationProblem p;
        p.alc_classes.push_back(alc_cls);
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < half ? p.positives : p.negatives).push_back(db.individual_name(members[i]));
        if (p.positives.empty() || p.negatives.empty())
            continue;
        out.push_back(std::move(p));
    }
    // Second pass: merge consecutive pairs into larger problems.
    std::vector<SeparationProblem> merged;
    for (std::size_t i = 0; i + 1 < out.size(); i += 2) {
        SeparationProblem p = out[i];
        const SeparationProblem& q = out[i + 1];
        p.positives.insert(p.positives.end(), q.positives.begin(), q.positives.end());
        p.negatives.insert(p.negatives.end(), q.negatives.begin(), q.negatives.end());
        p.alc_classes.push_back(q.alc_classes.front());
        merged.push_back(std::move(p));
    }
    out.insert(out.end(), merged.begin(), merged.end());
    return out;
}

}  // namespace dlfit
