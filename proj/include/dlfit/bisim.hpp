#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "concept.hpp"
#include "database.hpp"
#include "eval.hpp"

namespace dlfit {

enum class BisimKind { Alc, Alcq };

// Result of maximal-bisimulation partition refinement. `rounds` keeps the
// class assignment of every refinement round (rho_0 ... rho_*); the trace is
// what separating-concept extraction inducts over.
struct BisimPartition {
    BisimKind kind = BisimKind::Alcq;
    std::vector<int> class_of;                // final partition
    int num_classes = 0;
    std::vector<std::vector<int>> rounds;     // rounds[i] = class_of under rho_i
    std::vector<int> round_class_counts;

    bool same_class(int a, int b) const { return class_of[a] == class_of[b]; }

    // First round at which a and b are in different classes; -1 if never.
    int elimination_round(int a, int b) const {
        for (int i = 0; i < (int)rounds.size(); ++i)
            if (rounds[i][a] != rounds[i][b])
                return i;
        return -1;
    }
};

namespace detail {

// Canonicalized successor profile of one individual for one role: sorted
// (class, count) pairs for ALCQ, sorted class list for ALC.
inline std::vector<std::pair<int, int>> role_profile(const Database& db, int a,
                                                     const std::string& role,
                                                     const std::vector<int>& class_of,
                                                     BisimKind kind) {
    std::map<int, int> counts;
    for (int b : db.successors(a, RoleRef{role, false}))
        counts[class_of[b]] += 1;
    std::vector<std::pair<int, int>> profile;
    profile.reserve(counts.size());
    for (auto [cls, cnt] : counts)
        profile.emplace_back(cls, kind == BisimKind::Alcq ? cnt : 1);
    return profile;
}

}  // namespace detail

// Maximal ALCQ (or ALC) bisimulation by partition refinement with profiles.
// The database must carry concept and role facts only; booleanize features
// first (the bisimulation is not defined over feature facts).
inline BisimPartition max_bisimulation(const Database& db, BisimKind kind) {
    if (db.has_feature_facts())
        throw std::invalid_argument(
            "max_bisimulation requires a database without feature facts (booleanize first)");
    const int n = db.num_individuals();
    const std::vector<std::string> roles = db.role_names();

    BisimPartition out;
    out.kind = kind;

    // rho_0: identical concept-name labels.
    std::vector<int> class_of(n, 0);
    {
        std::map<std::vector<std::string>, int> by_label;
        for (int a = 0; a < n; ++a) {
            auto key = db.labels(a);
            auto [it, inserted] = by_label.emplace(std::move(key), (int)by_label.size());
            class_of[a] = it->second;
        }
        out.rounds.push_back(class_of);
        out.round_class_counts.push_back((int)by_label.size());
    }

    // Refine until stable; class ids are assigned in first-occurrence order
    // of individuals, which keeps the trace deterministic.
    while (true) {
        using Signature = std::pair<int, std::vector<std::vector<std::pair<int, int>>>>;
        std::map<Signature, int> by_sig;
        std::vector<int> next(n);
        for (int a = 0; a < n; ++a) {
            Signature sig;
            sig.first = class_of[a];
            for (const auto& r : roles)
                sig.second.push_back(detail::role_profile(db, a, r, class_of, kind));
            auto [it, inserted] = by_sig.emplace(std::move(sig), (int)by_sig.size());
            next[a] = it->second;
        }
        if ((int)by_sig.size() == out.round_class_counts.back())
            break;
        class_of = next;
        out.rounds.push_back(class_of);
        out.round_class_counts.push_back((int)by_sig.size());
    }

    out.class_of = class_of;
    out.num_classes = out.round_class_counts.back();
    return out;
}

// Builds separating concepts C_ab for non-bisimilar pairs, by induction on
// the elimination round. D_X concepts are shared across pairs, so the output
// is a DAG of size polynomial in the database.
class SeparatorBuilder {
public:
    SeparatorBuilder(const Database& db, const BisimPartition& partition)
        : db_(db), partition_(partition), roles_(db.role_names()) {}

    Concept separating_concept(int a, int b) {
        if (partition_.same_class(a, b))
            throw std::invalid_argument("individuals are bisimilar; no separating concept");
        return pair_concept(a, b);
    }

private:
    Concept pair_concept(int a, int b) {
        auto key = std::make_pair(a, b);
        auto it = pair_memo_.find(key);
        if (it != pair_memo_.end())
            return it->second;
        int round = partition_.elimination_round(a, b);
        Concept c = round == 0 ? base_case(a, b) : step_case(a, b, round);
        pair_memo_.emplace(key, c);
        return c;
    }

    // rho_0 separation: some concept-name label differs.
    Concept base_case(int a, int b) {
        for (const auto& name : db_.concept_names()) {
            bool in_a = db_.has_concept_fact(name, a);
            bool in_b = db_.has_concept_fact(name, b);
            if (in_a && !in_b)
                return concept_name(name);
            if (in_b && !in_a)
                return negation(concept_name(name));
        }
        throw std::logic_error("trace inconsistency: rho_0 separation without label difference");
    }

    // Separation at round i: a role profile over rho_{i-1} classes differs.
    // Prefer the case |succ(a) cap X| < |succ(b) cap X| (then C_ab is a
    // direct restriction); otherwise negate the swapped construction. Ties
    // break on smallest role name, then smallest class id.
    Concept step_case(int a, int b, int round) {
        const std::vector<int>& prev = partition_.rounds[round - 1];
        struct Candidate {
            std::string role;
            int cls;
            int count_kept;
            bool swapped;
        };
        std::optional<Candidate> direct, swapped;
        for (const auto& r : roles_) {
            auto pa = detail::role_profile(db_, a, r, prev, BisimKind::Alcq);
            auto pb = detail::role_profile(db_, b, r, prev, BisimKind::Alcq);
            std::map<int, std::pair<int, int>> merged;
            for (auto [cls, cnt] : pa)
                merged[cls].first = cnt;
            for (auto [cls, cnt] : pb)
                merged[cls].second = cnt;
            for (auto& [cls, counts] : merged) {
                auto [ca, cb] = counts;
                if (ca < cb && !direct)
                    direct = Candidate{r, cls, ca, false};
                if (cb < ca && !swapped)
                    swapped = Candidate{r, cls, cb, true};
            }
            if (direct)
                break;  // roles scanned in sorted order; first direct hit wins
        }
        const Candidate* chosen = direct ? &*direct : (swapped ? &*swapped : nullptr);
        if (!chosen)
            throw std::logic_error("trace inconsistency: differing round without profile witness");
        Concept dx = class_concept(round - 1, chosen->cls);
        Concept restriction =
            partition_.kind == BisimKind::Alcq
                ? at_most((unsigned)chosen->count_kept, RoleRef{chosen->role, false}, dx)
                : negation(exists(RoleRef{chosen->role, false}, dx));
        // For ALC the profile is reachability: count_kept == 0 on the kept
        // side, so "not exists" / "exists" plays the role of the atmost.
        if (partition_.kind == BisimKind::Alc && chosen->count_kept > 0)
            throw std::logic_error("ALC trace inconsistency");
        return chosen->swapped ? negation(restriction) : restriction;
    }

    // D_X for class X of round i: union over d in X of the conjunction of
    // C_de over e outside X.
    Concept class_concept(int round, int cls) {
        auto key = std::make_pair(round, cls);
        auto it = class_memo_.find(key);
        if (it != class_memo_.end())
            return it->second;
        const std::vector<int>& classes = partition_.rounds[round];
        Concept result;
        for (int d = 0; d < (int)classes.size(); ++d) {
            if (classes[d] != cls)
                continue;
            Concept inner;
            for (int e = 0; e < (int)classes.size(); ++e) {
                if (classes[e] == cls)
                    continue;
                Concept cde = pair_concept(d, e);
                inner = inner ? conjunction(inner, cde) : cde;
            }
            if (!inner)
                inner = top();  // X = adom: empty conjunction
            result = result ? disjunction(result, inner) : inner;
        }
        if (!result)
            throw std::logic_error("empty bisimulation class");
        class_memo_.emplace(key, result);
        return result;
    }

    const Database& db_;
    const BisimPartition& partition_;
    std::vector<std::string> roles_;
    std::map<std::pair<int, int>, Concept> pair_memo_;
    std::map<std::pair<int, int>, Concept> class_memo_;
};

inline Concept separating_concept(const Database& db, int a, int b,
                                  const BisimPartition& partition) {
    SeparatorBuilder builder(db, partition);
    return builder.separating_concept(a, b);
}

// The ~-quotient: one individual <class, copy> per equivalence class and
// copy index, with enough copies to preserve successor counts.
struct QuotientDatabase {
    DatabasePtr db;
    BisimPartition partition;                       // of the original database
    std::map<std::string, std::string> example_map; // original name -> <class,1> name
};

inline std::string quotient_individual_name(int cls, int copy) {
    return "q" + std::to_string(cls) + "_" + std::to_string(copy);
}

// Quotient for fragments without number restrictions: a single individual
// per ALC class. Sound because the map a -> [a] is an ALC bisimulation
// between the database and the collapsed one (successor multiplicities are
// not preserved and do not need to be).
inline QuotientDatabase alc_quotient(const Database& db) {
    QuotientDatabase out;
    out.partition = max_bisimulation(db, BisimKind::Alc);
    const int n = db.num_individuals();
    const auto& cls = out.partition.class_of;
    const int num_classes = out.partition.num_classes;

    std::vector<int> representative(num_classes, -1);
    for (int a = 0; a < n; ++a)
        if (representative[cls[a]] < 0)
            representative[cls[a]] = a;

    FactSet facts;
    for (int x = 0; x < num_classes; ++x) {
        for (const auto& name : db.labels(representative[x]))
            facts.concepts.push_back({name, quotient_individual_name(x, 1)});
        facts.extra_individuals.push_back(quotient_individual_name(x, 1));
    }
    for (const auto& r : db.role_names()) {
        for (int x = 0; x < num_classes; ++x) {
            std::set<int> targets;
            for (int c : db.successors(representative[x], RoleRef{r, false}))
                targets.insert(cls[c]);
            for (int y : targets)
                facts.roles.push_back(
                    {r, quotient_individual_name(x, 1), quotient_individual_name(y, 1)});
        }
    }
    out.db = facts.build();
    for (int a = 0; a < n; ++a)
        out.example_map[db.individual_name(a)] = quotient_individual_name(cls[a], 1);
    return out;
}

inline QuotientDatabase quotient(const Database& db) {
    QuotientDatabase out;
    out.partition = max_bisimulation(db, BisimKind::Alcq);
    const int n = db.num_individuals();
    const auto& cls = out.partition.class_of;
    const int num_classes = out.partition.num_classes;
    const std::vector<std::string> roles = db.role_names();

    std::vector<int> representative(num_classes, -1);
    for (int a = 0; a < n; ++a)
        if (representative[cls[a]] < 0)
            representative[cls[a]] = a;

    // copies[X] = max over b, r of |succ_r(b) cap X|, at least 1.
    std::vector<int> copies(num_classes, 1);
    for (const auto& r : roles) {
        for (int b = 0; b < n; ++b) {
            std::map<int, int> counts;
            for (int c : db.successors(b, RoleRef{r, false}))
                counts[cls[c]] += 1;
            for (auto [x, cnt] : counts)
                copies[x] = std::max(copies[x], cnt);
        }
    }

    FactSet facts;
    for (int x = 0; x < num_classes; ++x) {
        for (const auto& name : db.labels(representative[x]))
            for (int i = 1; i <= copies[x]; ++i)
                facts.concepts.push_back({name, quotient_individual_name(x, i)});
    }
    for (const auto& r : roles) {
        for (int x = 0; x < num_classes; ++x) {
            // All members of a class have identical profiles in the final
            // partition, so any representative determines the successor
            // counts.
            std::map<int, int> counts;
            for (int c : db.successors(representative[x], RoleRef{r, false}))
                counts[cls[c]] += 1;
            for (auto [y, cnt] : counts)
                for (int i = 1; i <= copies[x]; ++i)
                    for (int j = 1; j <= cnt; ++j)
                        facts.roles.push_back({r, quotient_individual_name(x, i),
                                               quotient_individual_name(y, j)});
        }
    }
    // Keep every <class, copy> individual in adom even when it carries no
    // facts (unlabeled isolated classes).
    for (int x = 0; x < num_classes; ++x)
        for (int i = 1; i <= copies[x]; ++i)
            facts.extra_individuals.push_back(quotient_individual_name(x, i));

    out.db = facts.build();
    for (int a = 0; a < n; ++a)
        out.example_map[db.individual_name(a)] = quotient_individual_name(cls[a], 1);
    return out;
}

}  // namespace dlfit
