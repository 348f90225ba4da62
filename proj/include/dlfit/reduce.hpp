#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "concept.hpp"
#include "database.hpp"
#include "decimal.hpp"

namespace dlfit {

// Per-feature booleanization record: selected thresholds with their fresh
// concept names, plus what restore_features needs for cosmetics.
struct FeatureThresholds {
    std::vector<Decimal> thresholds;       // strictly increasing
    std::vector<std::string> fresh_names;  // parallel to thresholds
    std::vector<Decimal> observed;         // sorted distinct observed values
    bool total = false;                    // every individual carries the feature
};

struct ReductionContext {
    std::map<std::string, std::string> role_map;     // r -> fresh reversed role
    std::map<std::string, std::string> inverse_map;  // fresh reversed role -> r
    std::map<std::string, FeatureThresholds> features;
    std::map<std::string, std::pair<std::string, Decimal>> fresh_to_feature;

    bool is_fresh_role(const std::string& name) const { return inverse_map.count(name) > 0; }
};

inline std::string fresh_inverse_role_name(const std::string& role) {
    return std::string(kInverseRolePrefix) + role;
}

inline std::string fresh_threshold_name(const std::string& feature, const Decimal& v) {
    std::string val = v.str();
    for (char& c : val) {
        if (c == '.')
            c = '_';
        else if (c == '-')
            c = 'm';
    }
    return std::string(kFeatureNamePrefix) + feature + "_" + val;
}

// J = I plus a reversed-role fact for every role fact.
inline std::pair<DatabasePtr, ReductionContext> add_inverse_roles(const Database& db) {
    ReductionContext ctx;
    for (const auto& r : db.role_names())
        if (has_reserved_prefix(r))
            throw std::invalid_argument("role collides with reserved fresh-name prefix: " + r);
    FactSet facts;
    facts.concepts = db.all_concept_facts();
    facts.features = db.all_feature_facts();
    for (int a = 0; a < db.num_individuals(); ++a)
        facts.extra_individuals.push_back(db.individual_name(a));
    for (const auto& f : db.all_role_facts()) {
        facts.roles.push_back(f);
        std::string fresh = fresh_inverse_role_name(f.name);
        facts.roles.push_back({fresh, f.target, f.source});
        ctx.role_map[f.name] = fresh;
        ctx.inverse_map[fresh] = f.name;
    }
    return {facts.build(), ctx};
}

// Replaces fresh reversed roles by proper inverse roles (and vice versa for
// their inverses), preserving extensions over the original database.
inline Concept restore_inverse_roles(const Concept& c, const ReductionContext& ctx) {
    std::unordered_map<const ConceptNode*, Concept> memo;
    auto rec = [&](auto&& self, const Concept& node) -> Concept {
        auto it = memo.find(node.get());
        if (it != memo.end())
            return it->second;
        Concept out;
        switch (node->kind) {
            case ConceptKind::Not:
                out = negation(self(self, node->left));
                break;
            case ConceptKind::And:
                out = conjunction(self(self, node->left), self(self, node->right));
                break;
            case ConceptKind::Or:
                out = disjunction(self(self, node->left), self(self, node->right));
                break;
            case ConceptKind::AtLeast:
            case ConceptKind::AtMost: {
                RoleRef role = node->role;
                auto jt = ctx.inverse_map.find(role.name);
                if (jt != ctx.inverse_map.end())
                    role = RoleRef{jt->second, !role.inverse};
                Concept child = self(self, node->left);
                out = node->kind == ConceptKind::AtLeast ? at_least(node->number, role, child)
                                                         : at_most(node->number, role, child);
                break;
            }
            default:
                out = node;
        }
        memo.emplace(node.get(), out);
        return out;
    };
    return rec(rec, c);
}

enum class SnapMode { Up, Raw };

namespace detail {

// v >= (lo*(n-i) + hi*i) / n, exactly.
inline bool geq_cut(const Decimal& v, const Decimal& lo, const Decimal& hi, long i, long n) {
    int e = std::min({v.exponent(), lo.exponent(), hi.exponent()});
    auto scaled = [e](const Decimal& d) {
        __int128 m = d.mantissa();
        for (int k = 0; k < d.exponent() - e; ++k)
            m *= 10;
        return m;
    };
    return scaled(v) * n >= scaled(lo) * (n - i) + scaled(hi) * i;
}

// Raw cut point rendered as a decimal with six guard digits (floor).
inline Decimal raw_cut(const Decimal& lo, const Decimal& hi, long i, long n) {
    int e = std::min(lo.exponent(), hi.exponent());
    auto scaled = [e](const Decimal& d) {
        __int128 m = d.mantissa();
        for (int k = 0; k < d.exponent() - e; ++k)
            m *= 10;
        return m;
    };
    __int128 num = scaled(lo) * (n - i) + scaled(hi) * i;
    for (int k = 0; k < 6; ++k)
        num *= 10;
    __int128 q = num / n;
    if (num % n != 0 && num < 0)
        --q;  // floor
    return Decimal((std::int64_t)q, e - 6);
}

}  // namespace detail

// Splits [min observed, max observed] into n_f equal-width intervals and
// returns the minimum plus the interior cut points, snapped (by default) up
// to the nearest observed value. When n_f covers every distinct value the
// full value list is returned.
inline std::vector<Decimal> select_thresholds(const Database& db, const std::string& feature,
                                              int n_f, SnapMode snap = SnapMode::Up) {
    if (n_f < 1)
        throw std::invalid_argument("select_thresholds requires n_f >= 1");
    std::vector<Decimal> observed = db.observed_values(feature);
    if (observed.empty())
        return {};
    if (n_f >= (int)observed.size())
        return observed;
    const Decimal lo = observed.front(), hi = observed.back();
    std::vector<Decimal> out{lo};
    for (int i = 1; i < n_f; ++i) {
        if (snap == SnapMode::Up) {
            // Smallest observed value at or above the cut; always realizable.
            for (const Decimal& v : observed) {
                if (detail::geq_cut(v, lo, hi, i, n_f)) {
                    out.push_back(v);
                    break;
                }
            }
        } else {
            out.push_back(detail::raw_cut(lo, hi, i, n_f));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Drops feature facts and adds the fresh concept fact A_{f>=v}(a) whenever
// f(a, v') is a fact with v' >= v.
inline std::pair<DatabasePtr, ReductionContext> booleanize_features(
    const Database& db, const std::map<std::string, std::vector<Decimal>>& thresholds) {
    ReductionContext ctx;
    for (const auto& name : db.concept_names())
        if (has_reserved_prefix(name))
            throw std::invalid_argument("concept name collides with reserved prefix: " + name);
    FactSet facts;
    facts.concepts = db.all_concept_facts();
    facts.roles = db.all_role_facts();
    for (int a = 0; a < db.num_individuals(); ++a)
        facts.extra_individuals.push_back(db.individual_name(a));
    for (const auto& [feature, cuts] : thresholds) {
        FeatureThresholds info;
        info.observed = db.observed_values(feature);
        Decimal prev;
        bool first = true;
        for (const Decimal& v : cuts) {
            if (!first && !(prev < v))
                throw std::invalid_argument("thresholds must be strictly increasing: " + feature);
            prev = v;
            first = false;
            std::string fresh = fresh_threshold_name(feature, v);
            info.thresholds.push_back(v);
            info.fresh_names.push_back(fresh);
            ctx.fresh_to_feature[fresh] = {feature, v};
        }
        int carriers = 0;
        for (int a = 0; a < db.num_individuals(); ++a) {
            const Decimal* val = db.feature_value(feature, a);
            if (!val)
                continue;
            ++carriers;
            for (std::size_t t = 0; t < info.thresholds.size(); ++t)
                if (*val >= info.thresholds[t])
                    facts.concepts.push_back({info.fresh_names[t], db.individual_name(a)});
        }
        info.total = carriers == db.num_individuals();
        ctx.features[feature] = std::move(info);
    }
    return {facts.build(), ctx};
}

// A_{f>=v} becomes (f >= v). A negated A_{f>=v} is additionally rewritten to
// (f <= pred(v)) when every individual carries f and a smaller observed value
// exists; otherwise the negation stays (individuals without the feature
// satisfy neither comparison).
inline Concept restore_features(const Concept& c, const ReductionContext& ctx) {
    std::unordered_map<const ConceptNode*, Concept> memo;
    auto lookup = [&](const Concept& node) -> const std::pair<std::string, Decimal>* {
        if (node->kind != ConceptKind::Name)
            return nullptr;
        auto it = ctx.fresh_to_feature.find(node->name);
        return it == ctx.fresh_to_feature.end() ? nullptr : &it->second;
    };
    auto rec = [&](auto&& self, const Concept& node) -> Concept {
        auto it = memo.find(node.get());
        if (it != memo.end())
            return it->second;
        Concept out;
        if (const auto* fv = lookup(node)) {
            out = feature_geq(fv->first, fv->second);
        } else if (node->kind == ConceptKind::Not) {
            if (const auto* fv = lookup(node->left)) {
                const FeatureThresholds& info = ctx.features.at(fv->first);
                const Decimal* pred = nullptr;
                for (const Decimal& o : info.observed)
                    if (o < fv->second)
                        pred = &o;
                if (info.total && pred)
                    out = feature_leq(fv->first, *pred);
                else
                    out = negation(feature_geq(fv->first, fv->second));
            } else {
                out = negation(self(self, node->left));
            }
        } else {
            switch (node->kind) {
                case ConceptKind::And:
                    out = conjunction(self(self, node->left), self(self, node->right));
                    break;
                case ConceptKind::Or:
                    out = disjunction(self(self, node->left), self(self, node->right));
                    break;
                case ConceptKind::AtLeast:
                    out = at_least(node->number, node->role, self(self, node->left));
                    break;
                case ConceptKind::AtMost:
                    out = at_most(node->number, node->role, self(self, node->left));
                    break;
                default:
                    out = node;
            }
        }
        memo.emplace(node.get(), out);
        return out;
    };
    return rec(rec, c);
}

// Forward direction of both reductions, for concepts over the original
// database: inverse roles become fresh reversed roles and feature
// comparisons become (combinations of) fresh concept names. Extension-exact
// when the comparison values occur among the thresholds.
inline Concept forward_translate(const Concept& c, const ReductionContext& ctx) {
    std::unordered_map<const ConceptNode*, Concept> memo;
    auto rec = [&](auto&& self, const Concept& node) -> Concept {
        auto it = memo.find(node.get());
        if (it != memo.end())
            return it->second;
        Concept out;
        switch (node->kind) {
            case ConceptKind::Not:
                out = negation(self(self, node->left));
                break;
            case ConceptKind::And:
                out = conjunction(self(self, node->left), self(self, node->right));
                break;
            case ConceptKind::Or:
                out = disjunction(self(self, node->left), self(self, node->right));
                break;
            case ConceptKind::AtLeast:
            case ConceptKind::AtMost: {
                RoleRef role = node->role;
                if (role.inverse) {
                    auto jt = ctx.role_map.find(role.name);
                    if (jt != ctx.role_map.end())
                        role = RoleRef{jt->second, false};
                }
                Concept child = self(self, node->left);
                out = node->kind == ConceptKind::AtLeast ? at_least(node->number, role, child)
                                                         : at_most(node->number, role, child);
                break;
            }
            case ConceptKind::FeatureGeq:
            case ConceptKind::FeatureLeq: {
                auto jt = ctx.features.find(node->name);
                if (jt == ctx.features.end()) {
                    out = bot();  // no thresholds: the comparison is unexpressible
                    break;
                }
                const FeatureThresholds& info = jt->second;
                if (node->kind == ConceptKind::FeatureGeq) {
                    // Smallest threshold >= v; the threshold extensions are
                    // nested, so the disjunction collapses to a single name.
                    out = bot();
                    for (std::size_t t = 0; t < info.thresholds.size(); ++t) {
                        if (info.thresholds[t] >= node->value) {
                            out = concept_name(info.fresh_names[t]);
                            break;
                        }
                    }
                } else {
                    // (f <= v) = carries-f and not (f >= succ(v)).
                    if (info.thresholds.empty()) {
                        out = bot();
                        break;
                    }
                    Concept carrier = concept_name(info.fresh_names.front());
                    Concept result = carrier;
                    for (std::size_t t = 0; t < info.thresholds.size(); ++t) {
                        if (info.thresholds[t] > node->value) {
                            result = conjunction(carrier,
                                                 negation(concept_name(info.fresh_names[t])));
                            break;
                        }
                    }
                    out = result;
                }
                break;
            }
            default:
                out = node;
        }
        memo.emplace(node.get(), out);
        return out;
    };
    return rec(rec, c);
}

}  // namespace dlfit
