#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnf.hpp"
#include "concept.hpp"
#include "database.hpp"
#include "eval.hpp"
#include "topology.hpp"

namespace dlfit {

// Admissible syntax-tree node labels. Unused is a pseudo-label marking
// trailing nodes that are not part of the concept, so one instance of size k
// covers every concept size up to k.
struct NodeLabel {
    enum class Kind { Top, Bot, Not, And, Or, Name, Exists, Forall, AtLeast, AtMost, Unused };
    Kind kind = Kind::Top;
    std::string name;  // concept name or role name
    int number = 0;    // for AtLeast / AtMost

    int arity() const {
        switch (kind) {
            case Kind::Not:
            case Kind::Exists:
            case Kind::Forall:
            case Kind::AtLeast:
            case Kind::AtMost:
                return 1;
            case Kind::And:
            case Kind::Or:
                return 2;
            default:
                return 0;
        }
    }

    std::string str() const {
        switch (kind) {
            case Kind::Top: return "top";
            case Kind::Bot: return "bot";
            case Kind::Not: return "not";
            case Kind::And: return "and";
            case Kind::Or: return "or";
            case Kind::Name: return name;
            case Kind::Exists: return "exists_" + name;
            case Kind::Forall: return "forall_" + name;
            case Kind::AtLeast: return "atleast_" + std::to_string(number) + "_" + name;
            case Kind::AtMost: return "atmost_" + std::to_string(number) + "_" + name;
            case Kind::Unused: return "unused";
        }
        return "?";
    }
};

struct EncodeOptions {
    int k = 1;
    int g_bound = 1;
    bool counting = true;         // admit the (>= n r) / (<= n r) label families
    bool add_fitting_units = true;
    bool add_indicators = false;  // per-example correctness indicators (max-fit)
    int max_k = 64;
    std::size_t clause_ceiling = 100000000;
};

// The encoded instance: CNF plus the variable families needed for decoding
// and for augmenting the formula (topology pinning, max-fit thresholds).
struct CnfInstance {
    std::shared_ptr<CnfBuilder> builder;
    DatabasePtr db;
    std::vector<int> positives, negatives;
    std::vector<NodeLabel> labels;
    int k = 0, g_bound = 0;
    int unused_label = -1;

    // x[i][l], y1[i][j], y2[i][j] (children j and j+1), z[i][a]; all are CNF
    // variables, 0 where a combination is not allocated.
    std::vector<std::vector<int>> x, y1, y2, z;

    // Per example (positives then negatives): indicator <=> classified
    // correctly at the root. count_geq[t-1] is a literal for (correct >= t).
    std::vector<int> indicators;
    std::vector<int> count_geq;

    std::size_t counting_clauses = 0;  // number-restriction clause family size

    const Cnf& cnf() const { return builder->cnf(); }
};

inline CnfInstance encode(const FittingProblem& problem, const EncodeOptions& opt) {
    if (opt.k < 1)
        throw std::invalid_argument("stage size k must be >= 1");
    if (opt.k > opt.max_k)
        throw std::invalid_argument("stage size k exceeds the configured ceiling");
    if (opt.counting && opt.g_bound < 1)
        throw std::invalid_argument("g bound must be >= 1");
    const Database& db = *problem.db;
    if (db.has_feature_facts())
        throw std::invalid_argument("encode requires a feature-free database (booleanize first)");

    CnfInstance inst;
    inst.builder = std::make_shared<CnfBuilder>();
    inst.db = problem.db;
    inst.positives = problem.positives;
    inst.negatives = problem.negatives;
    inst.k = opt.k;
    inst.g_bound = opt.counting ? opt.g_bound : 0;
    CnfBuilder& b = *inst.builder;
    const int k = opt.k;
    const int n = db.num_individuals();
    const std::vector<std::string> roles = db.role_names();

    // Label set: fixed core, concept names, quantifiers, number restrictions
    // up to the g bound, and the trailing Unused pseudo-label.
    auto& labels = inst.labels;
    labels.push_back({NodeLabel::Kind::Top, "", 0});
    labels.push_back({NodeLabel::Kind::Bot, "", 0});
    labels.push_back({NodeLabel::Kind::Not, "", 0});
    labels.push_back({NodeLabel::Kind::And, "", 0});
    labels.push_back({NodeLabel::Kind::Or, "", 0});
    for (const auto& name : db.concept_names())
        labels.push_back({NodeLabel::Kind::Name, name, 0});
    for (const auto& r : roles) {
        labels.push_back({NodeLabel::Kind::Exists, r});
        labels.push_back({NodeLabel::Kind::Forall, r});
    }
    if (opt.counting) {
        for (const auto& r : roles) {
            for (int m = 1; m <= opt.g_bound; ++m)
                labels.push_back({NodeLabel::Kind::AtLeast, r, m});
            for (int m = 0; m <= opt.g_bound; ++m)
                labels.push_back({NodeLabel::Kind::AtMost, r, m});
        }
    }
    inst.unused_label = (int)labels.size();
    labels.push_back({NodeLabel::Kind::Unused, "", 0});
    const int num_labels = (int)labels.size();

    // Variable allocation, x then y then z, node-major.
    inst.x.assign(k, std::vector<int>(num_labels, 0));
    inst.y1.assign(k, std::vector<int>(k, 0));
    inst.y2.assign(k, std::vector<int>(k, 0));
    inst.z.assign(k, std::vector<int>(n, 0));
    for (int i = 0; i < k; ++i)
        for (int l = 0; l < num_labels; ++l)
            inst.x[i][l] = b.new_var("x_" + std::to_string(i + 1) + "_" + labels[l].str());
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j)
            inst.y1[i][j] = b.new_var("y1_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
        for (int j = i + 1; j + 1 < k; ++j)
            inst.y2[i][j] = b.new_var("y2_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    }
    for (int i = 0; i < k; ++i)
        for (int a = 0; a < n; ++a)
            inst.z[i][a] =
                b.new_var("z_" + std::to_string(i + 1) + "_" + db.individual_name(a));

    // (a) structure: exactly one label per node.
    for (int i = 0; i < k; ++i) {
        std::vector<int> all(inst.x[i]);
        b.add_clause(all);
        for (int l1 = 0; l1 < num_labels; ++l1)
            for (int l2 = l1 + 1; l2 < num_labels; ++l2)
                b.add_clause({-inst.x[i][l1], -inst.x[i][l2]});
    }
    // The root is always used; unused nodes form a suffix.
    b.add_clause({-inst.x[0][inst.unused_label]});
    for (int i = 0; i + 1 < k; ++i)
        b.add_clause({-inst.x[i][inst.unused_label], inst.x[i + 1][inst.unused_label]});

    // Label arity drives the child wiring.
    for (int i = 0; i < k; ++i) {
        std::vector<int> unary_x, binary_x, y_all;
        for (int l = 0; l < num_labels; ++l) {
            if (labels[l].arity() == 1)
                unary_x.push_back(inst.x[i][l]);
            else if (labels[l].arity() == 2)
                binary_x.push_back(inst.x[i][l]);
        }
        std::vector<int> y1s, y2s;
        for (int j = i + 1; j < k; ++j)
            y1s.push_back(inst.y1[i][j]);
        for (int j = i + 1; j + 1 < k; ++j)
            y2s.push_back(inst.y2[i][j]);
        for (int xl : unary_x) {
            std::vector<int> clause{-xl};
            clause.insert(clause.end(), y1s.begin(), y1s.end());
            b.add_clause(clause);  // unit -x when no child slot exists
        }
        for (int xl : binary_x) {
            std::vector<int> clause{-xl};
            clause.insert(clause.end(), y2s.begin(), y2s.end());
            b.add_clause(clause);
        }
        for (int y : y1s) {
            std::vector<int> clause{-y};
            clause.insert(clause.end(), unary_x.begin(), unary_x.end());
            b.add_clause(clause);
        }
        for (int y : y2s) {
            std::vector<int> clause{-y};
            clause.insert(clause.end(), binary_x.begin(), binary_x.end());
            b.add_clause(clause);
        }
        y_all = y1s;
        y_all.insert(y_all.end(), y2s.begin(), y2s.end());
        for (std::size_t p = 0; p < y_all.size(); ++p)
            for (std::size_t q = p + 1; q < y_all.size(); ++q)
                b.add_clause({-y_all[p], -y_all[q]});
    }

    // Every used node except the root has exactly one parent; unused nodes
    // have none (which also forbids wiring into the unused suffix).
    for (int j = 1; j < k; ++j) {
        std::vector<int> parents;
        for (int i = 0; i < j; ++i) {
            if (inst.y1[i][j])
                parents.push_back(inst.y1[i][j]);
            if (inst.y2[i][j])
                parents.push_back(inst.y2[i][j]);
        }
        for (int i = 0; i < j - 1; ++i)
            if (inst.y2[i][j - 1])
                parents.push_back(inst.y2[i][j - 1]);
        std::vector<int> some{inst.x[j][inst.unused_label]};
        some.insert(some.end(), parents.begin(), parents.end());
        b.add_clause(some);
        for (int p : parents)
            b.add_clause({-p, -inst.x[j][inst.unused_label]});
        for (std::size_t p = 0; p < parents.size(); ++p)
            for (std::size_t q = p + 1; q < parents.size(); ++q)
                b.add_clause({-parents[p], -parents[q]});
    }

    // (b) semantics, bidirectional so that z(i,a) <=> a in C_i.
    for (int i = 0; i < k; ++i) {
        for (int l = 0; l < num_labels; ++l) {
            const NodeLabel& lab = labels[l];
            const int xl = inst.x[i][l];
            switch (lab.kind) {
                case NodeLabel::Kind::Top:
                    for (int a = 0; a < n; ++a)
                        b.add_clause({-xl, inst.z[i][a]});
                    break;
                case NodeLabel::Kind::Bot:
                    for (int a = 0; a < n; ++a)
                        b.add_clause({-xl, -inst.z[i][a]});
                    break;
                case NodeLabel::Kind::Name:
                    for (int a = 0; a < n; ++a)
                        b.add_clause({-xl, db.has_concept_fact(lab.name, a) ? inst.z[i][a]
                                                                            : -inst.z[i][a]});
                    break;
                case NodeLabel::Kind::Not:
                    for (int j = i + 1; j < k; ++j) {
                        int y = inst.y1[i][j];
                        for (int a = 0; a < n; ++a) {
                            b.add_clause({-xl, -y, -inst.z[i][a], -inst.z[j][a]});
                            b.add_clause({-xl, -y, inst.z[i][a], inst.z[j][a]});
                        }
                    }
                    break;
                case NodeLabel::Kind::And:
                case NodeLabel::Kind::Or: {
                    bool is_and = lab.kind == NodeLabel::Kind::And;
                    for (int j = i + 1; j + 1 < k; ++j) {
                        int y = inst.y2[i][j];
                        for (int a = 0; a < n; ++a) {
                            int zi = inst.z[i][a], zl = inst.z[j][a], zr = inst.z[j + 1][a];
                            if (is_and) {
                                b.add_clause({-xl, -y, -zi, zl});
                                b.add_clause({-xl, -y, -zi, zr});
                                b.add_clause({-xl, -y, zi, -zl, -zr});
                            } else {
                                b.add_clause({-xl, -y, zi, -zl});
                                b.add_clause({-xl, -y, zi, -zr});
                                b.add_clause({-xl, -y, -zi, zl, zr});
                            }
                        }
                    }
                    break;
                }
                case NodeLabel::Kind::Exists:
                case NodeLabel::Kind::Forall: {
                    bool is_exists = lab.kind == NodeLabel::Kind::Exists;
                    RoleRef role{lab.name, false};
                    for (int j = i + 1; j < k; ++j) {
                        int y = inst.y1[i][j];
                        for (int a = 0; a < n; ++a) {
                            const auto& succ = db.successors(a, role);
                            int zi = inst.z[i][a];
                            if (is_exists) {
                                std::vector<int> fwd{-xl, -y, -zi};
                                for (int bb : succ)
                                    fwd.push_back(inst.z[j][bb]);
                                b.add_clause(fwd);
                                for (int bb : succ)
                                    b.add_clause({-xl, -y, -inst.z[j][bb], zi});
                            } else {
                                for (int bb : succ)
                                    b.add_clause({-xl, -y, -zi, inst.z[j][bb]});
                                std::vector<int> bwd{-xl, -y, zi};
                                for (int bb : succ)
                                    bwd.push_back(-inst.z[j][bb]);
                                b.add_clause(bwd);
                            }
                        }
                    }
                    break;
                }
                default:
                    break;  // AtLeast/AtMost below, Unused has no semantics
            }
        }
    }

    // (c) number restrictions via shared sequential counters. The chain for
    // (j, r, a) counts the satisfied successors of a at child node j and is
    // shared by every parent node and bound.
    if (opt.counting) {
        std::size_t before = b.num_clauses();
        std::map<std::tuple<int, std::string, int>, std::unique_ptr<CardinalityChain>> chains;
        auto chain_for = [&](int j, const std::string& r, int a) -> CardinalityChain& {
            auto key = std::make_tuple(j, r, a);
            auto it = chains.find(key);
            if (it == chains.end()) {
                std::vector<int> lits;
                for (int bb : db.successors(a, RoleRef{r, false}))
                    lits.push_back(inst.z[j][bb]);
                int cap = std::min(opt.g_bound + 1, (int)lits.size());
                it = chains
                         .emplace(key, std::make_unique<CardinalityChain>(
                                           b, std::move(lits), cap,
                                           "cnt_" + std::to_string(j + 1) + "_" + r + "_" +
                                               db.individual_name(a)))
                         .first;
            }
            return *it->second;
        };
        for (int i = 0; i < k; ++i) {
            for (int l = 0; l < num_labels; ++l) {
                const NodeLabel& lab = labels[l];
                if (lab.kind != NodeLabel::Kind::AtLeast && lab.kind != NodeLabel::Kind::AtMost)
                    continue;
                const int xl = inst.x[i][l];
                for (int j = i + 1; j < k; ++j) {
                    int y = inst.y1[i][j];
                    for (int a = 0; a < n; ++a) {
                        CardinalityChain& chain = chain_for(j, lab.name, a);
                        int sat = lab.kind == NodeLabel::Kind::AtLeast
                                      ? chain.at_least(lab.number)
                                      : chain.at_most(lab.number);
                        b.add_clause({-xl, -y, -inst.z[i][a], sat});
                        b.add_clause({-xl, -y, inst.z[i][a], -sat});
                    }
                }
            }
        }
        inst.counting_clauses = b.num_clauses() - before;
    }

    // (d) fitting constraints at the root.
    if (opt.add_fitting_units) {
        for (int a : inst.positives)
            b.add_clause({inst.z[0][a]});
        for (int a : inst.negatives)
            b.add_clause({-inst.z[0][a]});
    }
    if (opt.add_indicators) {
        for (int a : inst.positives) {
            int e = b.new_var("ind_pos_" + db.individual_name(a));
            b.add_clause({-e, inst.z[0][a]});
            b.add_clause({e, -inst.z[0][a]});
            inst.indicators.push_back(e);
        }
        for (int a : inst.negatives) {
            int e = b.new_var("ind_neg_" + db.individual_name(a));
            b.add_clause({-e, -inst.z[0][a]});
            b.add_clause({e, inst.z[0][a]});
            inst.indicators.push_back(e);
        }
        CardinalityChain chain(b, inst.indicators, (int)inst.indicators.size(), "ind_count");
        for (int t = 1; t <= (int)inst.indicators.size(); ++t)
            inst.count_geq.push_back(chain.at_least(t));
    }

    if (b.num_clauses() > opt.clause_ceiling)
        throw std::length_error("encoded instance exceeds the clause ceiling");
    return inst;
}

// Copy of the instance's CNF restricted to the given tree shapes: a selector
// per shape, at least one selector true, and each selector pins the wiring
// and the unused suffix. Shapes must have at most k nodes. The copy leaves
// the shared instance untouched, so buckets can be built concurrently.
inline Cnf with_topologies(const CnfInstance& inst, const std::vector<Topology>& shapes) {
    if (shapes.empty())
        throw std::invalid_argument("topology bucket must be nonempty");
    Cnf cnf = inst.cnf();
    std::vector<int> selectors;
    for (const auto& t : shapes) {
        int m = t.num_nodes();
        if (m > inst.k)
            throw std::invalid_argument("topology larger than the stage size");
        int s = ++cnf.num_vars;
        selectors.push_back(s);
        for (int i = 0; i < m; ++i) {
            cnf.clauses.push_back({-s, -inst.x[i][inst.unused_label]});
            if (t.arity[i] == 1)
                cnf.clauses.push_back({-s, inst.y1[i][t.child[i]]});
            else if (t.arity[i] == 2)
                cnf.clauses.push_back({-s, inst.y2[i][t.child[i]]});
        }
        if (m < inst.k)
            cnf.clauses.push_back({-s, inst.x[m][inst.unused_label]});
    }
    cnf.clauses.push_back(selectors);
    return cnf;
}

// Reads the syntax tree out of a model and rebuilds the concept. The result
// is verified against the fitting constraints when they were part of the
// encoding; a mismatch is an encoder bug.
inline Concept decode(const std::vector<bool>& model, const CnfInstance& inst,
                      bool verify_fit = true) {
    auto is_true = [&](int var) { return var > 0 && model[var - 1]; };
    auto label_of = [&](int i) {
        for (int l = 0; l < (int)inst.labels.size(); ++l)
            if (is_true(inst.x[i][l]))
                return l;
        throw std::logic_error("internal encoder error: node without label");
    };
    auto rec = [&](auto&& self, int i) -> Concept {
        const NodeLabel& lab = inst.labels[label_of(i)];
        auto unary_child = [&] {
            for (int j = i + 1; j < inst.k; ++j)
                if (is_true(inst.y1[i][j]))
                    return j;
            throw std::logic_error("internal encoder error: unary node without child");
        };
        auto binary_child = [&] {
            for (int j = i + 1; j + 1 < inst.k; ++j)
                if (is_true(inst.y2[i][j]))
                    return j;
            throw std::logic_error("internal encoder error: binary node without children");
        };
        switch (lab.kind) {
            case NodeLabel::Kind::Top: return top();
            case NodeLabel::Kind::Bot: return bot();
            case NodeLabel::Kind::Name: return concept_name(lab.name);
            case NodeLabel::Kind::Not: return negation(self(self, unary_child()));
            case NodeLabel::Kind::And: {
                int j = binary_child();
                return conjunction(self(self, j), self(self, j + 1));
            }
            case NodeLabel::Kind::Or: {
                int j = binary_child();
                return disjunction(self(self, j), self(self, j + 1));
            }
            case NodeLabel::Kind::Exists:
                return exists(RoleRef{lab.name, false}, self(self, unary_child()));
            case NodeLabel::Kind::Forall:
                return forall(RoleRef{lab.name, false}, self(self, unary_child()));
            case NodeLabel::Kind::AtLeast:
                return at_least((unsigned)lab.number, RoleRef{lab.name, false},
                                self(self, unary_child()));
            case NodeLabel::Kind::AtMost:
                return at_most((unsigned)lab.number, RoleRef{lab.name, false},
                               self(self, unary_child()));
            case NodeLabel::Kind::Unused:
                throw std::logic_error("internal encoder error: reached an unused node");
        }
        throw std::logic_error("internal encoder error: bad label");
    };
    Concept c = rec(rec, 0);
    if (verify_fit) {
        std::vector<bool> ext = eval_concept(c, *inst.db);
        for (int a : inst.positives)
            if (!ext[a])
                throw std::logic_error("internal encoder error: decoded concept misses positive");
        for (int a : inst.negatives)
            if (ext[a])
                throw std::logic_error("internal encoder error: decoded concept hits negative");
    }
    return c;
}

}  // namespace dlfit
