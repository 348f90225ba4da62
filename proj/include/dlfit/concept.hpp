#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "database.hpp"
#include "decimal.hpp"

namespace dlfit {

enum class ConceptKind {
    Top,
    Bot,
    Name,
    Not,
    And,
    Or,
    AtLeast,
    AtMost,
    FeatureGeq,
    FeatureLeq,
};

class ConceptNode;
using Concept = std::shared_ptr<const ConceptNode>;

// Immutable syntax DAG node. Nodes are hash-consed on construction, so
// structurally equal concepts are pointer-equal and shared subtrees keep
// separating-concept outputs polynomial even when the tree expansion is not.
class ConceptNode : public std::enable_shared_from_this<ConceptNode> {
public:
    ConceptKind kind;
    std::string name;   // concept name or feature name
    RoleRef role;       // AtLeast / AtMost
    unsigned number = 0;
    Decimal value;      // feature comparisons
    Concept left;       // only child of unary nodes
    Concept right;
    std::size_t hash = 0;

    struct Key {
        ConceptKind kind;
        const std::string* name;
        const RoleRef* role;
        unsigned number;
        const Decimal* value;
        const ConceptNode* left;
        const ConceptNode* right;
    };

    bool matches(const Key& k) const {
        return kind == k.kind && name == *k.name && role == *k.role && number == k.number &&
               value == *k.value && left.get() == k.left && right.get() == k.right;
    }

private:
    ConceptNode() = default;
    friend Concept make_node(ConceptKind, std::string, RoleRef, unsigned, Decimal, Concept,
                             Concept);
};

inline std::size_t concept_key_hash(const ConceptNode::Key& k) {
    std::size_t h = (std::size_t)k.kind;
    auto mix = [&h](std::size_t v) { h = h * 1000003u ^ v; };
    mix(std::hash<std::string>()(*k.name));
    mix(std::hash<std::string>()(k.role->name));
    mix(k.role->inverse ? 7u : 3u);
    mix(k.number);
    mix(k.value->hash());
    mix(std::hash<const void*>()(k.left));
    mix(std::hash<const void*>()(k.right));
    return h;
}

namespace detail {

struct ConsTable {
    std::mutex mutex;
    std::unordered_multimap<std::size_t, std::weak_ptr<const ConceptNode>> table;

    static ConsTable& instance() {
        static ConsTable t;
        return t;
    }
};

}  // namespace detail

inline Concept make_node(ConceptKind kind, std::string name, RoleRef role, unsigned number,
                         Decimal value, Concept left, Concept right) {
    ConceptNode::Key key{kind, &name, &role, number, &value, left.get(), right.get()};
    std::size_t h = concept_key_hash(key);
    auto& cons = detail::ConsTable::instance();
    std::lock_guard<std::mutex> lock(cons.mutex);
    auto [lo, hi] = cons.table.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
        if (Concept existing = it->second.lock(); existing && existing->matches(key))
            return existing;
    }
    auto node = std::shared_ptr<ConceptNode>(new ConceptNode());
    node->kind = kind;
    node->name = std::move(name);
    node->role = std::move(role);
    node->number = number;
    node->value = value;
    node->left = std::move(left);
    node->right = std::move(right);
    node->hash = h;
    cons.table.emplace(h, node);
    return node;
}

inline Concept top() { return make_node(ConceptKind::Top, {}, {}, 0, {}, nullptr, nullptr); }
inline Concept bot() { return make_node(ConceptKind::Bot, {}, {}, 0, {}, nullptr, nullptr); }

inline Concept concept_name(std::string name) {
    return make_node(ConceptKind::Name, std::move(name), {}, 0, {}, nullptr, nullptr);
}

inline Concept negation(Concept c) {
    return make_node(ConceptKind::Not, {}, {}, 0, {}, std::move(c), nullptr);
}

inline Concept conjunction(Concept l, Concept r) {
    return make_node(ConceptKind::And, {}, {}, 0, {}, std::move(l), std::move(r));
}

inline Concept disjunction(Concept l, Concept r) {
    return make_node(ConceptKind::Or, {}, {}, 0, {}, std::move(l), std::move(r));
}

inline Concept at_least(unsigned n, RoleRef role, Concept c) {
    if (n < 1)
        throw std::invalid_argument("at_least requires n >= 1");
    return make_node(ConceptKind::AtLeast, {}, std::move(role), n, {}, std::move(c), nullptr);
}

inline Concept at_most(unsigned n, RoleRef role, Concept c) {
    return make_node(ConceptKind::AtMost, {}, std::move(role), n, {}, std::move(c), nullptr);
}

inline Concept feature_geq(std::string feature, Decimal v) {
    return make_node(ConceptKind::FeatureGeq, std::move(feature), {}, 0, v, nullptr, nullptr);
}

inline Concept feature_leq(std::string feature, Decimal v) {
    return make_node(ConceptKind::FeatureLeq, std::move(feature), {}, 0, v, nullptr, nullptr);
}

// Printed sugar: exists R.C = (>= 1 R.C), forall R.C = (<= 0 R.not C).
inline Concept exists(RoleRef role, Concept c) { return at_least(1, std::move(role), std::move(c)); }

inline Concept forall(RoleRef role, Concept c) {
    return at_most(0, std::move(role), negation(std::move(c)));
}

inline constexpr std::uint64_t kSizeCap = UINT64_C(1) << 62;

namespace detail {

inline std::uint64_t add_sat(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    return s >= kSizeCap ? kSizeCap : s;
}

inline std::uint64_t tree_size(const Concept& c, bool with_numbers, bool strict,
                               std::unordered_map<const ConceptNode*, std::uint64_t>& memo) {
    auto it = memo.find(c.get());
    if (it != memo.end())
        return it->second;
    std::uint64_t n = 1;
    // The forall sugar (<= 0 R.not C) is a single constructor; its helper
    // negation carries no size.
    bool forall_sugar = c->kind == ConceptKind::AtMost && c->number == 0 && c->left &&
                        c->left->kind == ConceptKind::Not;
    if (forall_sugar) {
        n = add_sat(n, tree_size(c->left->left, with_numbers, strict, memo));
    } else {
        if (c->left)
            n = add_sat(n, tree_size(c->left, with_numbers, strict, memo));
        if (c->right)
            n = add_sat(n, tree_size(c->right, with_numbers, strict, memo));
    }
    if (with_numbers && (c->kind == ConceptKind::AtLeast || c->kind == ConceptKind::AtMost)) {
        // Unary coding of the restriction number; in non-strict mode the
        // sugar forms (>= 1 R) and (<= 0 R) carry no number.
        bool sugar = (c->kind == ConceptKind::AtLeast && c->number == 1) ||
                     (c->kind == ConceptKind::AtMost && c->number == 0);
        if (strict || !sugar)
            n = add_sat(n, c->number);
    }
    memo[c.get()] = n;
    return n;
}

}  // namespace detail

// Number of nodes of the syntax tree, DAG sharing expanded (saturating).
inline std::uint64_t node_count(const Concept& c) {
    std::unordered_map<const ConceptNode*, std::uint64_t> memo;
    return detail::tree_size(c, false, false, memo);
}

// node_count plus unary-coded numbers in number restrictions. With
// strict=false (the default) the exists/forall sugar contributes no number.
inline std::uint64_t string_size(const Concept& c, bool strict = false) {
    std::unordered_map<const ConceptNode*, std::uint64_t> memo;
    return detail::tree_size(c, true, strict, memo);
}

struct RenderBudgetExceeded : std::runtime_error {
    RenderBudgetExceeded() : std::runtime_error("concept tree expansion exceeds node budget") {}
};

namespace detail {

inline std::string render_role(const RoleRef& r) {
    return r.inverse ? "inv(" + r.name + ")" : r.name;
}

inline void render_rec(const Concept& c, std::ostream& out, std::uint64_t& budget) {
    if (budget == 0)
        throw RenderBudgetExceeded();
    --budget;
    switch (c->kind) {
        case ConceptKind::Top: out << "top"; return;
        case ConceptKind::Bot: out << "bot"; return;
        case ConceptKind::Name: out << c->name; return;
        case ConceptKind::Not:
            out << "not ";
            render_rec(c->left, out, budget);
            return;
        case ConceptKind::And:
        case ConceptKind::Or:
            out << "(";
            render_rec(c->left, out, budget);
            out << (c->kind == ConceptKind::And ? " and " : " or ");
            render_rec(c->right, out, budget);
            out << ")";
            return;
        case ConceptKind::AtLeast:
            if (c->number == 1) {
                out << "(exists " << render_role(c->role) << " . ";
                render_rec(c->left, out, budget);
                out << ")";
            } else {
                out << "(atleast " << c->number << " " << render_role(c->role) << " . ";
                render_rec(c->left, out, budget);
                out << ")";
            }
            return;
        case ConceptKind::AtMost:
            if (c->number == 0 && c->left->kind == ConceptKind::Not) {
                out << "(forall " << render_role(c->role) << " . ";
                render_rec(c->left->left, out, budget);
                out << ")";
            } else {
                out << "(atmost " << c->number << " " << render_role(c->role) << " . ";
                render_rec(c->left, out, budget);
                out << ")";
            }
            return;
        case ConceptKind::FeatureGeq:
            out << "(" << c->name << " >= " << c->value.str() << ")";
            return;
        case ConceptKind::FeatureLeq:
            out << "(" << c->name << " <= " << c->value.str() << ")";
            return;
    }
}

}  // namespace detail

// Renders to the concrete grammar. The expansion of a shared DAG can be
// exponential, hence the node budget.
inline std::string render_concept(const Concept& c, std::uint64_t node_budget = 1000000) {
    std::ostringstream out;
    detail::render_rec(c, out, node_budget);
    return out.str();
}

}  // namespace dlfit
