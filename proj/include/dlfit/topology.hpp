#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dlfit {

// Shape of an ordered syntax tree in the canonical node ordering: nodes are
// numbered in breadth-first order, binary children are consecutive, and every
// child index exceeds its parent's. Under these conventions the wiring is
// uniquely determined by the arity sequence.
struct Topology {
    std::vector<int> arity;        // 0, 1 or 2 per node
    std::vector<int> child;        // first (or only) child, -1 for leaves

    int num_nodes() const { return (int)arity.size(); }
};

namespace detail {

// Deterministic wiring: each node's children are the smallest unwired
// indices. Valid whenever the arity sequence satisfies the ballot property.
inline Topology wire(std::vector<int> arity) {
    Topology t;
    t.arity = std::move(arity);
    t.child.assign(t.arity.size(), -1);
    int next = 1;
    for (int i = 0; i < (int)t.arity.size(); ++i) {
        if (t.arity[i] == 0)
            continue;
        t.child[i] = next;
        next += t.arity[i];
    }
    return t;
}

inline void enumerate_exact(int m, std::vector<int>& arity, int assigned,
                            std::vector<Topology>& out) {
    int i = (int)arity.size();
    if (i == m) {
        if (assigned == m - 1)
            out.push_back(wire(arity));
        return;
    }
    // Prefix feasibility: nodes 2..i+1 need parents among the first i nodes,
    // and the total child count must still be reachable.
    for (int a = 0; a <= 2; ++a) {
        int total = assigned + a;
        if (total > m - 1)
            break;
        if (i + 1 < m && total < i + 1)  // ballot property at prefix length i+1
            continue;
        if (total + 2 * (m - 1 - i) < m - 1)
            continue;
        arity.push_back(a);
        enumerate_exact(m, arity, total, out);
        arity.pop_back();
    }
}

}  // namespace detail

// All tree shapes with exactly m nodes, in lexicographic arity-sequence order.
inline std::vector<Topology> enumerate_topologies_exact(int m) {
    if (m < 1)
        throw std::invalid_argument("topology size must be >= 1");
    std::vector<Topology> out;
    std::vector<int> arity;
    detail::enumerate_exact(m, arity, 0, out);
    return out;
}

// All tree shapes with at most k nodes, smaller sizes first.
inline std::vector<Topology> enumerate_topologies(int k) {
    std::vector<Topology> out;
    for (int m = 1; m <= k; ++m) {
        auto exact = enumerate_topologies_exact(m);
        out.insert(out.end(), exact.begin(), exact.end());
    }
    return out;
}

// Number of shapes with exactly m nodes: one node is either a leaf, a unary
// node over a smaller tree, or a binary node over an ordered pair of trees.
inline std::uint64_t count_topologies_exact(int m) {
    std::vector<std::uint64_t> t(m + 1, 0);
    if (m >= 1)
        t[1] = 1;
    for (int s = 2; s <= m; ++s) {
        t[s] = t[s - 1];
        for (int left = 1; left <= s - 2; ++left)
            t[s] += t[left] * t[s - 1 - left];
    }
    return m >= 1 ? t[m] : 0;
}

}  // namespace dlfit
