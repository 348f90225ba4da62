#pragma once

#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlfit {

// Literals use the DIMACS convention: +v / -v with v >= 1.
struct Cnf {
    int num_vars = 0;
    std::vector<std::vector<int>> clauses;
};

// Allocates variables with debug names and collects clauses. Variable 1..n
// names are kept for the DIMACS sidecar; they carry no semantics.
class CnfBuilder {
public:
    int new_var(std::string name) {
        names_.push_back(std::move(name));
        return ++cnf_.num_vars;
    }

    // Constant-true literal, allocated (with its unit clause) on first use.
    int true_lit() {
        if (true_var_ == 0) {
            true_var_ = new_var("const_true");
            add_clause({true_var_});
        }
        return true_var_;
    }

    int false_lit() { return -true_lit(); }

    void add_clause(std::vector<int> lits) {
        for (int l : lits)
            if (l == 0 || std::abs(l) > cnf_.num_vars)
                throw std::logic_error("clause references unallocated variable");
        cnf_.clauses.push_back(std::move(lits));
    }

    int num_vars() const { return cnf_.num_vars; }
    std::size_t num_clauses() const { return cnf_.clauses.size(); }
    const std::vector<std::string>& names() const { return names_; }  // names_[v-1]
    const Cnf& cnf() const { return cnf_; }
    Cnf take() { return std::move(cnf_); }

private:
    Cnf cnf_;
    std::vector<std::string> names_;
    int true_var_ = 0;
};

// Sequential counter over a literal list: partial-sum variables s(p, c) with
// s(p, c) <=> at least c of the first p literals are true, defined
// bidirectionally up to a capacity. Counts above the capacity are not
// tracked, so callers must size it to the largest bound they will query.
class CardinalityChain {
public:
    CardinalityChain(CnfBuilder& builder, std::vector<int> literals, int capacity,
                     const std::string& tag)
        : builder_(builder), lits_(std::move(literals)), cap_(capacity) {
        const int n = (int)lits_.size();
        if (cap_ > n)
            cap_ = n;
        sums_.assign((std::size_t)n * (std::size_t)cap_, 0);
        for (int p = 1; p <= n; ++p)
            for (int c = 1; c <= std::min(p, cap_); ++c)
                sums_[idx(p, c)] = builder_.new_var(tag + "_s" + std::to_string(p) + "_" +
                                                    std::to_string(c));
        for (int p = 1; p <= n; ++p) {
            const int lp = lits_[p - 1];
            for (int c = 1; c <= std::min(p, cap_); ++c) {
                int s = sums_[idx(p, c)];
                int prev_same = p - 1 >= c ? sums_[idx(p - 1, c)] : 0;
                int prev_less = c >= 2 ? sums_[idx(p - 1, c - 1)] : 0;
                // s(p,c) <=> s(p-1,c) or (s(p-1,c-1) and l_p), with
                // s(0,*) = false and s(*,0) = true.
                if (prev_same)
                    builder_.add_clause({-prev_same, s});
                if (c == 1)
                    builder_.add_clause({-lp, s});
                else if (prev_less)
                    builder_.add_clause({-prev_less, -lp, s});
                std::vector<int> back{-s, lp};
                if (prev_same)
                    back.insert(back.begin() + 1, prev_same);
                builder_.add_clause(back);
                if (c >= 2) {
                    std::vector<int> back2{-s};
                    if (prev_same)
                        back2.push_back(prev_same);
                    if (prev_less)
                        back2.push_back(prev_less);
                    builder_.add_clause(back2);
                }
            }
        }
    }

    // Literal equivalent to (count of true literals >= c).
    int at_least(int c) const {
        if (c <= 0)
            return builder_.true_lit();
        if (c > (int)lits_.size())
            return builder_.false_lit();
        if (c > cap_)
            throw std::logic_error("cardinality bound exceeds chain capacity");
        return sums_[idx((int)lits_.size(), c)];
    }

    // Literal equivalent to (count of true literals <= c).
    int at_most(int c) const { return -at_least(c + 1); }

    int capacity() const { return cap_; }

private:
    std::size_t idx(int p, int c) const {
        return (std::size_t)(p - 1) * (std::size_t)cap_ + (std::size_t)(c - 1);
    }

    CnfBuilder& builder_;
    std::vector<int> lits_;
    int cap_;
    std::vector<int> sums_;
};

enum class CountPolarity { AtLeast, AtMost };

// One-shot cardinality constraint: forces (count >= bound) or (count <= bound)
// on the literal list, guarded by an activation literal when guard != 0 (the
// constraint applies only under guard true).
inline void add_cardinality(CnfBuilder& builder, const std::vector<int>& literals, int bound,
                            CountPolarity polarity, int guard = 0) {
    if (bound < 0)
        throw std::invalid_argument("cardinality bound must be >= 0");
    const int n = (int)literals.size();
    auto emit = [&](int lit) {
        if (guard != 0)
            builder.add_clause({-guard, lit});
        else
            builder.add_clause({lit});
    };
    if (polarity == CountPolarity::AtLeast) {
        if (bound == 0)
            return;  // vacuous
        if (bound > n) {
            emit(builder.false_lit());
            return;
        }
        CardinalityChain chain(builder, literals, bound, "card");
        emit(chain.at_least(bound));
    } else {
        if (bound >= n)
            return;  // vacuous
        CardinalityChain chain(builder, literals, bound + 1, "card");
        emit(chain.at_most(bound));
    }
}

inline std::string to_dimacs(const Cnf& cnf) {
    std::ostringstream out;
    out << "p cnf " << cnf.num_vars << " " << cnf.clauses.size() << "\n";
    for (const auto& clause : cnf.clauses) {
        for (int l : clause)
            out << l << " ";
        out << "0\n";
    }
    return out.str();
}

}  // namespace dlfit
