#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnf.hpp"

namespace dlfit {

enum class SolveStatus { Sat, Unsat, Timeout };

struct SolveStats {
    std::uint64_t conflicts = 0;
    std::uint64_t decisions = 0;
    std::uint64_t propagations = 0;
    double wall_seconds = 0.0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Timeout;
    std::vector<bool> model;  // model[v-1], present iff SAT
    SolveStats stats;
};

struct SolveBudget {
    double timeout_seconds = 0.0;          // 0 = unlimited
    std::atomic<bool>* stop = nullptr;     // cooperative cancellation
};

// Checks a full assignment against every clause; mandatory before any SAT
// verdict leaves the backend.
inline bool verify_model(const Cnf& cnf, const std::vector<bool>& model) {
    if ((int)model.size() != cnf.num_vars)
        return false;
    for (const auto& clause : cnf.clauses) {
        bool sat = false;
        for (int l : clause) {
            int v = std::abs(l);
            if (model[v - 1] == (l > 0)) {
                sat = true;
                break;
            }
        }
        if (!sat)
            return false;
    }
    return true;
}

// Conflict-driven clause learning with two-watched literals, first-UIP
// learning, VSIDS decision order, phase saving and Luby restarts. One
// instance per solve call; no state is shared.
class CdclSolver {
public:
    explicit CdclSolver(const Cnf& cnf) : num_vars_(cnf.num_vars) {
        value_.assign(num_vars_ + 1, 0);
        level_.assign(num_vars_ + 1, 0);
        reason_.assign(num_vars_ + 1, -1);
        activity_.assign(num_vars_ + 1, 0.0);
        saved_phase_.assign(num_vars_ + 1, false);
        seen_.assign(num_vars_ + 1, 0);
        heap_pos_.assign(num_vars_ + 1, -1);
        watches_.assign(2 * (num_vars_ + 1), {});
        for (int v = 1; v <= num_vars_; ++v)
            heap_insert(v);
        for (const auto& clause : cnf.clauses) {
            std::vector<int> lits = clause;
            std::sort(lits.begin(), lits.end(),
                      [](int a, int b) { return std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b); });
            lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
            bool tautology = false;
            for (std::size_t i = 0; i + 1 < lits.size(); ++i)
                if (lits[i] == -lits[i + 1])
                    tautology = true;
            if (tautology)
                continue;
            if (lits.empty()) {
                contradiction_ = true;
                continue;
            }
            if (lits.size() == 1) {
                units_.push_back(lits[0]);
                continue;
            }
            attach(std::move(lits));
        }
    }

    SolveResult solve(const SolveBudget& budget) {
        auto start = std::chrono::steady_clock::now();
        SolveResult out;
        auto finish = [&](SolveStatus status) {
            out.status = status;
            out.stats = stats_;
            out.stats.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return out;
        };
        if (contradiction_)
            return finish(SolveStatus::Unsat);
        for (int u : units_) {
            if (value_of(u) < 0)
                return finish(SolveStatus::Unsat);
            if (value_of(u) == 0)
                enqueue(u, -1);
        }
        if (propagate() >= 0)
            return finish(SolveStatus::Unsat);

        std::uint64_t restart_round = 0;
        std::uint64_t conflict_limit = kRestartBase * luby(++restart_round);
        std::uint64_t conflicts_this_round = 0;
        while (true) {
            int confl = propagate();
            if (confl >= 0) {
                ++stats_.conflicts;
                ++conflicts_this_round;
                if (decision_level() == 0)
                    return finish(SolveStatus::Unsat);
                std::vector<int> learnt;
                int back_level = analyze(confl, learnt);
                backtrack(back_level);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], -1);
                } else {
                    int id = attach(std::move(learnt));
                    enqueue(clauses_[id].lits[0], id);
                }
                decay_activities();
                if ((stats_.conflicts & 1023) == 0 && out_of_budget(budget, start))
                    return finish(SolveStatus::Timeout);
            } else {
                if (conflicts_this_round >= conflict_limit) {
                    conflicts_this_round = 0;
                    conflict_limit = kRestartBase * luby(++restart_round);
                    backtrack(0);
                    continue;
                }
                int next = pick_branch_var();
                if (next == 0) {
                    out.model.assign(num_vars_, false);
                    for (int v = 1; v <= num_vars_; ++v)
                        out.model[v - 1] = value_[v] > 0;
                    // A model failing verification is a solver bug, never a
                    // recoverable condition.
                    Cnf check;
                    check.num_vars = num_vars_;
                    for (const auto& c : clauses_)
                        if (!c.learned)
                            check.clauses.push_back(c.lits);
                    for (int u : units_)
                        check.clauses.push_back({u});
                    if (!verify_model(check, out.model))
                        throw std::logic_error("internal solver error: model fails verification");
                    return finish(SolveStatus::Sat);
                }
                ++stats_.decisions;
                trail_lim_.push_back((int)trail_.size());
                enqueue(saved_phase_[next] ? next : -next, -1);
                if ((stats_.decisions & 1023) == 0 && out_of_budget(budget, start))
                    return finish(SolveStatus::Timeout);
            }
        }
    }

private:
    static constexpr std::uint64_t kRestartBase = 128;

    struct Clause {
        std::vector<int> lits;
        bool learned = false;
    };

    static std::uint64_t luby(std::uint64_t i) {
        // Luby sequence: 1 1 2 1 1 2 4 ...
        for (std::uint64_t k = 1; (1ull << k) <= i + 1; ++k)
            if (i + 1 == (1ull << k))
                return 1ull << (k - 1);
        std::uint64_t k = 1;
        while ((1ull << k) <= i + 1)
            ++k;
        return luby(i - ((1ull << (k - 1)) - 1));
    }

    int watch_index(int lit) const { return 2 * std::abs(lit) + (lit < 0 ? 1 : 0); }

    int value_of(int lit) const {
        int v = value_[std::abs(lit)];
        return lit > 0 ? v : -v;
    }

    int decision_level() const { return (int)trail_lim_.size(); }

    int attach(std::vector<int> lits) {
        int id = (int)clauses_.size();
        clauses_.push_back({std::move(lits), id >= first_learned_ || learning_});
        auto& c = clauses_[id].lits;
        watches_[watch_index(c[0])].push_back(id);
        watches_[watch_index(c[1])].push_back(id);
        return id;
    }

    void enqueue(int lit, int reason) {
        int v = std::abs(lit);
        value_[v] = lit > 0 ? 1 : -1;
        level_[v] = decision_level();
        reason_[v] = reason;
        saved_phase_[v] = lit > 0;
        trail_.push_back(lit);
    }

    // Returns the conflicting clause id, or -1.
    int propagate() {
        while (qhead_ < trail_.size()) {
            int lit = trail_[qhead_++];
            ++stats_.propagations;
            auto& wl = watches_[watch_index(-lit)];
            std::size_t keep = 0;
            for (std::size_t i = 0; i < wl.size(); ++i) {
                int id = wl[i];
                auto& c = clauses_[id].lits;
                if (c[0] == -lit)
                    std::swap(c[0], c[1]);
                if (value_of(c[0]) > 0) {
                    wl[keep++] = id;
                    continue;
                }
                bool moved = false;
                for (std::size_t j = 2; j < c.size(); ++j) {
                    if (value_of(c[j]) >= 0) {
                        std::swap(c[1], c[j]);
                        watches_[watch_index(c[1])].push_back(id);
                        moved = true;
                        break;
                    }
                }
                if (moved)
                    continue;
                wl[keep++] = id;
                if (value_of(c[0]) < 0) {
                    for (std::size_t j = i + 1; j < wl.size(); ++j)
                        wl[keep++] = wl[j];
                    wl.resize(keep);
                    qhead_ = trail_.size();
                    return id;
                }
                enqueue(c[0], id);
            }
            wl.resize(keep);
        }
        return -1;
    }

    // First-UIP conflict analysis; learnt[0] is the asserting literal.
    int analyze(int confl, std::vector<int>& learnt) {
        learnt.push_back(0);  // placeholder for the asserting literal
        int counter = 0;
        int lit = 0;
        std::size_t index = trail_.size();
        int current = decision_level();
        std::vector<int> to_clear;
        do {
            const auto& c = clauses_[confl].lits;
            for (std::size_t j = (lit == 0 ? 0 : 1); j < c.size(); ++j) {
                int q = c[j];
                int v = std::abs(q);
                if (seen_[v] || level_[v] == 0)
                    continue;
                seen_[v] = 1;
                to_clear.push_back(v);
                bump_activity(v);
                if (level_[v] == current)
                    ++counter;
                else
                    learnt.push_back(q);
            }
            do {
                lit = trail_[--index];
            } while (!seen_[std::abs(lit)]);
            seen_[std::abs(lit)] = 0;
            confl = reason_[std::abs(lit)];
            --counter;
        } while (counter > 0);
        learnt[0] = -lit;
        seen_[std::abs(lit)] = 0;
        for (int v : to_clear)
            seen_[v] = 0;
        // Backtrack to the second-highest level in the learnt clause, placing
        // that literal in watch position 1.
        int back = 0;
        std::size_t pos = 1;
        for (std::size_t j = 1; j < learnt.size(); ++j) {
            int lvl = level_[std::abs(learnt[j])];
            if (lvl > back) {
                back = lvl;
                pos = j;
            }
        }
        if (learnt.size() > 1)
            std::swap(learnt[1], learnt[pos]);
        learning_ = true;
        return back;
    }

    void backtrack(int target_level) {
        while (decision_level() > target_level) {
            int mark = trail_lim_.back();
            trail_lim_.pop_back();
            while ((int)trail_.size() > mark) {
                int v = std::abs(trail_.back());
                trail_.pop_back();
                value_[v] = 0;
                reason_[v] = -1;
                if (heap_pos_[v] < 0)
                    heap_insert(v);
            }
        }
        qhead_ = trail_.size();
    }

    int pick_branch_var() {
        while (!heap_.empty()) {
            int v = heap_[0];
            heap_remove_top();
            if (value_[v] == 0)
                return v;
        }
        return 0;
    }

    void bump_activity(int v) {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (int u = 1; u <= num_vars_; ++u)
                activity_[u] *= 1e-100;
            var_inc_ *= 1e-100;
        }
        if (heap_pos_[v] >= 0)
            heap_up(heap_pos_[v]);
    }

    void decay_activities() { var_inc_ /= 0.95; }

    // Binary max-heap on activity, tracking positions for re-insertion.
    bool heap_less(int a, int b) const { return activity_[a] > activity_[b]; }

    void heap_up(int i) {
        int v = heap_[i];
        while (i > 0) {
            int p = (i - 1) / 2;
            if (!heap_less(v, heap_[p]))
                break;
            heap_[i] = heap_[p];
            heap_pos_[heap_[i]] = i;
            i = p;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }

    void heap_down(int i) {
        int v = heap_[i];
        int n = (int)heap_.size();
        while (true) {
            int child = 2 * i + 1;
            if (child >= n)
                break;
            if (child + 1 < n && heap_less(heap_[child + 1], heap_[child]))
                ++child;
            if (!heap_less(heap_[child], v))
                break;
            heap_[i] = heap_[child];
            heap_pos_[heap_[i]] = i;
            i = child;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }

    void heap_insert(int v) {
        heap_pos_[v] = (int)heap_.size();
        heap_.push_back(v);
        heap_up(heap_pos_[v]);
    }

    void heap_remove_top() {
        int v = heap_[0];
        heap_pos_[v] = -1;
        heap_[0] = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_pos_[heap_[0]] = 0;
            heap_down(0);
        }
    }

    bool out_of_budget(const SolveBudget& budget,
                       std::chrono::steady_clock::time_point start) const {
        if (budget.stop && budget.stop->load(std::memory_order_relaxed))
            return true;
        if (budget.timeout_seconds > 0.0) {
            double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (elapsed >= budget.timeout_seconds)
                return true;
        }
        return false;
    }

    int num_vars_;
    SolveStats stats_;
    std::vector<Clause> clauses_;
    std::vector<int> units_;
    bool contradiction_ = false;
    bool learning_ = false;  // clauses attached after setup are learnt
    int first_learned_ = INT32_MAX;

    std::vector<signed char> value_;
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<int> trail_;
    std::vector<int> trail_lim_;
    std::size_t qhead_ = 0;

    std::vector<double> activity_;
    double var_inc_ = 1.0;
    std::vector<bool> saved_phase_;
    std::vector<signed char> seen_;
    std::vector<int> heap_;
    std::vector<int> heap_pos_;
    std::vector<std::vector<int>> watches_;
};

inline SolveResult solve(const Cnf& cnf, const SolveBudget& budget = {}) {
    CdclSolver solver(cnf);
    SolveResult result = solver.solve(budget);
    if (result.status == SolveStatus::Sat && !verify_model(cnf, result.model))
        throw std::logic_error("internal solver error: returned model fails verification");
    return result;
}

}  // namespace dlfit
