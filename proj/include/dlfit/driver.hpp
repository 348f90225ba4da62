#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bisim.hpp"
#include "encode.hpp"
#include "eval.hpp"
#include "external_solver.hpp"
#include "polyfit.hpp"
#include "reduce.hpp"
#include "solver.hpp"
#include "topology.hpp"

namespace dlfit {

enum class Fragment { Alc, Alci, Alcq, Alcqf, Alcqi, Alcqif };

inline bool fragment_has_inverse(Fragment f) {
    return f == Fragment::Alci || f == Fragment::Alcqi || f == Fragment::Alcqif;
}
inline bool fragment_has_counting(Fragment f) { return f != Fragment::Alc && f != Fragment::Alci; }
inline bool fragment_has_features(Fragment f) {
    return f == Fragment::Alcqf || f == Fragment::Alcqif;
}

inline Fragment parse_fragment(const std::string& s) {
    if (s == "alc") return Fragment::Alc;
    if (s == "alci") return Fragment::Alci;
    if (s == "alcq") return Fragment::Alcq;
    if (s == "alcqf") return Fragment::Alcqf;
    if (s == "alcqi") return Fragment::Alcqi;
    if (s == "alcqif") return Fragment::Alcqif;
    throw std::invalid_argument("unknown fragment: " + s);
}

inline std::string fragment_name(Fragment f) {
    switch (f) {
        case Fragment::Alc: return "alc";
        case Fragment::Alci: return "alci";
        case Fragment::Alcq: return "alcq";
        case Fragment::Alcqf: return "alcqf";
        case Fragment::Alcqi: return "alcqi";
        case Fragment::Alcqif: return "alcqif";
    }
    return "?";
}

struct StageStats {
    int k = 0;
    int g_bound = 0;
    int n_f = 0;
    std::size_t vars = 0;
    std::size_t clauses = 0;
    double encode_seconds = 0.0;
    double solve_seconds = 0.0;
    SolveStatus solve_status = SolveStatus::Timeout;
};

struct SearchConfig {
    Fragment fragment = Fragment::Alc;
    int max_stage = 8;
    int g_linear = 1;   // g(k) = g_linear * k; requires g_linear >= 1
    int g_cap = 0;      // when > 0, g(k) = g_cap (incomplete; a warning is emitted)
    int nf_per_stage = 1;  // n_f(k) = nf_per_stage * k
    int nf_fixed = 0;      // when > 0, n_f(k) = nf_fixed
    int threads = 1;
    double stage_timeout_seconds = 0.0;
    double total_timeout_seconds = 0.0;
    bool approx = false;
    bool use_quotient = true;
    std::string solver_command;  // empty: built-in CDCL
    unsigned seed = 0;
    std::function<void(const StageStats&)> on_stage;

    int g_of(int k) const { return g_cap > 0 ? g_cap : g_linear * k; }
    int nf_of(int k) const { return nf_fixed > 0 ? nf_fixed : nf_per_stage * k; }

    void validate() const {
        if (max_stage < 1)
            throw std::invalid_argument("max_stage must be >= 1");
        if (g_cap == 0 && g_linear < 1)
            throw std::invalid_argument("linear g schedule requires factor >= 1");
        if (g_cap < 0 || nf_fixed < 0)
            throw std::invalid_argument("schedule bounds must be nonnegative");
        if (nf_fixed == 0 && nf_per_stage < 1)
            throw std::invalid_argument("per-stage threshold count must be >= 1");
        if (threads < 1)
            throw std::invalid_argument("threads must be >= 1");
    }
};

enum class FitStatus { Exact, Approx, None, Budget };

inline std::string fit_status_name(FitStatus s) {
    switch (s) {
        case FitStatus::Exact: return "EXACT";
        case FitStatus::Approx: return "APPROX";
        case FitStatus::None: return "NONE";
        case FitStatus::Budget: return "BUDGET";
    }
    return "?";
}

struct FitResult {
    FitStatus status = FitStatus::None;
    Concept learned;  // null for NONE and for BUDGET without a best-so-far
    int stage_found = 0;
    int node_count = 0;
    std::vector<bool> per_example;  // positives then negatives, true = correct
    int num_fit = 0;
    std::vector<StageStats> stages;
    std::vector<std::string> warnings;
};

namespace detail {

struct StageOutcome {
    SolveStatus status = SolveStatus::Timeout;
    std::vector<bool> model;
    SolveStats stats;
};

inline SolveResult dispatch_solve(const Cnf& cnf, const std::string& solver_command,
                                  const SolveBudget& budget) {
    if (solver_command.empty())
        return solve(cnf, budget);
    return solve_external(cnf, solver_command, budget);
}

}  // namespace detail

// Solves one stage, optionally split by concept topology across worker
// threads. Each worker owns a CNF copy pinned to its topology bucket; the
// first SAT worker cancels the others via a shared stop flag. The stage is
// UNSAT only when every bucket is UNSAT.
inline detail::StageOutcome parallel_stage(const CnfInstance& inst,
                                           const std::vector<Topology>& topologies, int threads,
                                           const SolveBudget& budget,
                                           const std::string& solver_command = "") {
    detail::StageOutcome out;
    if (threads <= 1 || topologies.size() <= 1) {
        SolveResult r = detail::dispatch_solve(inst.cnf(), solver_command, budget);
        out.status = r.status;
        out.model = std::move(r.model);
        out.stats = r.stats;
        return out;
    }
    int buckets = std::min<int>(threads, (int)topologies.size());
    std::vector<std::vector<Topology>> split(buckets);
    for (std::size_t t = 0; t < topologies.size(); ++t)
        split[t % buckets].push_back(topologies[t]);

    std::atomic<bool> stop{false};
    std::mutex mtx;
    bool have_sat = false, have_timeout = false, have_error = false;
    std::string error_message;
    std::vector<std::thread> workers;
    for (int w = 0; w < buckets; ++w) {
        workers.emplace_back([&, w] {
            try {
                Cnf cnf = with_topologies(inst, split[w]);
                SolveBudget worker_budget = budget;
                worker_budget.stop = &stop;
                SolveResult r = detail::dispatch_solve(cnf, solver_command, worker_budget);
                std::lock_guard<std::mutex> lock(mtx);
                out.stats.conflicts += r.stats.conflicts;
                out.stats.decisions += r.stats.decisions;
                out.stats.propagations += r.stats.propagations;
                if (r.status == SolveStatus::Sat && !have_sat) {
                    have_sat = true;
                    out.model = std::move(r.model);
                    stop.store(true);
                } else if (r.status == SolveStatus::Timeout && !stop.load()) {
                    have_timeout = true;
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mtx);
                have_error = true;
                error_message = e.what();
                stop.store(true);
            }
        });
    }
    for (auto& t : workers)
        t.join();
    if (have_error && !have_sat)
        throw std::runtime_error("stage worker failed: " + error_message);
    out.status = have_sat ? SolveStatus::Sat
                          : (have_timeout ? SolveStatus::Timeout : SolveStatus::Unsat);
    return out;
}

namespace detail {

// Immutable per-run reduction state: the inverse-role step is stage
// independent, while feature booleanization is redone per stage.
struct ReducedInput {
    DatabasePtr base;  // after inverse reduction (and feature drop when the
                       // fragment has no feature support)
    ReductionContext inverse_ctx;
    bool has_features = false;  // fragment handles features and facts exist
};

inline ReducedInput reduce_input(const FittingProblem& problem, const SearchConfig& config) {
    ReducedInput out;
    DatabasePtr db = problem.db;
    if (fragment_has_inverse(config.fragment)) {
        auto [reduced, ctx] = add_inverse_roles(*db);
        db = reduced;
        out.inverse_ctx = std::move(ctx);
    }
    out.has_features = fragment_has_features(config.fragment) && db->has_feature_facts();
    if (!out.has_features && db->has_feature_facts()) {
        // Fragments without feature support cannot reference feature facts;
        // drop them while keeping the domain intact.
        auto [dropped, ctx] = booleanize_features(*db, {});
        db = dropped;
    }
    out.base = db;
    return out;
}

// Stage database: thresholds for n_f(k), booleanized, optionally quotiented.
// Examples are tracked by name across the transformations.
struct StageInput {
    FittingProblem problem;  // over the stage database
    ReductionContext feature_ctx;
    int n_f = 0;
    // A positive and a negative collapsed to one quotient individual: the
    // stage's threshold set is too coarse and the stage is UNSAT outright.
    bool example_collision = false;
};

inline StageInput stage_input(const FittingProblem& original, const ReducedInput& reduced,
                              const SearchConfig& config, int k) {
    StageInput out;
    DatabasePtr db = reduced.base;
    if (reduced.has_features) {
        out.n_f = config.nf_of(k);
        std::map<std::string, std::vector<Decimal>> cuts;
        for (const auto& f : db->feature_names())
            cuts[f] = select_thresholds(*db, f, out.n_f);
        auto [booleanized, ctx] = booleanize_features(*db, cuts);
        db = booleanized;
        out.feature_ctx = std::move(ctx);
    }
    std::vector<std::string> pos, neg;
    for (int a : original.positives)
        pos.push_back(original.db->individual_name(a));
    for (int a : original.negatives)
        neg.push_back(original.db->individual_name(a));
    if (config.use_quotient) {
        // Counting fragments need the copy-preserving quotient; without
        // number restrictions the plain ALC collapse is sound and smaller.
        QuotientDatabase q =
            fragment_has_counting(config.fragment) ? quotient(*db) : alc_quotient(*db);
        for (auto& name : pos)
            name = q.example_map.at(name);
        for (auto& name : neg)
            name = q.example_map.at(name);
        db = q.db;
        for (const auto& p : pos)
            for (const auto& nn : neg)
                if (p == nn)
                    out.example_collision = true;
        if (out.example_collision)
            return out;
    }
    out.problem = FittingProblem(db, pos, neg);
    return out;
}

inline Concept back_translate(const Concept& c, const StageInput& stage,
                              const ReducedInput& reduced) {
    Concept out = restore_features(c, stage.feature_ctx);
    return restore_inverse_roles(out, reduced.inverse_ctx);
}

struct BudgetTracker {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double total = 0.0;

    double remaining() const {
        if (total <= 0.0)
            return 0.0;  // unlimited
        double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                             .count();
        return total - elapsed;
    }
    bool exhausted() const { return total > 0.0 && remaining() <= 0.0; }

    // Stage budget: the smaller of the per-stage cap and what is left.
    double stage_budget(double per_stage) const {
        double r = total > 0.0 ? remaining() : 0.0;
        if (per_stage <= 0.0)
            return r > 0.0 ? r : 0.0;
        if (r <= 0.0)
            return total > 0.0 ? 0.000001 : per_stage;
        return std::min(per_stage, r);
    }
};

}  // namespace detail

// Bounded fitting (stage iteration): for k = 1, 2, ... encode the
// size-restricted problem with numbers bounded by g(k), solve, and return the
// first (hence minimum-size) fitting concept, back-translated to the input
// fragment and re-verified on the original database.
inline FitResult bounded_fit(const FittingProblem& problem, const SearchConfig& config) {
    config.validate();
    FitResult result;
    if (config.g_cap > 0)
        result.warnings.push_back(
            "constant number-restriction cap breaks the completeness guarantee (the bound must "
            "grow at least linearly with the stage)");

    detail::BudgetTracker budget;
    budget.total = config.total_timeout_seconds;
    detail::ReducedInput reduced = detail::reduce_input(problem, config);

    // Existence short-circuit on the fully booleanized database: thresholds
    // at every observed value make the reduction exact.
    BisimKind kind = fragment_has_counting(config.fragment) ? BisimKind::Alcq : BisimKind::Alc;
    DatabasePtr full = reduced.base;
    ReductionContext full_ctx;
    if (reduced.has_features) {
        std::map<std::string, std::vector<Decimal>> cuts;
        for (const auto& f : full->feature_names())
            cuts[f] = full->observed_values(f);
        auto [booleanized, ctx] = booleanize_features(*full, cuts);
        full = booleanized;
        full_ctx = std::move(ctx);
    }
    std::vector<std::string> pos, neg;
    for (int a : problem.positives)
        pos.push_back(problem.db->individual_name(a));
    for (int a : problem.negatives)
        neg.push_back(problem.db->individual_name(a));
    FittingProblem full_problem(full, pos, neg);
    BisimPartition partition = max_bisimulation(*full, kind);
    if (!fitting_exists(full_problem, partition)) {
        result.status = FitStatus::None;
        if (config.approx) {
            ApproxSelection sel = approx_select(full_problem, partition);
            Concept c = construct_fitting(full_problem, sel, partition);
            c = restore_features(c, full_ctx);
            c = restore_inverse_roles(c, reduced.inverse_ctx);
            FitCheck check = fits(c, problem);
            result.status = FitStatus::Approx;
            result.learned = c;
            result.node_count = (int)node_count(c);
            result.per_example = check.per_example;
            for (bool ok : check.per_example)
                result.num_fit += ok ? 1 : 0;
        }
        return result;
    }

    for (int k = 1; k <= config.max_stage; ++k) {
        if (budget.exhausted()) {
            result.status = FitStatus::Budget;
            return result;
        }
        StageStats stats;
        stats.k = k;
        stats.g_bound = config.g_of(k);
        auto t0 = std::chrono::steady_clock::now();
        detail::StageInput stage = detail::stage_input(problem, reduced, config, k);
        stats.n_f = stage.n_f;
        if (stage.example_collision) {
            stats.solve_status = SolveStatus::Unsat;
            result.stages.push_back(stats);
            if (config.on_stage)
                config.on_stage(stats);
            continue;
        }

        EncodeOptions opt;
        opt.k = k;
        opt.g_bound = stats.g_bound;
        opt.counting = fragment_has_counting(config.fragment);
        CnfInstance inst = encode(stage.problem, opt);
        stats.vars = (std::size_t)inst.cnf().num_vars;
        stats.clauses = inst.cnf().clauses.size();
        auto t1 = std::chrono::steady_clock::now();
        stats.encode_seconds = std::chrono::duration<double>(t1 - t0).count();

        SolveBudget solve_budget;
        solve_budget.timeout_seconds = budget.stage_budget(config.stage_timeout_seconds);
        std::vector<Topology> topologies;
        if (config.threads > 1)
            topologies = enumerate_topologies(k);
        detail::StageOutcome outcome =
            parallel_stage(inst, topologies, config.threads, solve_budget, config.solver_command);
        stats.solve_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
        stats.solve_status = outcome.status;
        result.stages.push_back(stats);
        if (config.on_stage)
            config.on_stage(stats);

        if (outcome.status == SolveStatus::Timeout) {
            result.status = FitStatus::Budget;
            return result;
        }
        if (outcome.status == SolveStatus::Sat) {
            Concept decoded = decode(outcome.model, inst);
            Concept c = detail::back_translate(decoded, stage, reduced);
            FitCheck check = fits(c, problem);
            if (!check.fits)
                throw std::logic_error(
                    "internal error: back-translated concept does not fit the original database");
            result.status = FitStatus::Exact;
            result.learned = c;
            result.stage_found = k;
            result.node_count = (int)node_count(c);
            result.per_example = check.per_example;
            result.num_fit = problem.num_examples();
            return result;
        }
    }
    result.status = FitStatus::Budget;
    result.warnings.push_back("no fitting concept within max_stage although one may exist");
    return result;
}

// Maximum-fit approximation: per stage, indicator variables mark correctly
// classified examples and a descending cardinality threshold finds the
// largest achievable count. Anytime: the best concept so far survives budget
// exhaustion. The quotient is skipped because merging bisimilar examples
// would distort the example counts.
inline FitResult max_fit(const FittingProblem& problem, const SearchConfig& config) {
    config.validate();
    FitResult result;
    detail::BudgetTracker budget;
    budget.total = config.total_timeout_seconds;
    SearchConfig cfg = config;
    cfg.use_quotient = false;
    detail::ReducedInput reduced = detail::reduce_input(problem, cfg);

    const int total = problem.num_examples();
    int best = -1;
    for (int k = 1; k <= cfg.max_stage && best < total; ++k) {
        if (budget.exhausted())
            break;
        StageStats stats;
        stats.k = k;
        stats.g_bound = cfg.g_of(k);
        auto t0 = std::chrono::steady_clock::now();
        detail::StageInput stage = detail::stage_input(problem, reduced, cfg, k);
        stats.n_f = stage.n_f;

        EncodeOptions opt;
        opt.k = k;
        opt.g_bound = stats.g_bound;
        opt.counting = fragment_has_counting(cfg.fragment);
        opt.add_fitting_units = false;
        opt.add_indicators = true;
        CnfInstance inst = encode(stage.problem, opt);
        stats.vars = (std::size_t)inst.cnf().num_vars;
        stats.clauses = inst.cnf().clauses.size();
        auto t1 = std::chrono::steady_clock::now();
        stats.encode_seconds = std::chrono::duration<double>(t1 - t0).count();

        // Linear descent on the threshold t, skipping past the best count the
        // returned model actually achieves.
        bool timed_out = false;
        for (int t = total; t > std::max(best, 0); --t) {
            if (budget.exhausted()) {
                timed_out = true;
                break;
            }
            Cnf cnf = inst.cnf();
            cnf.clauses.push_back({inst.count_geq[t - 1]});
            SolveBudget solve_budget;
            solve_budget.timeout_seconds = budget.stage_budget(cfg.stage_timeout_seconds);
            SolveResult r = detail::dispatch_solve(cnf, cfg.solver_command, solve_budget);
            stats.solve_status = r.status;
            if (r.status == SolveStatus::Timeout) {
                timed_out = true;
                break;
            }
            if (r.status == SolveStatus::Unsat)
                continue;
            Concept decoded = decode(r.model, inst, /*verify_fit=*/false);
            Concept c = detail::back_translate(decoded, stage, reduced);
            FitCheck check = fits(c, problem);
            int achieved = 0;
            for (bool ok : check.per_example)
                achieved += ok ? 1 : 0;
            if (achieved < t)
                throw std::logic_error("internal error: model achieves less than its threshold");
            best = achieved;
            result.learned = c;
            result.stage_found = k;
            result.node_count = (int)node_count(c);
            result.per_example = check.per_example;
            result.num_fit = achieved;
            break;
        }
        stats.solve_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
        result.stages.push_back(stats);
        if (cfg.on_stage)
            cfg.on_stage(stats);
        if (timed_out)
            break;
    }
    if (best >= total)
        result.status = FitStatus::Exact;
    else if (result.learned)
        result.status = FitStatus::Approx;
    else
        result.status = FitStatus::Budget;
    return result;
}

}  // namespace dlfit
