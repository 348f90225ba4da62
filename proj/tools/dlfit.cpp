#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dlfit/dlfit.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write file: " + path);
    out << contents;
}

dlfit::DatabasePtr load_database(const std::string& path) {
    return dlfit::parse_fact_text(read_file(path)).build();
}

struct ProblemFile {
    std::vector<std::string> positives;
    std::vector<std::string> negatives;
};

ProblemFile load_problem(const std::string& path) {
    json j = json::parse(read_file(path));
    ProblemFile p;
    for (const auto& name : j.at("positive"))
        p.positives.push_back(name.get<std::string>());
    for (const auto& name : j.at("negative"))
        p.negatives.push_back(name.get<std::string>());
    return p;
}

json stage_json(const dlfit::StageStats& s) {
    return json{{"k", s.k},
                {"g_bound", s.g_bound},
                {"n_f", s.n_f},
                {"vars", s.vars},
                {"clauses", s.clauses},
                {"encode_seconds", s.encode_seconds},
                {"solve_seconds", s.solve_seconds},
                {"solve_status", s.solve_status == dlfit::SolveStatus::Sat     ? "SAT"
                                 : s.solve_status == dlfit::SolveStatus::Unsat ? "UNSAT"
                                                                               : "TIMEOUT"}};
}

json metrics_json(const dlfit::Metrics& m) {
    return json{{"accuracy", m.accuracy}, {"precision", m.precision},
                {"recall", m.recall},     {"f1", m.f1},
                {"f1_ill_defined", m.f1_ill_defined}};
}

int result_exit_code(dlfit::FitStatus status) {
    switch (status) {
        case dlfit::FitStatus::Exact: return 0;
        case dlfit::FitStatus::Approx:
        case dlfit::FitStatus::Budget: return 2;
        case dlfit::FitStatus::None: return 3;
    }
    return 1;
}

struct CommonOptions {
    std::string facts_path;
    std::string problem_path;
    std::string fragment = "alc";
    int max_stage = 8;
    int g_linear = 1;
    int g_cap = 0;
    int nf_per_stage = 1;
    int nf_fixed = 0;
    int threads = 1;
    double stage_timeout = 0.0;
    double timeout = 0.0;
    std::string solver;
    bool no_quotient = false;
    unsigned seed = 0;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("facts", o.facts_path, "fact file")->required();
    cmd->add_option("problem", o.problem_path, "problem JSON with positive/negative lists")
        ->required();
    cmd->add_option("--fragment", o.fragment, "alc|alci|alcq|alcqf|alcqi|alcqif");
    cmd->add_option("--max-stage", o.max_stage, "largest concept size to try");
    cmd->add_option("--g-linear", o.g_linear, "number bound factor: g(k) = C*k");
    cmd->add_option("--g-cap", o.g_cap, "constant number bound (incomplete)");
    cmd->add_option("--nf-per-stage", o.nf_per_stage, "thresholds per feature: n_f(k) = N*k");
    cmd->add_option("--nf-fixed", o.nf_fixed, "fixed threshold count per feature");
    cmd->add_option("--threads", o.threads, "stage workers (topology split)");
    cmd->add_option("--stage-timeout", o.stage_timeout, "per-stage time budget in seconds");
    cmd->add_option("--timeout", o.timeout, "total time budget in seconds");
    cmd->add_option("--solver", o.solver, "external DIMACS solver command");
    cmd->add_flag("--no-quotient", o.no_quotient, "disable the bisimulation quotient");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_flag("--verbose", o.verbose, "per-stage progress on stderr");
}

dlfit::SearchConfig make_config(const CommonOptions& o) {
    dlfit::SearchConfig cfg;
    cfg.fragment = dlfit::parse_fragment(o.fragment);
    cfg.max_stage = o.max_stage;
    cfg.g_linear = o.g_linear;
    cfg.g_cap = o.g_cap;
    cfg.nf_per_stage = o.nf_per_stage;
    cfg.nf_fixed = o.nf_fixed;
    cfg.threads = o.threads;
    cfg.stage_timeout_seconds = o.stage_timeout;
    cfg.total_timeout_seconds = o.timeout;
    cfg.use_quotient = !o.no_quotient;
    cfg.solver_command = o.solver;
    cfg.seed = o.seed;
    if (o.verbose)
        cfg.on_stage = [](const dlfit::StageStats& s) {
            std::cerr << "stage k=" << s.k << " g=" << s.g_bound << " vars=" << s.vars
                      << " clauses=" << s.clauses << " status="
                      << (s.solve_status == dlfit::SolveStatus::Sat     ? "SAT"
                          : s.solve_status == dlfit::SolveStatus::Unsat ? "UNSAT"
                                                                        : "TIMEOUT")
                      << " solve=" << s.solve_seconds << "s\n";
        };
    return cfg;
}

int run_fit(const CommonOptions& o, bool approx_mode) {
    dlfit::DatabasePtr db = load_database(o.facts_path);
    ProblemFile pf = load_problem(o.problem_path);
    dlfit::FittingProblem problem(db, pf.positives, pf.negatives);
    dlfit::SearchConfig cfg = make_config(o);
    cfg.approx = approx_mode;
    dlfit::FitResult r =
        approx_mode ? dlfit::max_fit(problem, cfg) : dlfit::bounded_fit(problem, cfg);

    json record{{"command", approx_mode ? "maxfit" : "learn"},
                {"status", dlfit::fit_status_name(r.status)},
                {"stage", r.stage_found},
                {"node_count", r.node_count},
                {"num_fit", r.num_fit},
                {"num_examples", problem.num_examples()},
                {"warnings", r.warnings}};
    json stages = json::array();
    for (const auto& s : r.stages)
        stages.push_back(stage_json(s));
    record["stages"] = stages;
    if (r.learned) {
        record["concept"] = dlfit::render_concept(r.learned);
        record["metrics"] = metrics_json(dlfit::compute_metrics(r.learned, problem));
    }
    std::cout << record.dump() << "\n";
    if (r.learned)
        std::cout << dlfit::render_concept(r.learned) << "\n";
    for (const auto& w : r.warnings)
        std::cerr << "warning: " << w << "\n";
    return result_exit_code(r.status);
}

int run_crossval(const CommonOptions& o, int folds, bool approx_mode) {
    dlfit::DatabasePtr db = load_database(o.facts_path);
    ProblemFile pf = load_problem(o.problem_path);
    dlfit::FittingProblem problem(db, pf.positives, pf.negatives);
    dlfit::SearchConfig cfg = make_config(o);
    cfg.approx = approx_mode;
    dlfit::CrossvalReport report = dlfit::crossval(problem, cfg, folds, o.seed);

    json folds_json = json::array();
    for (const auto& f : report.fold_reports)
        folds_json.push_back(json{{"fold", f.fold},
                                  {"status", dlfit::fit_status_name(f.status)},
                                  {"node_count", f.node_count},
                                  {"fallback_top", f.fallback_top},
                                  {"seconds", f.seconds},
                                  {"train", metrics_json(f.train)},
                                  {"test", metrics_json(f.test)}});
    json record{{"command", "crossval"},
                {"folds", report.folds},
                {"seed", report.seed},
                {"node_count", {{"mean", report.node_count.mean}, {"stddev", report.node_count.stddev}}},
                {"accuracy", {{"mean", report.accuracy.mean}, {"stddev", report.accuracy.stddev}}},
                {"f1", {{"mean", report.f1.mean}, {"stddev", report.f1.stddev}}},
                {"fold_reports", folds_json}};
    std::cout << record.dump() << "\n";
    return 0;
}

int run_bisim(const std::string& facts_path, const std::string& kind_name) {
    dlfit::DatabasePtr db = load_database(facts_path);
    dlfit::BisimKind kind =
        kind_name == "alc" ? dlfit::BisimKind::Alc : dlfit::BisimKind::Alcq;
    if (db->has_feature_facts()) {
        auto [dropped, ctx] = dlfit::booleanize_features(
            *db, [&] {
                std::map<std::string, std::vector<dlfit::Decimal>> cuts;
                for (const auto& f : db->feature_names())
                    cuts[f] = db->observed_values(f);
                return cuts;
            }());
        db = dropped;
    }
    dlfit::BisimPartition p = dlfit::max_bisimulation(*db, kind);
    json classes = json::array();
    for (int c = 0; c < p.num_classes; ++c) {
        json members = json::array();
        for (int a = 0; a < db->num_individuals(); ++a)
            if (p.class_of[a] == c)
                members.push_back(db->individual_name(a));
        classes.push_back(members);
    }
    std::cout << json{{"command", "bisim"},
                      {"kind", kind_name},
                      {"num_classes", p.num_classes},
                      {"rounds", (int)p.rounds.size()},
                      {"classes", classes}}
                     .dump()
              << "\n";
    return 0;
}

int run_quotient(const std::string& facts_path, const std::string& out_path) {
    dlfit::DatabasePtr db = load_database(facts_path);
    // Like bisim: features become threshold names at all observed values, so
    // the quotient only merges individuals with identical feature profiles.
    if (db->has_feature_facts()) {
        auto [dropped, ctx] = dlfit::booleanize_features(
            *db, [&] {
                std::map<std::string, std::vector<dlfit::Decimal>> cuts;
                for (const auto& f : db->feature_names())
                    cuts[f] = db->observed_values(f);
                return cuts;
            }());
        db = dropped;
    }
    dlfit::QuotientDatabase q = dlfit::quotient(*db);
    std::string facts = dlfit::serialize_facts(*q.db);
    if (out_path.empty())
        std::cout << facts;
    else
        write_file(out_path, facts);
    json mapping;
    for (const auto& [from, to] : q.example_map)
        mapping[from] = to;
    std::cerr << json{{"command", "quotient"},
                      {"individuals", q.db->num_individuals()},
                      {"classes", q.partition.num_classes},
                      {"example_map", mapping}}
                     .dump()
              << "\n";
    return 0;
}

int run_encode(const CommonOptions& o, int k, const std::string& out_path,
               const std::string& sidecar_path) {
    dlfit::DatabasePtr db = load_database(o.facts_path);
    ProblemFile pf = load_problem(o.problem_path);
    dlfit::FittingProblem problem(db, pf.positives, pf.negatives);
    dlfit::SearchConfig cfg = make_config(o);
    dlfit::detail::ReducedInput reduced = dlfit::detail::reduce_input(problem, cfg);
    dlfit::detail::StageInput stage = dlfit::detail::stage_input(problem, reduced, cfg, k);
    if (stage.example_collision)
        throw std::runtime_error(
            "stage threshold set too coarse: a positive and a negative coincide");
    dlfit::EncodeOptions opt;
    opt.k = k;
    opt.g_bound = cfg.g_of(k);
    opt.counting = dlfit::fragment_has_counting(cfg.fragment);
    dlfit::CnfInstance inst = dlfit::encode(stage.problem, opt);
    std::string dimacs = dlfit::to_dimacs(inst.cnf());
    if (out_path.empty())
        std::cout << dimacs;
    else
        write_file(out_path, dimacs);
    if (!sidecar_path.empty()) {
        json vars;
        const auto& names = inst.builder->names();
        for (std::size_t v = 0; v < names.size(); ++v)
            vars[std::to_string(v + 1)] = names[v];
        write_file(sidecar_path, json{{"k", inst.k},
                                      {"g_bound", inst.g_bound},
                                      {"num_vars", inst.cnf().num_vars},
                                      {"num_clauses", inst.cnf().clauses.size()},
                                      {"variables", vars}}
                                     .dump(2));
    }
    std::cerr << json{{"command", "encode-dimacs"},
                      {"k", k},
                      {"g_bound", opt.g_bound},
                      {"vars", inst.cnf().num_vars},
                      {"clauses", inst.cnf().clauses.size()}}
                     .dump()
              << "\n";
    return 0;
}

std::vector<std::set<int>> parse_sets(const std::string& text) {
    std::vector<std::set<int>> sets;
    std::stringstream groups(text);
    std::string group;
    while (std::getline(groups, group, ';')) {
        std::set<int> s;
        std::stringstream elems(group);
        std::string elem;
        while (std::getline(elems, elem, ','))
            if (!elem.empty())
                s.insert(std::stoi(elem));
        if (!s.empty())
            sets.push_back(std::move(s));
    }
    return sets;
}

int run_gen_hitting_set(const std::string& sets_text, int k, int group_size,
                        const std::string& prefix) {
    auto sets = parse_sets(sets_text);
    dlfit::HittingSetInstance inst = dlfit::gen_hitting_set(sets, k, group_size);
    write_file(prefix + ".facts", dlfit::serialize_facts(*inst.db));
    write_file(prefix + ".problem.json",
               json{{"positive", {inst.positive}}, {"negative", {inst.negative}}}.dump(2));
    json meta{{"command", "gen-hitting-set"},
              {"n", inst.n},
              {"k", inst.k},
              {"k_prime", inst.k_prime},
              {"group_size", inst.group_size},
              {"has_hitting_set", inst.has_hitting_set},
              {"min_hitting_set", inst.min_hitting_set},
              {"individuals", inst.db->num_individuals()}};
    write_file(prefix + ".meta.json", meta.dump(2));
    std::cout << meta.dump() << "\n";
    return 0;
}

int run_gen_alcq_sep(const std::string& facts_path, unsigned seed, const std::string& prefix) {
    dlfit::DatabasePtr db = load_database(facts_path);
    auto problems = dlfit::gen_alcq_separation(*db, seed);
    if (problems.empty()) {
        std::cerr << "notice: no ALC class splits into multiple ALCQ classes\n";
        std::cout << json{{"command", "gen-alcq-sep"}, {"problems", 0}}.dump() << "\n";
        return 0;
    }
    for (std::size_t i = 0; i < problems.size(); ++i) {
        json j{{"positive", problems[i].positives},
               {"negative", problems[i].negatives},
               {"alc_classes", problems[i].alc_classes}};
        write_file(prefix + "." + std::to_string(i) + ".problem.json", j.dump(2));
    }
    std::cout << json{{"command", "gen-alcq-sep"}, {"problems", problems.size()}}.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SAT-based bounded fitting of description logic concepts"};
    app.require_subcommand(1);

    CommonOptions learn_opts, maxfit_opts, crossval_opts, encode_opts;
    int folds = 10;
    bool crossval_approx = false;
    std::string bisim_facts, bisim_kind = "alcq";
    std::string quotient_facts, quotient_out;
    int encode_k = 1;
    std::string encode_out, encode_sidecar;
    std::string gen_sets, gen_prefix = "hitting_set";
    int gen_k = 1, gen_group_size = 0;
    std::string sep_facts, sep_prefix = "alcq_sep";
    unsigned sep_seed = 0;

    add_common(app.add_subcommand("learn", "minimum-size exact fitting"), learn_opts);
    add_common(app.add_subcommand("maxfit", "maximum-example approximate fitting"), maxfit_opts);
    auto* cv = app.add_subcommand("crossval", "stratified cross-validation");
    add_common(cv, crossval_opts);
    cv->add_option("--folds", folds, "number of folds");
    cv->add_flag("--approx", crossval_approx, "use maxfit per fold");

    auto* bs = app.add_subcommand("bisim", "maximal bisimulation classes");
    bs->add_option("facts", bisim_facts, "fact file")->required();
    bs->add_option("--kind", bisim_kind, "alc|alcq");

    auto* qt = app.add_subcommand("quotient", "bisimulation quotient of a database");
    qt->add_option("facts", quotient_facts, "fact file")->required();
    qt->add_option("-o,--output", quotient_out, "output fact file (default stdout)");

    auto* en = app.add_subcommand("encode-dimacs", "export one stage as DIMACS CNF");
    add_common(en, encode_opts);
    en->add_option("-k,--k", encode_k, "stage size")->required();
    en->add_option("-o,--output", encode_out, "DIMACS output (default stdout)");
    en->add_option("--sidecar", encode_sidecar, "variable-map JSON output");

    auto* gh = app.add_subcommand("gen-hitting-set", "hard instance from a hitting-set problem");
    gh->add_option("--sets", gen_sets, "sets, e.g. \"1,3;2,4\"")->required();
    gh->add_option("-k,--k", gen_k, "hitting set size bound")->required();
    gh->add_option("--group-size", gen_group_size,
                   "override group size (default k'+1; smaller sizes void the guarantee)");
    gh->add_option("-o,--output", gen_prefix, "output file prefix");

    auto* gs = app.add_subcommand("gen-alcq-sep", "ALCQ-vs-ALC separation problems");
    gs->add_option("facts", sep_facts, "fact file")->required();
    gs->add_option("--seed", sep_seed, "random seed");
    gs->add_option("-o,--output", sep_prefix, "output file prefix");

    CLI11_PARSE(app, argc, argv);
    try {
        if (app.got_subcommand("learn"))
            return run_fit(learn_opts, false);
        if (app.got_subcommand("maxfit"))
            return run_fit(maxfit_opts, true);
        if (app.got_subcommand("crossval"))
            return run_crossval(crossval_opts, folds, crossval_approx);
        if (app.got_subcommand("bisim"))
            return run_bisim(bisim_facts, bisim_kind);
        if (app.got_subcommand("quotient"))
            return run_quotient(quotient_facts, quotient_out);
        if (app.got_subcommand("encode-dimacs"))
            return run_encode(encode_opts, encode_k, encode_out, encode_sidecar);
        if (app.got_subcommand("gen-hitting-set"))
            return run_gen_hitting_set(gen_sets, gen_k, gen_group_size, gen_prefix);
        if (app.got_subcommand("gen-alcq-sep"))
            return run_gen_alcq_sep(sep_facts, sep_seed, sep_prefix);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
