#include "polycsp/cli.hpp"

#include "polycsp/algebra.hpp"
#include "polycsp/classify.hpp"
#include "polycsp/core.hpp"
#include "polycsp/equality.hpp"
#include "polycsp/oracle.hpp"
#include "polycsp/qcsp.hpp"
#include "polycsp/reductions.hpp"
#include "polycsp/solvers.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace polycsp {

namespace {

using Json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file " + path);
    out << content;
}

std::string fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Budget override from the environment, e.g.
// POLYCSP_BUDGET="enum_arity=5,brute_vars=22,partition_vars=11".
Budget budget_from_env() {
    Budget budget;
    const char* raw = std::getenv("POLYCSP_BUDGET");
    if (!raw) return budget;
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("malformed POLYCSP_BUDGET entry: " + item);
        const std::string key = item.substr(0, eq);
        const int value = std::stoi(item.substr(eq + 1));
        if (key == "enum_arity") budget.enum_arity = value;
        else if (key == "brute_vars") budget.brute_vars = value;
        else if (key == "partition_vars") budget.partition_vars = value;
        else throw ParseError("unknown POLYCSP_BUDGET key: " + key);
    }
    return budget;
}

struct ReportBuilder {
    Json report;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    explicit ReportBuilder(const std::string& command, std::uint64_t seed) {
        report["command"] = command;
        report["seed"] = seed;
        report["inputs"] = Json::array();
    }

    void input(const std::string& label, const std::string& path, const std::string& bytes) {
        report["inputs"].push_back({{"role", label}, {"path", path}, {"digest", fnv1a64(bytes)}});
    }

    // Timing stays in its own field so consumers can strip it when comparing
    // reports byte for byte.
    void emit(std::ostream& out) {
        const auto elapsed = std::chrono::steady_clock::now() - start;
        report["timing_ms"] =
            std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count() / 1000.0;
        out << report.dump(2) << "\n";
    }
};

Json classification_json(const Classification& c) {
    Json j;
    j["tractable"] = c.tractable;
    if (c.tractable) {
        Json witnesses = Json::array();
        for (SchaeferOp op : c.witnesses) witnesses.push_back(to_string(op));
        j["witnesses"] = witnesses;
    } else {
        j["class"] = c.hardness_class;
    }
    return j;
}

Json assignment_json(const Assignment& a) {
    Json j = Json::object();
    for (const auto& [var, value] : a) j[var] = value;
    return j;
}

std::string table_string(const Operation& f) {
    std::string s;
    for (int v : f.table()) s += static_cast<char>('0' + v);
    return s;
}

// ---- solver and family selection by name --------------------------------------

std::optional<Assignment> solve_by_method(const CspInstance& inst, const std::string& method,
                                          const Budget& budget, std::string& resolved) {
    if (method == "auto") {
        DispatchResult r = dispatch_solve(inst);
        resolved = r.method;
        return r.assignment;
    }
    resolved = method;
    if (method == "brute") return brute_solve(inst, budget);
    if (method == "const0") return solve_constant(inst, 0);
    if (method == "const1") return solve_constant(inst, 1);
    if (method == "ac-and") return arc_consistency_solve(inst, ops::conjunction());
    if (method == "ac-or") return arc_consistency_solve(inst, ops::disjunction());
    if (method == "majority") return majority_solve(inst);
    if (method == "minority") return minority_solve(inst);
    throw ParseError("unknown method " + method);
}

AssignmentFamily family_by_name(const std::string& name, const ConstraintLanguage& lang) {
    if (name == "auto") return default_family_for(lang);
    if (name == "leq1-false") return family_at_most(1, 0);
    if (name == "leq1-true") return family_at_most(1, 1);
    if (name == "leq2-false") return family_at_most(2, 0);
    if (name == "leq2-true") return family_at_most(2, 1);
    if (name == "leq1-false+leq0-true")
        return family_union(family_at_most(1, 0), family_at_most(0, 1));
    if (name == "leq1-true+leq0-false")
        return family_union(family_at_most(1, 1), family_at_most(0, 0));
    throw ParseError("unknown family " + name);
}

// Base solver for the universal-then-existential procedure: routed solving
// with an exhaustive fallback for residues that lost every tractable witness.
CspSolver robust_base(const Budget& budget) {
    return [budget](const CspInstance& inst) -> std::optional<Assignment> {
        try {
            return dispatch_solve(inst).assignment;
        } catch (const PreconditionError&) {
            return brute_solve(inst, budget);
        }
    };
}

// ---- commands -------------------------------------------------------------------

struct CliOptions {
    std::uint64_t seed = 0;
    Budget budget;
};

int cmd_classify(const CliOptions& opt, const std::string& lang_path, std::ostream& out) {
    ReportBuilder report("classify", opt.seed);
    const std::string text = read_file(lang_path);
    report.input("language", lang_path, text);
    const ConstraintLanguage lang = parse_language(text);

    report.report["verdict"]["csp"] = classification_json(schaefer_classify(lang));
    report.report["verdict"]["qcsp"] = classification_json(qcsp_classify(lang));
    Json bounded;
    bounded["Pi_2"] = classification_json(bounded_alternation_classify(lang, 2, Quantifier::Forall));
    bounded["Sigma_3"] =
        classification_json(bounded_alternation_classify(lang, 3, Quantifier::Exists));
    bounded["note"] = "pattern repeats for leading-forall even k and leading-exists odd k";
    report.report["verdict"]["bounded_alternation"] = bounded;
    report.emit(out);
    return 0;
}

int cmd_solve(const CliOptions& opt, const std::string& lang_path, const std::string& inst_path,
              const std::string& method, bool verify, std::ostream& out) {
    ReportBuilder report("solve", opt.seed);
    const std::string lang_text = read_file(lang_path);
    const std::string inst_text = read_file(inst_path);
    report.input("language", lang_path, lang_text);
    report.input("instance", inst_path, inst_text);

    auto lang = std::make_shared<ConstraintLanguage>(parse_language(lang_text));
    const CspInstance inst = parse_csp_instance(inst_text, lang);

    std::string resolved;
    const std::optional<Assignment> solution = solve_by_method(inst, method, opt.budget, resolved);
    report.report["verdict"]["status"] = solution ? "sat" : "unsat";
    report.report["verdict"]["method"] = resolved;
    report.report["verdict"]["assignment"] = solution ? assignment_json(*solution) : Json(nullptr);
    if (verify) {
        const bool oracle_sat = brute_solve(inst, opt.budget).has_value();
        report.report["verdict"]["oracle_agrees"] = oracle_sat == solution.has_value();
        if (oracle_sat != solution.has_value()) {
            report.emit(out);
            throw PreconditionError("verification mismatch against the exhaustive oracle");
        }
    }
    report.emit(out);
    return 0;
}

int cmd_qsolve(const CliOptions& opt, const std::string& lang_path, const std::string& inst_path,
               const std::string& method, const std::string& family_name, std::ostream& out) {
    ReportBuilder report("qsolve", opt.seed);
    const std::string lang_text = read_file(lang_path);
    const std::string inst_text = read_file(inst_path);
    report.input("language", lang_path, lang_text);
    report.input("instance", inst_path, inst_text);

    auto lang = std::make_shared<ConstraintLanguage>(parse_language(lang_text));
    const QcspInstance inst = parse_qcsp_instance(inst_text, lang);
    const PrefixClass cls = classify_prefix(prefix_pattern(inst));
    report.report["verdict"]["prefix_class"] = to_string(cls);

    auto run_pi2 = [&]() {
        const AssignmentFamily fam = family_by_name(family_name, *lang);
        const Pi2Result result = pi2_decide(inst, fam, robust_base(opt.budget), opt.budget);
        report.report["verdict"]["truth"] = result.truth;
        report.report["verdict"]["method"] = "pi2";
        report.report["verdict"]["family"] = to_string(fam);
        if (result.counterexample)
            report.report["verdict"]["counterexample"] = assignment_json(*result.counterexample);
    };
    auto run_brute = [&]() {
        report.report["verdict"]["truth"] = brute_eval_qcsp(inst, opt.budget);
        report.report["verdict"]["method"] = "brute";
    };

    if (method == "pi2") {
        run_pi2();
    } else if (method == "brute") {
        run_brute();
    } else if (method == "auto") {
        if (cls.level == 1 && cls.leading == Quantifier::Exists) {
            // Purely existential: decide satisfiability of the underlying
            // instance.
            std::string resolved;
            std::optional<Assignment> solution;
            try {
                solution = solve_by_method(inst.base(), "auto", opt.budget, resolved);
            } catch (const PreconditionError&) {
                resolved = "brute";
                solution = brute_solve(inst.base(), opt.budget);
            }
            report.report["verdict"]["truth"] = solution.has_value();
            report.report["verdict"]["method"] = "csp-" + resolved;
        } else {
            bool pi2_applies = cls.level == 1 || (cls.level == 2 && cls.leading == Quantifier::Forall);
            if (pi2_applies) {
                try {
                    run_pi2();
                    report.emit(out);
                    return 0;
                } catch (const PreconditionError&) {
                    // fall through to the exhaustive evaluation
                }
            }
            run_brute();
        }
    } else {
        throw ParseError("unknown method " + method);
    }
    report.emit(out);
    return 0;
}

int cmd_polymorphisms(const CliOptions& opt, const std::string& lang_path, int arity,
                      std::ostream& out) {
    ReportBuilder report("polymorphisms", opt.seed);
    const std::string text = read_file(lang_path);
    report.input("language", lang_path, text);
    const ConstraintLanguage lang = parse_language(text);

    const std::vector<Operation> found = polymorphisms_of_arity(lang, arity, opt.budget);
    report.report["verdict"]["arity"] = arity;
    report.report["verdict"]["count"] = found.size();
    Json tables = Json::array();
    for (const Operation& f : found) tables.push_back(table_string(f));
    report.report["verdict"]["operations"] = tables;
    report.emit(out);
    return 0;
}

int cmd_ppmember(const CliOptions& opt, const std::string& lang_path,
                 const std::string& target_path, std::string relation_name, std::ostream& out) {
    ReportBuilder report("ppmember", opt.seed);
    const std::string lang_text = read_file(lang_path);
    const std::string target_text = read_file(target_path);
    report.input("language", lang_path, lang_text);
    report.input("target", target_path, target_text);

    const ConstraintLanguage lang = parse_language(lang_text);
    const ConstraintLanguage targets = parse_language(target_text);
    if (relation_name.empty()) {
        if (targets.size() != 1)
            throw ParseError("target file holds several relations; pick one with --relation");
        relation_name = targets.relations().begin()->first;
    }
    const Relation& target = targets.relation(relation_name);

    const auto definition = synthesize_pp_definition(target, lang, opt.budget);
    report.report["verdict"]["relation"] = relation_name;
    report.report["verdict"]["member"] = definition.has_value();
    if (definition) {
        Json d;
        d["free_vars"] = definition->free_vars;
        d["bound_vars"] = definition->bound_vars;
        d["atoms"] = definition->body.size();
        report.report["verdict"]["definition"] = d;
    }
    report.emit(out);
    return 0;
}

// Definitions for every relation of a derived language, synthesized over the
// base language. Fails when some relation is not definable.
std::map<std::string, PpDefinition> synthesize_all(const ConstraintLanguage& derived,
                                                   const ConstraintLanguage& base,
                                                   const Budget& budget) {
    std::map<std::string, PpDefinition> defs;
    for (const auto& [name, rel] : derived.relations()) {
        auto def = synthesize_pp_definition(rel, base, budget);
        if (!def)
            throw PreconditionError("relation " + name + " is not definable from the base language");
        defs.emplace(name, std::move(*def));
    }
    return defs;
}

int cmd_reduce(const CliOptions& opt, const std::string& gadget,
               const std::vector<std::string>& paths, const std::string& relation_name,
               const std::string& out_path, std::ostream& out) {
    ReportBuilder report("reduce", opt.seed);
    report.report["verdict"]["gadget"] = gadget;

    auto load_language = [&](const std::string& path, const std::string& role) {
        const std::string text = read_file(path);
        report.input(role, path, text);
        return parse_language(text);
    };

    if (gadget == "lift-constants" || gadget == "negation-closure") {
        if (paths.size() != 1) throw ParseError(gadget + " expects one language file");
        const ConstraintLanguage lang = load_language(paths[0], "language");
        std::string name = relation_name;
        if (name.empty()) {
            if (lang.size() != 1)
                throw ParseError("language holds several relations; pick one with --relation");
            name = lang.relations().begin()->first;
        }
        const Relation& r = lang.relation(name);
        const Relation result = gadget == "lift-constants" ? lift_with_constants(r)
                                                           : negation_closure(r);
        ConstraintLanguage out_lang(2);
        out_lang.add(result);
        write_file(out_path, serialize_language(out_lang));
        report.report["verdict"]["relation"] = result.name();
        report.report["verdict"]["tuples"] = result.size();
        report.report["verdict"]["artifacts"] = {{"language", out_path}};
        report.emit(out);
        return 0;
    }

    if (gadget == "inline-csp") {
        if (paths.size() != 3)
            throw ParseError("inline-csp expects <derived-language> <instance> <base-language>");
        auto derived = std::make_shared<ConstraintLanguage>(load_language(paths[0], "derived-language"));
        const std::string inst_text = read_file(paths[1]);
        report.input("instance", paths[1], inst_text);
        auto base = std::make_shared<ConstraintLanguage>(load_language(paths[2], "base-language"));

        const CspInstance inst = parse_csp_instance(inst_text, derived);
        const auto defs = synthesize_all(*derived, *base, opt.budget);
        const CspInstance reduced = inline_reduce_csp(inst, defs, base);
        write_file(out_path, serialize_csp_instance(reduced));
        report.report["verdict"]["variables"] = reduced.variables().size();
        report.report["verdict"]["constraints"] = reduced.constraints().size();
        report.report["verdict"]["artifacts"] = {{"instance", out_path}};
        report.emit(out);
        return 0;
    }

    if (gadget == "inline-qcsp") {
        if (paths.size() != 3)
            throw ParseError("inline-qcsp expects <derived-language> <instance> <base-language>");
        auto derived = std::make_shared<ConstraintLanguage>(load_language(paths[0], "derived-language"));
        const std::string inst_text = read_file(paths[1]);
        report.input("instance", paths[1], inst_text);
        auto base = std::make_shared<ConstraintLanguage>(load_language(paths[2], "base-language"));

        const QcspInstance inst = parse_qcsp_instance(inst_text, derived);
        std::map<std::string, FewDefinition> few;
        for (auto& [name, def] : synthesize_all(*derived, *base, opt.budget))
            few.emplace(name, to_few_definition(def));
        const QcspReduction reduced = inline_reduce_qcsp(inst, few, base);
        if (std::holds_alternative<ConstantFalse>(reduced)) {
            report.report["verdict"]["constant_false"] = true;
        } else {
            const QcspInstance& q = std::get<QcspInstance>(reduced);
            write_file(out_path, serialize_qcsp_instance(q));
            report.report["verdict"]["constant_false"] = false;
            report.report["verdict"]["variables"] = q.base().variables().size();
            report.report["verdict"]["artifacts"] = {{"instance", out_path}};
        }
        report.emit(out);
        return 0;
    }

    if (gadget == "bounded-alt") {
        if (paths.size() != 2) throw ParseError("bounded-alt expects <language> <instance>");
        auto lang = std::make_shared<ConstraintLanguage>(load_language(paths[0], "language"));
        const std::string inst_text = read_file(paths[1]);
        report.input("instance", paths[1], inst_text);
        const QcspInstance inst = parse_qcsp_instance(inst_text, lang);

        // Spread relations via the trivial quantifier-free definitions.
        std::map<std::string, Relation> spreads;
        for (const auto& [name, rel] : lang->relations()) {
            FewDefinition trivial;
            trivial.target = name;
            for (int j = 0; j < rel.arity(); ++j) trivial.free_vars.push_back("v" + std::to_string(j));
            trivial.body.emplace_back(Constraint{name, trivial.free_vars});
            spreads.emplace(name, spread_express(trivial, *lang, opt.budget));
        }
        const QcspInstance reduced = bounded_alt_reduce(inst, spreads);
        const std::string lang_path_out = out_path + ".lang";
        write_file(lang_path_out, serialize_language(reduced.base().language()));
        write_file(out_path, serialize_qcsp_instance(reduced));
        report.report["verdict"]["artifacts"] = {{"instance", out_path},
                                                 {"language", lang_path_out}};
        report.emit(out);
        return 0;
    }

    throw ParseError("unknown gadget " + gadget);
}

int cmd_eq(const CliOptions& opt, const std::string& formula_text, std::ostream& out) {
    ReportBuilder report("eq", opt.seed);
    const PositiveQcsp formula = parse_eq_formula(formula_text);
    report.report["verdict"]["formula"] = serialize_eq_formula(formula);
    report.report["verdict"]["positive"] = formula.matrix.positive();

    if (formula.matrix.positive()) {
        const bool truth = decide_positive_qcsp(formula, opt.budget);
        int disequalities = 0;
        for (std::size_t j = 0; j < formula.prefix.size(); ++j)
            if (formula.prefix[j].first == Quantifier::Forall) disequalities += static_cast<int>(j);
        report.report["verdict"]["truth"] = truth;
        report.report["verdict"]["method"] = "partition-reduct";
        report.report["verdict"]["disequalities_added"] = disequalities;
        report.report["verdict"]["game_oracle"] = game_oracle_eval(formula, opt.budget);
    } else {
        report.report["verdict"]["truth"] = game_oracle_eval(formula, opt.budget);
        report.report["verdict"]["method"] = "game";
    }
    report.emit(out);
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"boolean constraint language classification, solving and reductions"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--seed", opt.seed, "seed echoed into reports and used by randomized workflows");

    std::string lang_path, inst_path, target_path, relation_name, formula_text, out_path;
    std::string method = "auto", family = "auto";
    bool verify = false;
    int arity = 2;
    std::vector<std::string> reduce_paths;
    std::string gadget;

    CLI::App* classify = app.add_subcommand("classify", "classify a constraint language");
    classify->add_option("language", lang_path, "language file")->required();

    CLI::App* solve = app.add_subcommand("solve", "solve an instance");
    solve->add_option("language", lang_path, "language file")->required();
    solve->add_option("instance", inst_path, "instance file")->required();
    solve->add_option("--method", method,
                      "auto|brute|const0|const1|ac-and|ac-or|majority|minority");
    solve->add_flag("--verify", verify, "cross-check against the exhaustive oracle");

    CLI::App* qsolve = app.add_subcommand("qsolve", "decide a quantified instance");
    qsolve->add_option("language", lang_path, "language file")->required();
    qsolve->add_option("instance", inst_path, "quantified instance file")->required();
    qsolve->add_option("--method", method, "auto|pi2|brute");
    qsolve->add_option("--family", family,
                       "auto|leq1-false|leq1-true|leq2-false|leq2-true|"
                       "leq1-false+leq0-true|leq1-true+leq0-false");

    CLI::App* polys = app.add_subcommand("polymorphisms", "enumerate polymorphisms of one arity");
    polys->add_option("language", lang_path, "language file")->required();
    polys->add_option("--arity", arity, "operation arity")->required();

    CLI::App* ppmember = app.add_subcommand("ppmember", "test definability of a relation");
    ppmember->add_option("language", lang_path, "language file")->required();
    ppmember->add_option("target", target_path, "language file holding the candidate relation")
        ->required();
    ppmember->add_option("--relation", relation_name, "relation name inside the target file");

    CLI::App* reduce = app.add_subcommand("reduce", "run a reduction gadget");
    reduce->add_option("gadget", gadget,
                       "lift-constants|negation-closure|inline-csp|inline-qcsp|bounded-alt")
        ->required();
    reduce->add_option("inputs", reduce_paths, "gadget input files");
    reduce->add_option("--relation", relation_name, "relation name for relation-level gadgets");
    reduce->add_option("-o,--output", out_path, "output path")->required();

    CLI::App* eq = app.add_subcommand("eq", "decide a quantified equality formula");
    eq->add_option("formula", formula_text, "formula text, e.g. 'A w . E x . (w=x)'")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        opt.budget = budget_from_env();
        if (classify->parsed()) return cmd_classify(opt, lang_path, out);
        if (solve->parsed()) return cmd_solve(opt, lang_path, inst_path, method, verify, out);
        if (qsolve->parsed()) return cmd_qsolve(opt, lang_path, inst_path, method, family, out);
        if (polys->parsed()) return cmd_polymorphisms(opt, lang_path, arity, out);
        if (ppmember->parsed())
            return cmd_ppmember(opt, lang_path, target_path, relation_name, out);
        if (reduce->parsed())
            return cmd_reduce(opt, gadget, reduce_paths, relation_name, out_path, out);
        if (eq->parsed()) return cmd_eq(opt, formula_text, out);
        err << "error: no command given\n";
        return 1;
    } catch (const BudgetError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace polycsp
