#include "polycsp/reductions.hpp"

#include "polycsp/algebra.hpp"
#include "polycsp/oracle.hpp"
#include "polycsp/qcsp.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>

using namespace polycsp;
using namespace polycsp::testing;

namespace {

// A random definition over the language: free variables f0..f(k-1), up to two
// quantified variables, and a small constraint body, occasionally with an
// equality atom thrown in.
FewDefinition random_few_definition(Rng& rng, const ConstraintLanguage& lang, int max_free,
                                    bool allow_equalities, bool allow_forall = true) {
    FewDefinition def;
    def.target = "T";
    const int k = 1 + rng.below(max_free);
    for (int i = 0; i < k; ++i) def.free_vars.push_back("f" + std::to_string(i));
    const int m = rng.below(3); // 0..2 bound variables
    for (int i = 0; i < m; ++i) {
        const Quantifier q = (allow_forall && rng.bit()) ? Quantifier::Forall : Quantifier::Exists;
        def.bound_vars.emplace_back(q, "b" + std::to_string(i));
    }
    std::vector<std::string> pool = def.free_vars;
    for (const auto& [q, v] : def.bound_vars) {
        (void)q;
        pool.push_back(v);
    }
    std::vector<std::string> names;
    for (const auto& [name, r] : lang.relations()) {
        (void)r;
        names.push_back(name);
    }
    const int atoms = 1 + rng.below(3);
    for (int i = 0; i < atoms; ++i) {
        if (allow_equalities && rng.chance(0.2)) {
            const std::string& a = pool[static_cast<std::size_t>(rng.below(static_cast<int>(pool.size())))];
            const std::string& b = pool[static_cast<std::size_t>(rng.below(static_cast<int>(pool.size())))];
            def.body.emplace_back(EqualityAtom{a, b});
            continue;
        }
        const std::string& name = names[static_cast<std::size_t>(rng.below(static_cast<int>(names.size())))];
        Constraint c;
        c.relation = name;
        for (int j = 0; j < lang.relation(name).arity(); ++j)
            c.vars.push_back(pool[static_cast<std::size_t>(rng.below(static_cast<int>(pool.size())))]);
        def.body.emplace_back(std::move(c));
    }
    return def;
}

PpDefinition gamma3_neq_definition() {
    // The hand-written definition of the disequality relation.
    PpDefinition def;
    def.target = "NEQ";
    def.free_vars = {"y", "z"};
    def.bound_vars = {"x"};
    def.body.emplace_back(Constraint{"R03", {"x", "y", "z"}});
    def.body.emplace_back(Constraint{"R13", {"x", "y", "z"}});
    def.body.emplace_back(Constraint{"R23", {"z", "y", "x"}});
    def.body.emplace_back(Constraint{"R33", {"z", "y", "x"}});
    return def;
}

} // namespace

TEST_SUITE("reductions") {

TEST_CASE("the hand-written disequality definition evaluates correctly") {
    CHECK(eval_pp_definition(gamma3_neq_definition(), *gamma3()).same_tuples(neq2()));
}

TEST_CASE("game evaluation handles universal bound variables") {
    // T(v) with a universally quantified partner under NEQ is empty.
    FewDefinition def;
    def.target = "T";
    def.free_vars = {"v"};
    def.bound_vars = {{Quantifier::Forall, "y"}};
    def.body.emplace_back(Constraint{"NEQ", {"v", "y"}});
    CHECK(eval_few_definition(def, *lang_ptr({neq2()})).is_empty());
}

TEST_CASE("synthesis reproduces a definable relation") {
    const auto def = synthesize_pp_definition(neq2(), *gamma3());
    REQUIRE(def.has_value());
    CHECK(def->free_vars.size() == 2);
    CHECK(eval_pp_definition(*def, *gamma3()).same_tuples(neq2()));
}

TEST_CASE("the binary diagonal synthesizes to a single equality atom") {
    const auto def = synthesize_pp_definition(eq2(), *twoclause_lang());
    REQUIRE(def.has_value());
    CHECK(def->bound_vars.empty());
    REQUIRE(def->body.size() == 1);
    CHECK(std::holds_alternative<EqualityAtom>(def->body.front()));
    CHECK(eval_pp_definition(*def, *twoclause_lang()).same_tuples(eq2()));
}

TEST_CASE("synthesis refuses undefinable relations") {
    // The diagonal through zero is not definable from equality alone.
    CHECK_FALSE(synthesize_pp_definition(rel("P", 2, {"00"}), *lang_ptr({eq2()})).has_value());
}

TEST_CASE("empty targets synthesize exactly when the language can contradict itself") {
    // The 3-clause language pins opposite diagonal values, so one shared
    // variable is enough.
    const auto over_gamma3 = synthesize_pp_definition(Relation::empty("E", 2, 2), *gamma3());
    REQUIRE(over_gamma3.has_value());
    CHECK(eval_pp_definition(*over_gamma3, *gamma3()).is_empty());

    // An explicitly empty relation in the language also works.
    auto with_empty = lang_ptr({eq2(), Relation::empty("VOID", 1, 2)});
    const auto via_void = synthesize_pp_definition(Relation::empty("E", 1, 2), *with_empty);
    REQUIRE(via_void.has_value());
    CHECK(eval_pp_definition(*via_void, *with_empty).is_empty());

    // Equality alone satisfies every conjunction with a constant map.
    CHECK_FALSE(synthesize_pp_definition(Relation::empty("E", 1, 2), *lang_ptr({eq2()}))
                    .has_value());
}

TEST_CASE("definability coincides with a fixed closure") {
    Rng rng(123123);
    int successes = 0;
    for (int trial = 0; trial < 60; ++trial) {
        LanguagePtr lang = random_language(rng, 3, 3);
        const Relation r = random_relation(rng, "R", 1 + rng.below(3), 2);
        const bool fixed = pp_closure(r, *lang).same_tuples(r);
        const auto def = synthesize_pp_definition(r, *lang);
        CHECK(fixed == def.has_value());
        if (def) {
            CHECK(eval_pp_definition(*def, *lang).same_tuples(r));
            ++successes;
        }
    }
    CHECK(successes > 5);
}

TEST_CASE("inlining a definition preserves satisfiability") {
    auto derived = lang_ptr({neq2()});
    const std::map<std::string, PpDefinition> defs = {{"NEQ", gamma3_neq_definition()}};

    Rng rng(321321);
    for (int trial = 0; trial < 40; ++trial) {
        const CspInstance inst = random_instance(rng, derived, 2 + rng.below(4), 1 + rng.below(4));
        const CspInstance reduced = inline_reduce_csp(inst, defs, gamma3());
        CHECK(brute_solve(inst).has_value() == brute_solve(reduced).has_value());
    }
}

TEST_CASE("identity definitions change nothing but names") {
    auto lang = horn_lang();
    std::map<std::string, PpDefinition> identity;
    for (const auto& [name, r] : lang->relations()) {
        PpDefinition def;
        def.target = name;
        for (int j = 0; j < r.arity(); ++j) def.free_vars.push_back("v" + std::to_string(j));
        def.body.emplace_back(Constraint{name, def.free_vars});
        identity.emplace(name, std::move(def));
    }
    Rng rng(432432);
    for (int trial = 0; trial < 20; ++trial) {
        const CspInstance inst = random_instance(rng, lang, 2 + rng.below(4), 1 + rng.below(4));
        const CspInstance reduced = inline_reduce_csp(inst, identity, lang);
        CHECK(reduced.variables() == inst.variables());
        CHECK(reduced.constraints().size() == inst.constraints().size());
        CHECK(brute_solve(inst).has_value() == brute_solve(reduced).has_value());
    }
}

TEST_CASE("equality-only bodies merge variables away") {
    auto lang = lang_ptr({eq2(), c1()});
    PpDefinition eq_def;
    eq_def.target = "EQ";
    eq_def.free_vars = {"u", "v"};
    eq_def.body.emplace_back(EqualityAtom{"u", "v"});
    std::map<std::string, PpDefinition> defs = {{"EQ", eq_def}};
    // C1 also needs a definition for the mixed instance below.
    PpDefinition c1_def;
    c1_def.target = "C1";
    c1_def.free_vars = {"u"};
    c1_def.body.emplace_back(Constraint{"C1", {"u"}});
    defs.emplace("C1", c1_def);

    const CspInstance inst(lang, {"a", "b"}, {{"EQ", {"a", "b"}}});
    const CspInstance reduced = inline_reduce_csp(inst, defs, lang);
    CHECK(reduced.constraints().empty());
    CHECK(reduced.variables() == std::vector<std::string>{"a"});

    const CspInstance mixed(lang, {"a", "b"}, {{"EQ", {"a", "b"}}, {"C1", {"b"}}});
    const CspInstance merged = inline_reduce_csp(mixed, defs, lang);
    REQUIRE(merged.constraints().size() == 1);
    CHECK(merged.constraints().front().vars == std::vector<std::string>{"a"});
}

TEST_CASE("missing definitions are reported") {
    auto lang = lang_ptr({neq2()});
    const CspInstance inst(lang, {"a", "b"}, {{"NEQ", {"a", "b"}}});
    CHECK_THROWS_AS(inline_reduce_csp(inst, {}, gamma3()), ValidationError);
}

TEST_CASE("quantified inlining preserves truth on random definitions") {
    Rng rng(543543);
    int constant_false_seen = 0;
    for (int trial = 0; trial < 80; ++trial) {
        LanguagePtr base = random_language(rng, 2, 2);
        std::map<std::string, FewDefinition> defs;
        std::vector<Relation> derived_rels;
        const int n_defs = 1 + rng.below(2);
        for (int i = 0; i < n_defs; ++i) {
            FewDefinition def = random_few_definition(rng, *base, 2, true);
            def.target = "T" + std::to_string(i);
            Relation r = eval_few_definition(def, *base);
            derived_rels.push_back(r);
            defs.emplace(def.target, std::move(def));
        }
        LanguagePtr derived = lang_ptr(std::move(derived_rels));
        const QcspInstance q = random_qcsp_instance(rng, derived, 2 + rng.below(3), 1 + rng.below(3));
        const bool expected = brute_eval_qcsp(q);
        const QcspReduction reduced = inline_reduce_qcsp(q, defs, base);
        if (std::holds_alternative<ConstantFalse>(reduced)) {
            CHECK_FALSE(expected);
            ++constant_false_seen;
        } else {
            CHECK(brute_eval_qcsp(std::get<QcspInstance>(reduced)) == expected);
        }
    }
    (void)constant_false_seen;
}

TEST_CASE("an equality with a later universal variable falsifies the formula") {
    auto base = lang_ptr({c1()});
    // T(v) defined by v = b with b universal: no single value equals both
    // domain values, so the constraint T(v) is unsatisfiable under any v.
    FewDefinition def;
    def.target = "T";
    def.free_vars = {"v"};
    def.bound_vars = {{Quantifier::Forall, "b"}};
    def.body.emplace_back(EqualityAtom{"v", "b"});
    const Relation t = eval_few_definition(def, *base);
    CHECK(t.is_empty());

    auto derived = lang_ptr({t});
    const QcspInstance q = parse_qcsp_instance("vars v\nprefix E v\nconstraint T v\n", derived);
    const QcspReduction reduced = inline_reduce_qcsp(q, {{"T", def}}, base);
    CHECK(std::holds_alternative<ConstantFalse>(reduced));
    CHECK_FALSE(brute_eval_qcsp(q));
}

TEST_CASE("spreading a universal disequality definition") {
    auto lang = lang_ptr({neq2(), eq2()});
    FewDefinition def;
    def.target = "T";
    def.free_vars = {"v"};
    def.bound_vars = {{Quantifier::Forall, "y"}};
    def.body.emplace_back(Constraint{"NEQ", {"v", "y"}});

    const Relation spread = spread_express(def, *lang);
    CHECK(spread.arity() == 3);
    // NEQ(v, y1) and NEQ(v, y2).
    for (int v = 0; v < 2; ++v)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int y2 = 0; y2 < 2; ++y2)
                CHECK(spread.contains(Tuple{v, y1, y2}) == (v != y1 && v != y2));
}

TEST_CASE("quantifier-free definitions spread to a cylinder") {
    auto lang = lang_ptr({or2()});
    FewDefinition def;
    def.target = "T";
    def.free_vars = {"a", "b"};
    def.body.emplace_back(Constraint{"OR2", {"a", "b"}});
    const Relation spread = spread_express(def, *lang);
    CHECK(spread.arity() == 4);
    CHECK(spread.size() == or2().size() * 4);
}

TEST_CASE("an existential partner over a total relation spreads to everything") {
    auto lang = lang_ptr({eq2()});
    FewDefinition def;
    def.target = "T";
    def.free_vars = {"v"};
    def.bound_vars = {{Quantifier::Exists, "x"}};
    def.body.emplace_back(Constraint{"EQ", {"v", "x"}});
    const Relation spread = spread_express(def, *lang);
    CHECK(spread.is_full());
}

TEST_CASE("spread relations are monotone and expressive") {
    Rng rng(654654);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        LanguagePtr lang = random_language(rng, 2, 2);
        const FewDefinition def = random_few_definition(rng, *lang, 2, false);
        const Relation target = eval_few_definition(def, *lang);
        const Relation spread = spread_express(def, *lang);
        const int k = static_cast<int>(def.free_vars.size());
        REQUIRE(spread.arity() == k + 2);

        for (std::size_t r = 0; r < checked_power(2, k); ++r) {
            const Tuple a = tuple_from_rank(r, k, 2);
            for (int b1 = 0; b1 < 2; ++b1)
                for (int b2 = 0; b2 < 2; ++b2) {
                    Tuple wide = a;
                    wide.push_back(b1);
                    wide.push_back(b2);
                    const bool inside = spread.contains(wide);
                    // Expression: covering pairs recover the target.
                    if (b1 != b2) CHECK(inside == target.contains(a));
                    // Monotonicity: membership survives shrinking the cover.
                    if (inside)
                        for (int c1 = 0; c1 < 2; ++c1)
                            for (int c2 = 0; c2 < 2; ++c2) {
                                if (!((c1 == b1 || c1 == b2) && (c2 == b1 || c2 == b2))) continue;
                                Tuple narrowed = a;
                                narrowed.push_back(c1);
                                narrowed.push_back(c2);
                                CHECK(spread.contains(narrowed));
                            }
                }
        }
        ++checked;
    }
    CHECK(checked == 60);
}

TEST_CASE("prefix-preserving rewriting keeps the truth value") {
    Rng rng(765765);
    for (int trial = 0; trial < 50; ++trial) {
        LanguagePtr base = random_language(rng, 2, 2);
        std::map<std::string, Relation> spreads;
        std::vector<Relation> derived_rels;
        FewDefinition def = random_few_definition(rng, *base, 2, false);
        def.target = "T0";
        derived_rels.push_back(eval_few_definition(def, *base));
        spreads.emplace("T0", spread_express(def, *base));
        LanguagePtr derived = lang_ptr(std::move(derived_rels));

        const QcspInstance q =
            random_pi2_instance(rng, derived, 1 + rng.below(3), 1 + rng.below(3), 1 + rng.below(3));
        const QcspInstance wide = bounded_alt_reduce(q, spreads);
        CHECK(classify_prefix(prefix_pattern(wide)) == classify_prefix(prefix_pattern(q)));
        CHECK(brute_eval_qcsp(wide) == brute_eval_qcsp(q));
    }
}

TEST_CASE("rewriting a constraint-free formula extends the prefix only") {
    auto lang = lang_ptr({neq2()});
    const QcspInstance q = parse_qcsp_instance("vars y x\nprefix A y E x\n", lang);
    const QcspInstance wide = bounded_alt_reduce(q, {});
    CHECK(wide.base().variables().size() == 4);
    CHECK(classify_prefix(prefix_pattern(wide)) == PrefixClass{Quantifier::Forall, 2});
    CHECK(brute_eval_qcsp(wide));
}

TEST_CASE("rewriting inserts the fresh universals into leading-exists prefixes") {
    Rng rng(868686);
    for (int trial = 0; trial < 25; ++trial) {
        LanguagePtr base = random_language(rng, 2, 2);
        FewDefinition def = random_few_definition(rng, *base, 2, false);
        def.target = "T0";
        LanguagePtr derived = lang_ptr({eval_few_definition(def, *base)});
        std::map<std::string, Relation> spreads;
        spreads.emplace("T0", spread_express(def, *base));

        // A three-block prefix: exists, forall, exists.
        std::vector<std::string> vars = {"e1", "u1", "u2", "e2"};
        std::vector<Constraint> constraints;
        const Relation& t = derived->relation("T0");
        for (int c = 0; c < 2; ++c) {
            Constraint ct;
            ct.relation = "T0";
            for (int j = 0; j < t.arity(); ++j) ct.vars.push_back(vars[static_cast<std::size_t>(rng.below(4))]);
            constraints.push_back(std::move(ct));
        }
        CspInstance inner(derived, vars, std::move(constraints));
        const QcspInstance q(std::move(inner), {{Quantifier::Exists, "e1"},
                                                {Quantifier::Forall, "u1"},
                                                {Quantifier::Forall, "u2"},
                                                {Quantifier::Exists, "e2"}});
        const QcspInstance wide = bounded_alt_reduce(q, spreads);
        CHECK(classify_prefix(prefix_pattern(wide)) == PrefixClass{Quantifier::Exists, 3});
        // The fresh universals sit in the second block.
        CHECK(wide.prefix()[0].first == Quantifier::Exists);
        CHECK(wide.prefix()[1].first == Quantifier::Forall);
        CHECK(brute_eval_qcsp(wide) == brute_eval_qcsp(q));
    }
}

TEST_CASE("definitions must not reuse variable names") {
    auto lang = lang_ptr({eq2()});
    FewDefinition def;
    def.target = "T";
    def.free_vars = {"v"};
    def.bound_vars = {{Quantifier::Exists, "v"}};
    def.body.emplace_back(Constraint{"EQ", {"v", "v"}});
    CHECK_THROWS_AS(eval_few_definition(def, *lang), ValidationError);
    CHECK_THROWS_AS(spread_express(def, *lang), ValidationError);
}

TEST_CASE("rewriting rejects prefixes with an innermost universal") {
    auto lang = lang_ptr({neq2()});
    const QcspInstance sigma2 =
        parse_qcsp_instance("vars x y\nprefix E x A y\nconstraint NEQ x y\n", lang);
    CHECK_THROWS_AS(bounded_alt_reduce(sigma2, {}), PreconditionError);
}

TEST_CASE("lifting adds the two constant tuples") {
    const Relation lifted = lift_with_constants(rel("R", 2, {"01"}));
    CHECK(lifted.arity() == 3);
    CHECK(lifted.size() == 4);
    for (const char* row : {"010", "011", "000", "111"})
        CHECK(lifted.contains(digits(row)));

    const Relation from_empty = lift_with_constants(Relation::empty("E", 2, 2));
    CHECK(from_empty.size() == 2);
    CHECK(from_empty.contains(digits("000")));
    CHECK(from_empty.contains(digits("111")));
}

TEST_CASE("lifted relations keep both constant polymorphisms") {
    Rng rng(876876);
    for (int trial = 0; trial < 40; ++trial) {
        const Relation r = random_relation(rng, "R", 1 + rng.below(3), 4, true);
        const Relation lifted = lift_with_constants(r);
        CHECK(is_polymorphism(ops::constant(0), lifted));
        CHECK(is_polymorphism(ops::constant(1), lifted));
        // Universally quantifying the appended coordinate recovers the input.
        for (std::size_t p = 0; p < checked_power(2, r.arity()); ++p) {
            Tuple t = tuple_from_rank(p, r.arity(), 2);
            Tuple t0 = t;
            t0.push_back(0);
            Tuple t1 = t;
            t1.push_back(1);
            CHECK(r.contains(t) == (lifted.contains(t0) && lifted.contains(t1)));
        }
    }
}

TEST_CASE("lifting an instance preserves its truth value") {
    Rng rng(987987);
    for (int trial = 0; trial < 50; ++trial) {
        LanguagePtr lang = random_language(rng, 2, 2);
        const QcspInstance q = random_qcsp_instance(rng, lang, 2 + rng.below(4), 1 + rng.below(4));
        const QcspInstance lifted = lift_with_constants_instance(q);
        CHECK(brute_eval_qcsp(lifted) == brute_eval_qcsp(q));
    }
}

TEST_CASE("the negation closure flips and tags") {
    const Relation closed = negation_closure(rel("R", 2, {"01"}));
    CHECK(closed.size() == 2);
    CHECK(closed.contains(digits("001")));
    CHECK(closed.contains(digits("110")));
    CHECK(is_polymorphism(ops::negation(), closed));

    Rng rng(111222);
    for (int trial = 0; trial < 30; ++trial) {
        const Relation r = random_relation(rng, "R", 1 + rng.below(3), 4, true);
        CHECK(is_polymorphism(ops::negation(), negation_closure(r)));
    }
}

TEST_CASE("the pivot transform preserves satisfiability") {
    Rng rng(333444);
    for (int trial = 0; trial < 50; ++trial) {
        LanguagePtr lang = random_language(rng, 2, 2);
        const CspInstance inst = random_instance(rng, lang, 2 + rng.below(4), 1 + rng.below(4));
        const CspInstance pivoted = negation_closure_instance(inst);
        CHECK(brute_solve(pivoted).has_value() == brute_solve(inst).has_value());
    }
}

TEST_CASE("the quantified pivot transform works under either quantifier") {
    Rng rng(555666);
    for (int trial = 0; trial < 40; ++trial) {
        LanguagePtr lang = random_language(rng, 2, 2);
        const QcspInstance q = random_qcsp_instance(rng, lang, 2 + rng.below(3), 1 + rng.below(4));
        const bool expected = brute_eval_qcsp(q);
        CHECK(brute_eval_qcsp(negation_closure_instance(q, Quantifier::Exists)) == expected);
        CHECK(brute_eval_qcsp(negation_closure_instance(q, Quantifier::Forall)) == expected);
    }
}

} // TEST_SUITE
