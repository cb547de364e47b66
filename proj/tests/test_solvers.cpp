#include "polycsp/solvers.hpp"

#include "polycsp/algebra.hpp"
#include "polycsp/oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>

using namespace polycsp;
using namespace polycsp::testing;

namespace {

// All satisfying assignments by enumeration, as value vectors in variable order.
std::vector<Tuple> solution_set(const CspInstance& inst) {
    std::vector<Tuple> out;
    const int n = static_cast<int>(inst.variables().size());
    for (std::size_t r = 0; r < checked_power(2, n); ++r) {
        const Tuple values = tuple_from_rank(r, n, 2);
        Assignment a;
        for (int i = 0; i < n; ++i) a[inst.variables()[static_cast<std::size_t>(i)]] = values[static_cast<std::size_t>(i)];
        if (satisfies_all(inst, a)) out.push_back(values);
    }
    return out;
}

std::vector<Tuple> solution_set(const TightenedInstance& t) {
    std::vector<Tuple> out;
    const int n = static_cast<int>(t.variables.size());
    for (std::size_t r = 0; r < checked_power(2, n); ++r) {
        const Tuple values = tuple_from_rank(r, n, 2);
        std::map<std::string, int> a;
        for (int i = 0; i < n; ++i) a[t.variables[static_cast<std::size_t>(i)]] = values[static_cast<std::size_t>(i)];
        bool ok = true;
        for (const TightenedConstraint& tc : t.constraints) {
            Tuple point;
            for (const std::string& v : tc.vars) point.push_back(a.at(v));
            if (!tc.relation.contains(point)) ok = false;
        }
        if (ok) out.push_back(values);
    }
    return out;
}

LanguagePtr neq_lang() { return lang_ptr({neq2()}); }

} // namespace

TEST_SUITE("solvers") {

TEST_CASE("constant solver demands non-empty relations only") {
    auto lang = lang_ptr({rel("A", 2, {"11", "01"}), rel("B", 1, {"1"})});
    const CspInstance inst(lang, {"x", "y"}, {{"A", {"x", "y"}}, {"B", {"y"}}});
    const auto solution = solve_constant(inst, 1);
    REQUIRE(solution.has_value());
    CHECK(solution->at("x") == 1);
    CHECK(solution->at("y") == 1);
    CHECK(satisfies_all(inst, *solution));

    auto with_empty = lang_ptr({rel("A", 1, {"1", "0"}), Relation::empty("E", 1, 2)});
    const CspInstance dead(with_empty, {"x"}, {{"E", {"x"}}});
    CHECK_FALSE(solve_constant(dead, 1).has_value());

    const CspInstance unconstrained(lang, {"x", "y"}, {});
    const auto all1 = solve_constant(unconstrained, 1);
    REQUIRE(all1.has_value());
    CHECK(all1->at("x") == 1);
}

TEST_CASE("constant solver checks its entry condition") {
    const CspInstance inst(lang_ptr({c0()}), {"x"}, {{"C0", {"x"}}});
    CHECK_THROWS_AS(solve_constant(inst, 1), PreconditionError);
    CHECK(solve_constant(inst, 0).has_value());
}

TEST_CASE("arc consistency forces implications to a fixpoint") {
    auto lang = lang_ptr({imp(), c1()});
    const CspInstance inst(lang, {"x", "y"},
                           {{"IMP", {"x", "y"}}, {"IMP", {"y", "x"}}, {"C1", {"x"}}});
    const auto solution = arc_consistency_solve(inst, ops::conjunction());
    REQUIRE(solution.has_value());
    CHECK(solution->at("x") == 1);
    CHECK(solution->at("y") == 1);
}

TEST_CASE("contradictory units are unsatisfiable") {
    auto lang = lang_ptr({c0(), c1()});
    const CspInstance inst(lang, {"x"}, {{"C0", {"x"}}, {"C1", {"x"}}});
    CHECK_FALSE(arc_consistency_solve(inst, ops::conjunction()).has_value());
}

TEST_CASE("unconstrained variables default to the absorbing value") {
    auto lang = lang_ptr({imp(), c0(), c1()});
    const CspInstance inst(lang, {"v", "w"}, {{"C1", {"w"}}});
    const auto under_and = arc_consistency_solve(inst, ops::conjunction());
    REQUIRE(under_and.has_value());
    CHECK(under_and->at("v") == 0);
    CHECK(under_and->at("w") == 1);
}

TEST_CASE("the or solver mirrors the and solver") {
    // Dual Horn: at most one negative literal per clause.
    auto lang = lang_ptr({rel("PMI", 2, {"00", "10", "11"}), c0(), c1()});
    const CspInstance inst(lang, {"x", "y", "w"}, {{"PMI", {"x", "y"}}, {"C0", {"x"}}});
    REQUIRE(is_polymorphism(ops::disjunction(), *lang));
    const auto solution = arc_consistency_solve(inst, ops::disjunction());
    REQUIRE(solution.has_value());
    CHECK(satisfies_all(inst, *solution));
    CHECK(solution->at("x") == 0);
    CHECK(solution->at("y") == 0); // forced through the implication
    CHECK(solution->at("w") == 1); // unconstrained variable defaults to 1 under or
}

TEST_CASE("arc consistency rejects a non-qualifying operation") {
    const CspInstance inst(lang_ptr({or2()}), {"x", "y"}, {{"OR2", {"x", "y"}}});
    CHECK_THROWS_AS(arc_consistency_solve(inst, ops::conjunction()), PreconditionError);
    CHECK_THROWS_AS(arc_consistency_solve(inst, ops::majority()), PreconditionError);
}

TEST_CASE("tightening preserves the solution set") {
    Rng rng(60601);
    for (int trial = 0; trial < 80; ++trial) {
        LanguagePtr lang = random_closed_language(rng, ops::conjunction(), 3, 3);
        const CspInstance inst = random_instance(rng, lang, 2 + rng.below(5), 1 + rng.below(6));
        const auto tightened = arc_consistency_tighten(inst);
        if (!tightened) {
            CHECK(solution_set(inst).empty());
            continue;
        }
        CHECK(solution_set(inst) == solution_set(*tightened));
        // Replaced relations are subsets of the originals.
        for (std::size_t i = 0; i < tightened->constraints.size(); ++i) {
            const Relation& original = inst.language().relation(inst.constraints()[i].relation);
            for (const Tuple& t : tightened->constraints[i].relation.tuples())
                CHECK(original.contains(t));
        }
    }
}

TEST_CASE("the fixpoint does not depend on constraint order") {
    Rng rng(60602);
    for (int trial = 0; trial < 40; ++trial) {
        LanguagePtr lang = random_closed_language(rng, ops::conjunction(), 3, 3);
        CspInstance inst = random_instance(rng, lang, 2 + rng.below(4), 2 + rng.below(5));
        std::vector<Constraint> shuffled = inst.constraints();
        std::shuffle(shuffled.begin(), shuffled.end(), rng.engine);
        const CspInstance permuted(lang, inst.variables(), shuffled);

        const auto a = arc_consistency_solve(inst, ops::conjunction());
        const auto b = arc_consistency_solve(permuted, ops::conjunction());
        CHECK(a.has_value() == b.has_value());
        if (a && b) CHECK(*a == *b);
    }
}

TEST_CASE("the quantified 2-clause matrix is satisfiable as a plain instance") {
    CspInstance inst(twoclause_lang(), {"v", "t", "u", "w"},
                     {{"IMP", {"u", "v"}},
                      {"NAND", {"u", "v"}},
                      {"IMP", {"v", "w"}},
                      {"IMP", {"w", "t"}},
                      {"IMP", {"t", "v"}}});
    const auto solution = majority_solve(inst);
    REQUIRE(solution.has_value());
    CHECK(satisfies_all(inst, *solution));
}

TEST_CASE("an odd disequality cycle is unsatisfiable") {
    const CspInstance inst(neq_lang(), {"x", "y", "z"},
                           {{"NEQ", {"x", "y"}}, {"NEQ", {"y", "z"}}, {"NEQ", {"x", "z"}}});
    REQUIRE(is_polymorphism(ops::majority(), *neq_lang()));
    CHECK_FALSE(majority_solve(inst).has_value());
}

TEST_CASE("a single disequality extends lexicographically") {
    const CspInstance inst(neq_lang(), {"x", "y"}, {{"NEQ", {"x", "y"}}});
    const auto solution = majority_solve(inst);
    REQUIRE(solution.has_value());
    CHECK(solution->at("x") == 0);
    CHECK(solution->at("y") == 1);
}

TEST_CASE("majority tightening preserves the polymorphisms of replaced tables") {
    Rng rng(60603);
    for (int trial = 0; trial < 40; ++trial) {
        LanguagePtr lang = random_closed_language(rng, ops::majority(), 3, 3);
        const CspInstance inst = random_instance(rng, lang, 3 + rng.below(4), 1 + rng.below(5));
        const MajorityTightening result = majority_tighten(inst);
        if (!result.satisfiable) continue;
        for (const TightenedConstraint& tc : result.instance.constraints)
            CHECK(is_polymorphism(ops::majority(), tc.relation));
        for (const auto& [vars, table] : result.subset_tables) {
            (void)vars;
            CHECK(is_polymorphism(ops::majority(), table));
        }
    }
}

TEST_CASE("majority solving agrees with exhaustive search") {
    Rng rng(60604);
    for (int trial = 0; trial < 120; ++trial) {
        LanguagePtr lang = random_closed_language(rng, ops::majority(), 3, 3);
        const CspInstance inst = random_instance(rng, lang, 1 + rng.below(8), 1 + rng.below(8));
        const auto fast = majority_solve(inst);
        const auto slow = brute_solve(inst);
        CHECK(fast.has_value() == slow.has_value());
        if (fast) CHECK(satisfies_all(inst, *fast));
    }
}

TEST_CASE("majority solving checks its entry condition") {
    const CspInstance inst(gamma3(), {"x", "y", "z"}, {{"R03", {"x", "y", "z"}}});
    CHECK_THROWS_AS(majority_solve(inst), PreconditionError);
}

TEST_CASE("linear rewriting of the classic binary relations") {
    const auto eq_system = minority_to_equations(eq2(), {"a", "b"});
    REQUIRE(eq_system.size() == 1);
    CHECK(eq_system[0].vars == std::vector<std::string>{"a", "b"});
    CHECK(eq_system[0].rhs == 0);

    const auto neq_system = minority_to_equations(neq2(), {"a", "b"});
    REQUIRE(neq_system.size() == 1);
    CHECK(neq_system[0].vars == std::vector<std::string>{"a", "b"});
    CHECK(neq_system[0].rhs == 1);

    const auto parity = minority_to_equations(xor3_odd(), {"x", "y", "z"});
    REQUIRE(parity.size() == 1);
    CHECK(parity[0].vars == std::vector<std::string>{"x", "y", "z"});
    CHECK(parity[0].rhs == 1);

    const auto impossible = minority_to_equations(Relation::empty("E", 2, 2), {"a", "b"});
    REQUIRE(impossible.size() == 1);
    CHECK(impossible[0].vars.empty());
    CHECK(impossible[0].rhs == 1);

    CHECK_THROWS_AS(minority_to_equations(or2(), {"a", "b"}), PreconditionError);
}

TEST_CASE("parity relations are preserved by minority") {
    CHECK(is_polymorphism(ops::minority(), xor3_odd()));
    CHECK(is_polymorphism(ops::minority(), eq2()));
    CHECK(is_polymorphism(ops::minority(), neq2()));
}

TEST_CASE("rewriting is exact for every minority-closed relation up to arity 3") {
    for (int arity = 1; arity <= 3; ++arity) {
        const int total = 1 << (1 << arity);
        for (int mask = 0; mask < total; ++mask) {
            std::vector<Tuple> tuples;
            for (int t = 0; t < (1 << arity); ++t)
                if ((mask >> t) & 1) tuples.push_back(tuple_from_rank(static_cast<std::size_t>(t), arity, 2));
            const Relation r("R", arity, 2, std::move(tuples));
            if (!is_polymorphism(ops::minority(), r)) continue;
            const auto system = minority_to_equations(r, var_names(arity));
            // The solution set of the system must equal the relation.
            for (int t = 0; t < (1 << arity); ++t) {
                const Tuple point = tuple_from_rank(static_cast<std::size_t>(t), arity, 2);
                bool satisfied = true;
                for (const LinearEquation& eq : system) {
                    int sum = eq.rhs;
                    for (const std::string& v : eq.vars) {
                        const int idx = std::stoi(v.substr(1));
                        sum ^= point[static_cast<std::size_t>(idx)];
                    }
                    if (sum != 0) satisfied = false;
                }
                CHECK(satisfied == r.contains(point));
            }
        }
    }
}

TEST_CASE("elimination solves, detects contradictions, defaults free variables") {
    const std::vector<std::string> vars = {"x", "y", "z"};
    const auto solved = gaussian_solve({make_equation({"x", "y"}, 1), make_equation({"y", "z"}, 1),
                                        make_equation({"x", "z"}, 0)},
                                       vars);
    REQUIRE(solved.has_value());
    CHECK(solved->at("x") == 0);
    CHECK(solved->at("y") == 1);
    CHECK(solved->at("z") == 0);

    CHECK_FALSE(
        gaussian_solve({make_equation({"x", "y"}, 1), make_equation({"x", "y"}, 0)}, {"x", "y"})
            .has_value());

    const auto free = gaussian_solve({}, {"x"});
    REQUIRE(free.has_value());
    CHECK(free->at("x") == 0);
}

TEST_CASE("equation normalization cancels repeated variables") {
    const LinearEquation eq = make_equation({"x", "y", "x"}, 1);
    CHECK(eq.vars == std::vector<std::string>{"y"});
    CHECK(eq.rhs == 1);
}

TEST_CASE("minority solving on the worked examples") {
    auto lang = lang_ptr({eq2(), neq2()});
    const CspInstance chain(lang, {"x", "y", "z"},
                            {{"EQ", {"x", "y"}}, {"NEQ", {"y", "z"}}});
    const auto solution = minority_solve(chain);
    REQUIRE(solution.has_value());
    CHECK(solution->at("x") == 0);
    CHECK(solution->at("y") == 0);
    CHECK(solution->at("z") == 1);
    CHECK(satisfies_all(chain, *solution));

    const CspInstance self(lang, {"x"}, {{"NEQ", {"x", "x"}}});
    CHECK_FALSE(minority_solve(self).has_value());

    const CspInstance nothing(lang, {"x", "y"}, {});
    const auto zeros = minority_solve(nothing);
    REQUIRE(zeros.has_value());
    CHECK(zeros->at("x") == 0);
    CHECK(zeros->at("y") == 0);
}

TEST_CASE("minority solving agrees with exhaustive search") {
    Rng rng(60605);
    for (int trial = 0; trial < 120; ++trial) {
        LanguagePtr lang = random_closed_language(rng, ops::minority(), 3, 3);
        const CspInstance inst = random_instance(rng, lang, 1 + rng.below(8), 1 + rng.below(8));
        const auto fast = minority_solve(inst);
        const auto slow = brute_solve(inst);
        CHECK(fast.has_value() == slow.has_value());
        if (fast) CHECK(satisfies_all(inst, *fast));
    }
}

TEST_CASE("dispatch routes by the first preserved operation") {
    const CspInstance horn(horn_lang(), {"x", "y"}, {{"IMP", {"x", "y"}}, {"C1", {"x"}}});
    CHECK(dispatch_solve(horn).method == "ac-and");

    const CspInstance two(twoclause_lang(), {"x", "y"}, {{"OR2", {"x", "y"}}});
    CHECK(dispatch_solve(two).method == "majority");

    const CspInstance affine(affine_lang(), {"x", "y", "z"}, {{"XOR3ODD", {"x", "y", "z"}}});
    CHECK(dispatch_solve(affine).method == "minority");

    const CspInstance hard(gamma3(), {"x", "y", "z"}, {{"R03", {"x", "y", "z"}}});
    CHECK_THROWS_AS(dispatch_solve(hard), PreconditionError);
}

TEST_CASE("dispatch verdicts match exhaustive search per witness class") {
    Rng rng(60606);
    const std::vector<Operation> closers = {ops::constant(0), ops::constant(1),
                                            ops::conjunction(), ops::disjunction(),
                                            ops::majority(),    ops::minority()};
    for (const Operation& closer : closers) {
        for (int trial = 0; trial < 40; ++trial) {
            LanguagePtr lang = random_closed_language(rng, closer, 3, 3);
            const CspInstance inst = random_instance(rng, lang, 1 + rng.below(7), 1 + rng.below(7));
            const DispatchResult fast = dispatch_solve(inst);
            CHECK(fast.satisfiable == brute_solve(inst).has_value());
            if (fast.assignment) CHECK(satisfies_all(inst, *fast.assignment));
        }
    }
}

} // TEST_SUITE
