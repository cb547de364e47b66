#include "polycsp/solvers.hpp"

#include "polycsp/algebra.hpp"
#include "polycsp/oracle.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>

namespace polycsp {

LinearEquation make_equation(std::vector<std::string> vars, int rhs) {
    std::map<std::string, int> parity;
    for (std::string& v : vars) parity[std::move(v)] ^= 1;
    LinearEquation eq;
    for (const auto& [name, p] : parity)
        if (p) eq.vars.push_back(name);
    eq.rhs = rhs & 1;
    return eq;
}

// --- constant ----------------------------------------------------------------

std::optional<Assignment> solve_constant(const CspInstance& inst, int value) {
    const ConstraintLanguage& lang = inst.language();
    if (value < 0 || value >= lang.domain_size()) throw ValidationError("value out of domain");
    if (!is_polymorphism(ops::constant(value, lang.domain_size()), lang))
        throw PreconditionError("the constant " + std::to_string(value) +
                                " operation is not a polymorphism of the language");
    for (const Constraint& c : inst.constraints())
        if (lang.relation(c.relation).is_empty()) return std::nullopt;
    Assignment a;
    for (const std::string& v : inst.variables()) a[v] = value;
    return a;
}

// --- arc consistency ------------------------------------------------------------

namespace {

using DomainMask = unsigned;

DomainMask full_mask(int d) { return (DomainMask{1} << d) - 1; }

} // namespace

std::optional<TightenedInstance> arc_consistency_tighten(const CspInstance& inst) {
    const ConstraintLanguage& lang = inst.language();
    const int d = lang.domain_size();
    if (d > 16) throw BudgetError("arc consistency supports domain sizes up to 16");

    std::map<std::string, std::size_t> var_index;
    for (std::size_t i = 0; i < inst.variables().size(); ++i) var_index[inst.variables()[i]] = i;

    struct Work {
        std::vector<std::size_t> vars;
        std::vector<Tuple> tuples;
    };
    std::vector<Work> work;
    work.reserve(inst.constraints().size());
    for (const Constraint& c : inst.constraints()) {
        Work w;
        for (const std::string& v : c.vars) w.vars.push_back(var_index.at(v));
        w.tuples = lang.relation(c.relation).tuples();
        work.push_back(std::move(w));
    }

    std::vector<DomainMask> domain(inst.variables().size(), full_mask(d));
    bool changed = true;
    while (changed) {
        changed = false;
        // Step 1: intersect every variable domain with every projection.
        std::vector<DomainMask> next(domain.size(), full_mask(d));
        for (const Work& w : work) {
            std::vector<DomainMask> projection(w.vars.size(), 0);
            for (const Tuple& t : w.tuples)
                for (std::size_t pos = 0; pos < t.size(); ++pos)
                    projection[pos] |= DomainMask{1} << t[pos];
            for (std::size_t pos = 0; pos < w.vars.size(); ++pos) next[w.vars[pos]] &= projection[pos];
        }
        domain = next;
        // Step 2: cut each relation down to the surviving domains.
        for (Work& w : work) {
            auto dead = [&](const Tuple& t) {
                for (std::size_t pos = 0; pos < t.size(); ++pos)
                    if (!(domain[w.vars[pos]] >> t[pos] & 1)) return true;
                return false;
            };
            const std::size_t before = w.tuples.size();
            w.tuples.erase(std::remove_if(w.tuples.begin(), w.tuples.end(), dead), w.tuples.end());
            if (w.tuples.size() != before) changed = true;
            if (w.tuples.empty()) return std::nullopt;
        }
    }

    TightenedInstance out;
    out.variables = inst.variables();
    for (std::size_t i = 0; i < work.size(); ++i) {
        const Constraint& c = inst.constraints()[i];
        const Relation& original = lang.relation(c.relation);
        out.constraints.push_back(
            {c.vars, Relation(original.name(), original.arity(), d, std::move(work[i].tuples))});
    }
    return out;
}

std::optional<Assignment> arc_consistency_solve(const CspInstance& inst,
                                                const Operation& semilattice) {
    const bool is_and = semilattice == ops::conjunction();
    const bool is_or = semilattice == ops::disjunction();
    if (!is_and && !is_or)
        throw PreconditionError("arc consistency solving expects the boolean and or or operation");
    if (inst.language().domain_size() != 2)
        throw PreconditionError("boolean semilattice solving needs domain size 2");
    if (!is_polymorphism(semilattice, inst.language()))
        throw PreconditionError(std::string("the ") + (is_and ? "and" : "or") +
                                " operation is not a polymorphism of the language");

    auto tightened = arc_consistency_tighten(inst);
    if (!tightened) return std::nullopt;

    // Final domains, recomputed from the fixpoint tables.
    std::map<std::string, DomainMask> domain;
    for (const std::string& v : inst.variables()) domain[v] = full_mask(2);
    for (const TightenedConstraint& tc : tightened->constraints) {
        std::vector<DomainMask> projection(tc.vars.size(), 0);
        for (const Tuple& t : tc.relation.tuples())
            for (std::size_t pos = 0; pos < t.size(); ++pos) projection[pos] |= DomainMask{1} << t[pos];
        for (std::size_t pos = 0; pos < tc.vars.size(); ++pos) domain[tc.vars[pos]] &= projection[pos];
    }

    Assignment a;
    for (const std::string& v : inst.variables()) {
        const DomainMask m = domain.at(v);
        if (is_and)
            a[v] = (m == 0b10) ? 1 : 0; // 0 unless the domain collapsed to {1}
        else
            a[v] = (m == 0b01) ? 0 : 1;
    }
    return a;
}

// --- majority ---------------------------------------------------------------------

namespace {

using VarMask = std::uint64_t;

// Packed working state for the consistency phase. Variables are indices into
// the instance's declared order; tuples of original constraints are packed
// into one bit per position.
struct MajorityState {
    int n = 0;
    struct Orig {
        std::vector<int> vars;
        VarMask var_mask = 0;
        std::vector<std::uint32_t> tuples;
        int arity = 0;
    };
    std::vector<Orig> originals;
    // Subset tables keyed by ascending variable indices, value bit = rank of
    // the value tuple in key order. Absent keys mean the full table.
    std::map<std::vector<int>, std::uint8_t> tables;

    static std::uint8_t full_table(int size) {
        return static_cast<std::uint8_t>((1u << (1u << size)) - 1);
    }

    std::uint8_t table_of(const std::vector<int>& key) const {
        auto it = tables.find(key);
        return it == tables.end() ? full_table(static_cast<int>(key.size())) : it->second;
    }

    // True iff the values fixed in `fixed` (indexed by variable, -1 when
    // unset) admit a witnessing tuple in every constraint that overlaps them.
    bool admits(const std::vector<int>& fixed, VarMask fixed_mask) const {
        for (const Orig& o : originals) {
            if (!(o.var_mask & fixed_mask)) {
                if (o.tuples.empty()) return false;
                continue;
            }
            bool witnessed = false;
            for (std::uint32_t packed : o.tuples) {
                bool agrees = true;
                for (int pos = 0; pos < o.arity && agrees; ++pos) {
                    const int want = fixed[static_cast<std::size_t>(o.vars[static_cast<std::size_t>(pos)])];
                    if (want >= 0 && ((packed >> pos) & 1u) != static_cast<std::uint32_t>(want))
                        agrees = false;
                }
                if (agrees) {
                    witnessed = true;
                    break;
                }
            }
            if (!witnessed) return false;
        }
        for (const auto& [key, mask] : tables) {
            VarMask key_mask = 0;
            for (int v : key) key_mask |= VarMask{1} << v;
            if (!(key_mask & fixed_mask)) {
                if (mask == 0) return false;
                continue;
            }
            bool witnessed = false;
            const int size = static_cast<int>(key.size());
            for (int rank = 0; rank < (1 << size) && !witnessed; ++rank) {
                if (!((mask >> rank) & 1)) continue;
                bool agrees = true;
                for (int pos = 0; pos < size && agrees; ++pos) {
                    const int value = (rank >> (size - 1 - pos)) & 1;
                    const int want = fixed[static_cast<std::size_t>(key[static_cast<std::size_t>(pos)])];
                    if (want >= 0 && value != want) agrees = false;
                }
                if (agrees) witnessed = true;
            }
            if (!witnessed) return false;
        }
        return true;
    }
};

// Enumerates all variable subsets of size 1..3 in ascending order.
template <typename Visit>
void for_each_subset(int n, Visit&& visit) {
    std::vector<int> key;
    for (int a = 0; a < n; ++a) {
        key = {a};
        visit(key);
        for (int b = a + 1; b < n; ++b) {
            key = {a, b};
            visit(key);
            for (int c = b + 1; c < n; ++c) {
                key = {a, b, c};
                visit(key);
            }
        }
    }
}

// One consistency pass; returns false when some table emptied.
bool majority_sweep(MajorityState& state, bool& changed) {
    std::vector<int> fixed(static_cast<std::size_t>(state.n), -1);

    // Original constraints of arity <= 3 are replaced by their realizable
    // partial-solution tuples.
    for (MajorityState::Orig& o : state.originals) {
        if (o.arity > 3) continue;
        std::vector<std::uint32_t> survivors;
        for (std::uint32_t packed : o.tuples) {
            VarMask mask = 0;
            bool consistent = true;
            for (int pos = 0; pos < o.arity && consistent; ++pos) {
                const int var = o.vars[static_cast<std::size_t>(pos)];
                const int value = static_cast<int>((packed >> pos) & 1u);
                if (fixed[static_cast<std::size_t>(var)] == -1) {
                    fixed[static_cast<std::size_t>(var)] = value;
                    mask |= VarMask{1} << var;
                } else if (fixed[static_cast<std::size_t>(var)] != value) {
                    consistent = false; // repeated variable with two values
                }
            }
            const bool keep = consistent && state.admits(fixed, mask);
            for (int pos = 0; pos < o.arity; ++pos) fixed[static_cast<std::size_t>(o.vars[static_cast<std::size_t>(pos)])] = -1;
            if (keep) survivors.push_back(packed);
        }
        if (survivors.size() != o.tuples.size()) {
            o.tuples = std::move(survivors);
            changed = true;
            if (o.tuples.empty()) return false;
        }
    }

    // Every variable subset of size <= 3 carries an implicit constraint that
    // started as the full table.
    bool emptied = false;
    for_each_subset(state.n, [&](const std::vector<int>& key) {
        if (emptied) return;
        const int size = static_cast<int>(key.size());
        const std::uint8_t current = state.table_of(key);
        std::uint8_t survivors = 0;
        VarMask mask = 0;
        for (int v : key) mask |= VarMask{1} << v;
        for (int rank = 0; rank < (1 << size); ++rank) {
            if (!((current >> rank) & 1)) continue;
            for (int pos = 0; pos < size; ++pos)
                fixed[static_cast<std::size_t>(key[static_cast<std::size_t>(pos)])] = (rank >> (size - 1 - pos)) & 1;
            if (state.admits(fixed, mask)) survivors |= static_cast<std::uint8_t>(1u << rank);
            for (int v : key) fixed[static_cast<std::size_t>(v)] = -1;
        }
        if (survivors != current) {
            state.tables[key] = survivors;
            changed = true;
            if (survivors == 0) emptied = true;
        }
    });
    return !emptied;
}

MajorityState build_majority_state(const CspInstance& inst) {
    if (inst.variables().size() > 64)
        throw BudgetError("majority solving supports up to 64 variables");
    MajorityState state;
    state.n = static_cast<int>(inst.variables().size());
    std::map<std::string, int> var_index;
    for (int i = 0; i < state.n; ++i) var_index[inst.variables()[static_cast<std::size_t>(i)]] = i;
    for (const Constraint& c : inst.constraints()) {
        MajorityState::Orig o;
        o.arity = static_cast<int>(c.vars.size());
        if (o.arity > 30) throw BudgetError("constraint arity too large for packed tuples");
        for (const std::string& v : c.vars) {
            const int idx = var_index.at(v);
            o.vars.push_back(idx);
            o.var_mask |= VarMask{1} << idx;
        }
        for (const Tuple& t : inst.language().relation(c.relation).tuples()) {
            std::uint32_t packed = 0;
            for (std::size_t pos = 0; pos < t.size(); ++pos)
                packed |= static_cast<std::uint32_t>(t[pos]) << pos;
            o.tuples.push_back(packed);
        }
        state.originals.push_back(std::move(o));
    }
    return state;
}

Relation unpack_subset_table(const std::vector<std::string>& names, std::uint8_t mask,
                             const std::string& name) {
    const int size = static_cast<int>(names.size());
    std::vector<Tuple> tuples;
    for (int rank = 0; rank < (1 << size); ++rank)
        if ((mask >> rank) & 1) tuples.push_back(tuple_from_rank(static_cast<std::size_t>(rank), size, 2));
    return Relation(name, size, 2, std::move(tuples));
}

void require_majority_polymorphism(const CspInstance& inst) {
    if (inst.language().domain_size() != 2)
        throw PreconditionError("majority solving needs domain size 2");
    if (!is_polymorphism(ops::majority(), inst.language()))
        throw PreconditionError("the majority operation is not a polymorphism of the language");
}

} // namespace

MajorityTightening majority_tighten(const CspInstance& inst) {
    require_majority_polymorphism(inst);
    MajorityState state = build_majority_state(inst);

    bool satisfiable = true;
    bool changed = true;
    while (changed && satisfiable) {
        changed = false;
        satisfiable = majority_sweep(state, changed);
    }

    MajorityTightening out;
    out.satisfiable = satisfiable;
    out.instance.variables = inst.variables();
    for (std::size_t i = 0; i < state.originals.size(); ++i) {
        const Constraint& c = inst.constraints()[i];
        const MajorityState::Orig& o = state.originals[i];
        std::vector<Tuple> tuples;
        for (std::uint32_t packed : o.tuples) {
            Tuple t(static_cast<std::size_t>(o.arity), 0);
            for (int pos = 0; pos < o.arity; ++pos) t[static_cast<std::size_t>(pos)] = static_cast<int>((packed >> pos) & 1u);
            tuples.push_back(std::move(t));
        }
        const Relation& original = inst.language().relation(c.relation);
        out.instance.constraints.push_back(
            {c.vars, Relation(original.name(), o.arity, 2, std::move(tuples))});
    }
    for (const auto& [key, mask] : state.tables) {
        std::vector<std::string> names;
        std::string label = "subset";
        for (int idx : key) {
            names.push_back(inst.variables()[static_cast<std::size_t>(idx)]);
            label += "_" + inst.variables()[static_cast<std::size_t>(idx)];
        }
        out.subset_tables.emplace(names, unpack_subset_table(names, mask, label));
    }
    return out;
}

std::optional<Assignment> majority_solve(const CspInstance& inst) {
    require_majority_polymorphism(inst);

    // Very small instances are decided by direct enumeration.
    if (inst.variables().size() < 3) {
        Budget tiny;
        tiny.brute_vars = 2;
        return brute_solve(inst, tiny);
    }

    MajorityState state = build_majority_state(inst);
    bool satisfiable = true;
    bool changed = true;
    while (changed && satisfiable) {
        changed = false;
        satisfiable = majority_sweep(state, changed);
    }
    if (!satisfiable) return std::nullopt;

    // Extension phase: seed with the lexicographically first pair solution,
    // then extend one declared variable at a time. The consistency fixpoint
    // guarantees each step has a witnessing value.
    std::vector<int> fixed(static_cast<std::size_t>(state.n), -1);
    VarMask fixed_mask = 0;
    const std::uint8_t pair = state.table_of({0, 1});
    int seed_rank = -1;
    for (int rank = 0; rank < 4; ++rank)
        if ((pair >> rank) & 1) {
            seed_rank = rank;
            break;
        }
    if (seed_rank < 0) throw Error("internal: satisfiable fixpoint with an empty pair table");
    fixed[0] = (seed_rank >> 1) & 1;
    fixed[1] = seed_rank & 1;
    fixed_mask |= 0b11;

    for (int next = 2; next < state.n; ++next) {
        bool extended = false;
        for (int value = 0; value < 2 && !extended; ++value) {
            fixed[static_cast<std::size_t>(next)] = value;
            if (state.admits(fixed, fixed_mask | (VarMask{1} << next))) extended = true;
        }
        if (!extended)
            throw Error("internal: extension failed although the fixpoint was consistent");
        fixed_mask |= VarMask{1} << next;
    }

    Assignment a;
    for (int i = 0; i < state.n; ++i) a[inst.variables()[static_cast<std::size_t>(i)]] = fixed[static_cast<std::size_t>(i)];
    return a;
}

// --- minority ----------------------------------------------------------------------

namespace {

struct PositionEquation {
    std::set<int> positions;
    int rhs = 0;
};

Relation slice_first(const Relation& r, int value, const std::string& name) {
    std::vector<Tuple> tuples;
    for (const Tuple& t : r.tuples())
        if (t[0] == value) tuples.emplace_back(t.begin() + 1, t.end());
    return Relation(name, r.arity() - 1, r.domain_size(), std::move(tuples));
}

std::vector<PositionEquation> position_equations(const Relation& r) {
    const int k = r.arity();
    if (r.is_empty()) return {{{}, 1}};
    if (k == 1) {
        if (r.size() == 2) return {};
        return {{{0}, r.tuples()[0][0]}};
    }
    const Relation r0 = slice_first(r, 0, "r0");
    const Relation r1 = slice_first(r, 1, "r1");

    auto shifted = [](std::vector<PositionEquation> eqs) {
        for (PositionEquation& eq : eqs) {
            std::set<int> moved;
            for (int p : eq.positions) moved.insert(p + 1);
            eq.positions = std::move(moved);
        }
        return eqs;
    };

    if (r0.is_empty()) {
        std::vector<PositionEquation> eqs = {{{0}, 1}};
        for (PositionEquation& eq : shifted(position_equations(r1))) eqs.push_back(std::move(eq));
        return eqs;
    }
    if (r1.is_empty()) {
        std::vector<PositionEquation> eqs = {{{0}, 0}};
        for (PositionEquation& eq : shifted(position_equations(r0))) eqs.push_back(std::move(eq));
        return eqs;
    }

    // Both slices are realizable: fix one tuple in each, and rewrite the
    // equations of the zero slice under the coordinate change
    // x_i -> x_i xor (c0_i xor c1_i) x_0.
    const Tuple& c0 = r0.tuples().front();
    const Tuple& c1 = r1.tuples().front();
    std::vector<PositionEquation> eqs;
    for (const PositionEquation& eq : position_equations(r0)) {
        PositionEquation out;
        out.rhs = eq.rhs;
        int toggles = 0;
        for (int sub : eq.positions) {
            out.positions.insert(sub + 1);
            if ((c0[static_cast<std::size_t>(sub)] ^ c1[static_cast<std::size_t>(sub)]) & 1) ++toggles;
        }
        if (toggles & 1) out.positions.insert(0);
        eqs.push_back(std::move(out));
    }
    return eqs;
}

} // namespace

std::vector<LinearEquation> minority_to_equations(const Relation& r,
                                                  const std::vector<std::string>& vars) {
    if (r.domain_size() != 2) throw PreconditionError("linear rewriting needs domain size 2");
    if (static_cast<int>(vars.size()) != r.arity())
        throw ValidationError("variable list length differs from the relation arity");
    if (!is_polymorphism(ops::minority(), r))
        throw PreconditionError("the minority operation is not a polymorphism of " + r.name());

    std::vector<LinearEquation> out;
    for (const PositionEquation& eq : position_equations(r)) {
        std::vector<std::string> names;
        for (int p : eq.positions) names.push_back(vars[static_cast<std::size_t>(p)]);
        LinearEquation normalized = make_equation(std::move(names), eq.rhs);
        if (normalized.vars.empty() && normalized.rhs == 0) continue; // trivially true
        out.push_back(std::move(normalized));
    }
    return out;
}

std::optional<Assignment> gaussian_solve(const std::vector<LinearEquation>& equations,
                                         const std::vector<std::string>& vars) {
    std::map<std::string, int> var_index;
    for (std::size_t i = 0; i < vars.size(); ++i) var_index[vars[i]] = static_cast<int>(i);

    using Row = std::pair<std::set<int>, int>; // variable indices, rhs
    std::vector<Row> pivot_rows;               // row i is solved for pivots[i]
    std::vector<int> pivots;

    for (const LinearEquation& eq : equations) {
        Row row;
        row.second = eq.rhs & 1;
        for (const std::string& v : eq.vars) {
            auto it = var_index.find(v);
            if (it == var_index.end()) throw ValidationError("equation uses unknown variable " + v);
            if (!row.first.insert(it->second).second) row.first.erase(it->second);
        }
        // Reduce by the rows already solved.
        for (std::size_t i = 0; i < pivot_rows.size(); ++i) {
            if (!row.first.count(pivots[i])) continue;
            for (int p : pivot_rows[i].first) {
                if (!row.first.insert(p).second) row.first.erase(p);
            }
            row.second ^= pivot_rows[i].second;
        }
        if (row.first.empty()) {
            if (row.second) return std::nullopt; // derived 0 = 1
            continue;
        }
        pivots.push_back(*row.first.rbegin()); // solve for the latest variable
        pivot_rows.push_back(std::move(row));
    }

    std::vector<int> value(vars.size(), 0); // unresolved variables default to 0
    for (std::size_t i = pivot_rows.size(); i-- > 0;) {
        int v = pivot_rows[i].second;
        for (int p : pivot_rows[i].first)
            if (p != pivots[i]) v ^= value[static_cast<std::size_t>(p)];
        value[static_cast<std::size_t>(pivots[i])] = v;
    }

    Assignment a;
    for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = value[i];
    return a;
}

std::optional<Assignment> minority_solve(const CspInstance& inst) {
    if (inst.language().domain_size() != 2)
        throw PreconditionError("minority solving needs domain size 2");
    if (!is_polymorphism(ops::minority(), inst.language()))
        throw PreconditionError("the minority operation is not a polymorphism of the language");

    std::vector<LinearEquation> equations;
    for (const Constraint& c : inst.constraints()) {
        std::vector<LinearEquation> eqs =
            minority_to_equations(inst.language().relation(c.relation), c.vars);
        equations.insert(equations.end(), std::make_move_iterator(eqs.begin()),
                         std::make_move_iterator(eqs.end()));
    }
    return gaussian_solve(equations, inst.variables());
}

// --- dispatch -------------------------------------------------------------------------

DispatchResult dispatch_solve(const CspInstance& inst) {
    const std::vector<SchaeferOp> witnesses = schaefer_witnesses(inst.language());
    if (witnesses.empty())
        throw PreconditionError(
            "no tractable method: none of the six qualifying operations is a polymorphism");

    DispatchResult result;
    std::optional<Assignment> solution;
    switch (witnesses.front()) {
        case SchaeferOp::Const0:
            result.method = "const0";
            solution = solve_constant(inst, 0);
            break;
        case SchaeferOp::Const1:
            result.method = "const1";
            solution = solve_constant(inst, 1);
            break;
        case SchaeferOp::And:
            result.method = "ac-and";
            solution = arc_consistency_solve(inst, ops::conjunction());
            break;
        case SchaeferOp::Or:
            result.method = "ac-or";
            solution = arc_consistency_solve(inst, ops::disjunction());
            break;
        case SchaeferOp::Majority:
            result.method = "majority";
            solution = majority_solve(inst);
            break;
        case SchaeferOp::Minority:
            result.method = "minority";
            solution = minority_solve(inst);
            break;
    }

    if (solution && !satisfies_all(inst, *solution))
        throw Error("internal: solver produced a non-satisfying assignment via " + result.method);
    result.satisfiable = solution.has_value();
    result.assignment = std::move(solution);
    return result;
}

} // namespace polycsp
