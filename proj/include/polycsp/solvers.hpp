#pragma once

#include "polycsp/core.hpp"

#include <map>

namespace polycsp {

/// A GF(2) equation: the exclusive or of the listed variables equals rhs.
/// Variables are sorted and appear at most once; pairs cancel when an
/// equation is normalized.
struct LinearEquation {
    std::vector<std::string> vars;
    int rhs = 0;

    friend bool operator==(const LinearEquation&, const LinearEquation&) = default;
};

/// Builds a normalized equation from a possibly repeating variable list.
LinearEquation make_equation(std::vector<std::string> vars, int rhs);

struct TightenedConstraint {
    std::vector<std::string> vars;
    Relation relation;
};

/// A working copy of an instance whose per-constraint relations have been
/// replaced by subsets during consistency processing.
struct TightenedInstance {
    std::vector<std::string> variables;
    std::vector<TightenedConstraint> constraints;
};

/// Solver for a language preserved by a constant operation: satisfiable iff
/// every constrained relation is non-empty, witnessed by the all-value map.
std::optional<Assignment> solve_constant(const CspInstance& inst, int value);

/// Arc consistency run to its fixpoint: variable domains are intersected
/// with every constraint projection and relations are cut down to the
/// surviving domains until nothing changes. nullopt when a relation empties.
/// This transformation preserves the solution set and is independent of the
/// processing order.
std::optional<TightenedInstance> arc_consistency_tighten(const CspInstance& inst);

/// Decision procedure for languages preserved by the boolean and / or
/// operations. After the fixpoint, the assignment reads each variable off
/// its final domain: under and, 0 unless the domain collapsed to {1}; under
/// or, the roles of the two values swap.
std::optional<Assignment> arc_consistency_solve(const CspInstance& inst,
                                                const Operation& semilattice);

/// Outcome of the consistency phase of the majority solver. Constraints of
/// arity at most three are replaced by their partial-solution sets, and one
/// implicit full constraint is maintained per variable subset of size <= 3;
/// only subsets whose table tightened below full are materialized here.
struct MajorityTightening {
    bool satisfiable = true;
    TightenedInstance instance;
    std::map<std::vector<std::string>, Relation> subset_tables;
};

MajorityTightening majority_tighten(const CspInstance& inst);

/// Solver for majority-preserved languages: consistency over all <= 3 variable
/// subsets, then extension of a pair solution one variable at a time in the
/// declared variable order.
std::optional<Assignment> majority_solve(const CspInstance& inst);

/// Rewrites a minority-preserved relation on the given variable list as an
/// equivalent conjunction of GF(2) equations, by recursion on the arity.
/// An empty relation yields the single unsatisfiable equation {} = 1.
std::vector<LinearEquation> minority_to_equations(const Relation& r,
                                                  const std::vector<std::string>& vars);

/// GF(2) elimination. Each equation is solved for its latest variable in the
/// given order and substituted away; unresolved variables default to 0.
/// nullopt exactly when a contradiction 0 = 1 is derived.
std::optional<Assignment> gaussian_solve(const std::vector<LinearEquation>& equations,
                                         const std::vector<std::string>& vars);

/// Solver for minority-preserved languages: every constraint becomes linear
/// equations, solved by elimination.
std::optional<Assignment> minority_solve(const CspInstance& inst);

struct DispatchResult {
    bool satisfiable = false;
    std::optional<Assignment> assignment;
    std::string method;
};

/// Routes an instance to the solver matching the first preserved operation
/// in priority order const0, const1, and, or, majority, minority. A returned
/// assignment is re-checked against the relation semantics. Throws
/// PreconditionError when no qualifying operation exists; callers may fall
/// back to exhaustive search.
DispatchResult dispatch_solve(const CspInstance& inst);

} // namespace polycsp
