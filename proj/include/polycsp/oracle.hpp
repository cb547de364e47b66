#pragma once

#include "polycsp/core.hpp"

namespace polycsp {

/// An assignment defined on a subset of an instance's variables.
using PartialAssignment = std::map<std::string, int>;

/// Exhaustive search over all d^|V| assignments, in lexicographic order of
/// the declared variables. Returns the first satisfying assignment, or
/// nullopt when none exists. Deliberately naive ground truth.
std::optional<Assignment> brute_solve(const CspInstance& inst, const Budget& budget = {});

/// Truth by recursive game-tree evaluation in prefix order: every universal
/// branch must hold, some existential branch must hold.
bool brute_eval_qcsp(const QcspInstance& inst, const Budget& budget = {});

/// True iff every constraint has a witnessing tuple that agrees with p on the
/// constrained variables where p is defined. An empty relation admits no
/// witness, so any p fails against a constraint over it.
bool is_partial_solution(const CspInstance& inst, const PartialAssignment& p);

/// The smallest relation definable from the language that contains r: the set
/// of coordinatewise images of r's tuple list (in stored order) under every
/// polymorphism of arity |r.tuples|. The input is always contained in the
/// result, via the projections. An empty r yields an empty result, as there
/// are no operations of arity zero.
Relation pp_closure(const Relation& r, const ConstraintLanguage& lang, const Budget& budget = {});

} // namespace polycsp
