#pragma once

#include "polycsp/core.hpp"

#include <map>
#include <variant>

namespace polycsp {

struct EqualityAtom {
    std::string left;
    std::string right;

    friend bool operator==(const EqualityAtom&, const EqualityAtom&) = default;
};

using BodyAtom = std::variant<Constraint, EqualityAtom>;

/// An existentially quantified conjunctive definition of a relation: the
/// target holds on the free variables exactly when some assignment to the
/// bound variables satisfies every body atom.
struct PpDefinition {
    std::string target;
    std::vector<std::string> free_vars;
    std::vector<std::string> bound_vars;
    std::vector<BodyAtom> body;
};

/// As PpDefinition, but bound variables carry either quantifier and the
/// target is recovered by game-tree evaluation over them.
struct FewDefinition {
    std::string target;
    std::vector<std::string> free_vars;
    std::vector<std::pair<Quantifier, std::string>> bound_vars;
    std::vector<BodyAtom> body;
};

FewDefinition to_few_definition(const PpDefinition& def);

/// The relation defined on the free variables, by exhaustive evaluation.
Relation eval_pp_definition(const PpDefinition& def, const ConstraintLanguage& lang,
                            const Budget& budget = {});
Relation eval_few_definition(const FewDefinition& def, const ConstraintLanguage& lang,
                             const Budget& budget = {});

/// Constructive definability: when r is fixed by its closure under the
/// language's polymorphisms, builds a definition whose variables are the
/// points of D^m (m = number of tuples of r), whose free variables are r's
/// column points (duplicate columns aliased through equality atoms), and
/// whose body encodes the polymorphism conditions. Returns nullopt when r is
/// not definable from the language. A verification tool, not a compiler.
std::optional<PpDefinition> synthesize_pp_definition(const Relation& r,
                                                     const ConstraintLanguage& lang,
                                                     const Budget& budget = {});

/// Rewrites an instance over a derived language into one over the definition
/// language: per constraint, the definition body is substituted with bound
/// variables renamed apart as "<index>.<name>", and every equality atom is
/// eliminated by merging onto the lexicographically smaller variable.
CspInstance inline_reduce_csp(const CspInstance& inst,
                              const std::map<std::string, PpDefinition>& defs,
                              LanguagePtr target_language);

/// The quantified inlining may discover an equality whose later variable is
/// universal, in which case the whole formula is false; that outcome is a
/// first-class result rather than an encoded instance.
struct ConstantFalse {
    friend bool operator==(const ConstantFalse&, const ConstantFalse&) = default;
};

using QcspReduction = std::variant<QcspInstance, ConstantFalse>;

/// As inline_reduce_csp for quantified instances: definition quantifiers are
/// appended to the end of the prefix, and equalities keep the earlier
/// quantified variable.
QcspReduction inline_reduce_qcsp(const QcspInstance& inst,
                                 const std::map<std::string, FewDefinition>& defs,
                                 LanguagePtr target_language);

/// Builds, for a definition of a k-ary relation over a boolean language, a
/// (k+2)-ary relation that recovers the target whenever its last two
/// arguments jointly cover {0,1} and that is monotone under coverage:
/// quantifier-free bodies ignore the extra columns, existential steps project
/// the bound column, and universal steps conjoin the two substitutions of the
/// bound column by the extra arguments.
Relation spread_express(const FewDefinition& def, const ConstraintLanguage& lang,
                        const Budget& budget = {});

/// Prefix-class-preserving rewriting: two fresh universally quantified
/// variables join the outermost universal block and every constraint R(v...)
/// becomes spread(R)(v..., y1, y2). Defined for leading-forall even levels
/// >= 2 and leading-exists odd levels >= 3.
QcspInstance bounded_alt_reduce(const QcspInstance& inst,
                                const std::map<std::string, Relation>& spread);

/// (r x {0,1}) together with the two constant tuples; r is recovered by
/// universally quantifying the appended coordinate. The result has both
/// constant polymorphisms.
Relation lift_with_constants(const Relation& r);

/// Applies the lift to every constraint of an instance, sharing one fresh
/// universal variable appended to the end of the prefix.
QcspInstance lift_with_constants_instance(const QcspInstance& inst);

/// {(0, t...)} for tuples of r plus {(1, flipped t...)}; the result is
/// preserved by the boolean negation.
Relation negation_closure(const Relation& r);

/// Instance transforms threading a fresh pivot variable through every
/// constraint: R(v...) becomes closure(R)(pivot, v...). The quantified form
/// places the pivot outermost under the chosen quantifier.
CspInstance negation_closure_instance(const CspInstance& inst);
QcspInstance negation_closure_instance(const QcspInstance& inst, Quantifier pivot_quantifier);

} // namespace polycsp
