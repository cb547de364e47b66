#pragma once

#include "polycsp/core.hpp"

#include <array>
#include <optional>

namespace polycsp {

/// Factories for the standard boolean operations. All over domain {0,1}
/// unless a domain size is given.
namespace ops {

Operation constant(int value, int domain_size = 2); // unary
Operation identity(int domain_size = 2);
Operation negation();
Operation conjunction();
Operation disjunction();
Operation exclusive_or();
Operation majority(); // (x and y) or (x and z) or (y and z)
Operation minority(); // x xor y xor z
/// Projection onto the given zero-based coordinate.
Operation projection(int index, int arity, int domain_size = 2);

} // namespace ops

/// The six operations whose presence as polymorphisms decides boolean CSP
/// tractability, in dispatch priority order.
enum class SchaeferOp { Const0, Const1, And, Or, Majority, Minority };

inline constexpr std::array<SchaeferOp, 6> kSchaeferOps = {
    SchaeferOp::Const0, SchaeferOp::Const1, SchaeferOp::And,
    SchaeferOp::Or,     SchaeferOp::Majority, SchaeferOp::Minority};

Operation schaefer_operation(SchaeferOp op);
std::string to_string(SchaeferOp op);

/// A concrete failure of the closure property: applying the operation
/// coordinatewise to these tuples of the named relation leaves the relation.
struct PolymorphismWitness {
    std::string relation;
    std::vector<Tuple> tuples;
};

bool is_polymorphism(const Operation& f, const Relation& r);
bool is_polymorphism(const Operation& f, const ConstraintLanguage& lang);

/// First violation in (relation name, tuple sequence) order, or nullopt when
/// f preserves every relation of the language.
std::optional<PolymorphismWitness> polymorphism_violation(const Operation& f,
                                                          const ConstraintLanguage& lang);

/// All d^(d^m) operations of the given arity, in ascending table order.
std::vector<Operation> all_operations_of_arity(int arity, int domain_size,
                                               const Budget& budget = {});

/// Exactly the arity-m polymorphisms of the language, in ascending table
/// order. Always contains the m projections.
std::vector<Operation> polymorphisms_of_arity(const ConstraintLanguage& lang, int arity,
                                              const Budget& budget = {});

/// f(d_1, ..., d_k) = inner(d_coordinate) on every input. The coordinate is
/// zero-based; the smallest matching coordinate is reported.
struct EssentiallyUnaryWitness {
    int coordinate;
    Operation inner;
};

std::optional<EssentiallyUnaryWitness> essentially_unary_witness(const Operation& f);

/// True iff f is essentially unary through a bijective unary operation.
bool acts_as_permutation(const Operation& f);

/// Composition g(d...) = outer(inner[0](d...), ..., inner[n-1](d...)).
Operation compose(const Operation& outer, const std::vector<Operation>& inner);

/// The subset of the six operations preserved by the language, in priority
/// order. Every operation is reported, not just the first.
std::vector<SchaeferOp> schaefer_witnesses(const ConstraintLanguage& lang);

/// Given a boolean operation that is not essentially unary, extracts one of
/// {and, or, majority, minority} generated by it: constant diagonals yield a
/// binary xor/and style construction, otherwise the operation is made
/// idempotent and its arity is reduced by identifying argument pairs
/// (lexicographic order, first non-projection wins) until an idempotent
/// non-projection of arity 2 or 3 remains and the case table applies.
Operation derive_schaefer_generator(const Operation& f);

} // namespace polycsp
