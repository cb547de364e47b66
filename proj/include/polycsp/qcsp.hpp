#pragma once

#include "polycsp/core.hpp"

#include <functional>

namespace polycsp {

/// One maximal run of equal quantifiers in a prefix.
struct PrefixBlock {
    Quantifier quantifier;
    int count = 0;

    friend bool operator==(const PrefixBlock&, const PrefixBlock&) = default;
};

/// The quantifier pattern of a prefix: adjacent blocks alternate and every
/// block is non-empty.
struct PrefixPattern {
    std::vector<PrefixBlock> blocks;
};

/// Sigma_k / Pi_k label: the leading quantifier and the number of blocks.
struct PrefixClass {
    Quantifier leading = Quantifier::Exists;
    int level = 1;

    friend bool operator==(const PrefixClass&, const PrefixClass&) = default;
};

PrefixPattern prefix_pattern(const QcspInstance& inst);

/// The class of a pattern. An empty prefix counts as existential level 1.
PrefixClass classify_prefix(const PrefixPattern& pattern);

std::string to_string(const PrefixClass& cls);

/// One component of a universal-assignment family: all assignments mapping at
/// most max_hits variables to the given value.
struct FamilyPart {
    int max_hits = 0;
    int value = 0;

    friend bool operator==(const FamilyPart&, const FamilyPart&) = default;
};

/// A union of such components, written [<= j, b] below.
struct AssignmentFamily {
    std::vector<FamilyPart> parts;

    friend bool operator==(const AssignmentFamily&, const AssignmentFamily&) = default;
};

AssignmentFamily family_at_most(int j, int value);
AssignmentFamily family_union(AssignmentFamily a, const AssignmentFamily& b);
std::string to_string(const AssignmentFamily& fam);

/// The deduplicated members of the family over the given universal variables.
/// Enumeration is lexicographic with value 1 ordered before 0, so the
/// all-true assignment comes first and assignments with few hits lead.
std::vector<Assignment> enumerate_family(const AssignmentFamily& fam,
                                         const std::vector<std::string>& universals,
                                         const Budget& budget = {});

/// The canonical sound family for the strongest qualifying operation of the
/// language: [<=1,0] under and, [<=1,1] under or, [<=2,0] under majority or
/// minority. Throws when no qualifying operation exists.
AssignmentFamily default_family_for(const ConstraintLanguage& lang);

using CspSolver = std::function<std::optional<Assignment>(const CspInstance&)>;

struct Pi2Result {
    bool truth = false;
    /// The first failing universal assignment in enumeration order, present
    /// exactly when truth is false.
    std::optional<Assignment> counterexample;
};

/// Decision procedure for universal-then-existential prefixes: every family
/// member is substituted into the universal block and the residual instance
/// over the existential variables goes to the base solver. True iff every
/// member has a satisfiable residue. The family must be sound for one of the
/// language's qualifying operations, which is checked before any work.
Pi2Result pi2_decide(const QcspInstance& inst, const AssignmentFamily& fam,
                     const CspSolver& base, const Budget& budget = {});

} // namespace polycsp
