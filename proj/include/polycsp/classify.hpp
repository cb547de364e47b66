#pragma once

#include "polycsp/algebra.hpp"

namespace polycsp {

enum class ProblemKind { Csp, Qcsp, QcspPrefix };

/// A complexity verdict for one problem family over a language. Tractable
/// verdicts carry the full set of witnessing operations; hard verdicts carry
/// the completeness class instead.
struct Classification {
    ProblemKind problem = ProblemKind::Csp;
    Quantifier prefix_leading = Quantifier::Forall; // meaningful for QcspPrefix only
    int prefix_level = 0;                           // k, meaningful for QcspPrefix only
    bool tractable = false;
    std::vector<SchaeferOp> witnesses;
    std::string hardness_class;
};

/// Tractable with the exact preserved subset of the six operations, or
/// NP-complete when none is a polymorphism. The test probes six fixed tables;
/// it never enumerates operation spaces.
Classification schaefer_classify(const ConstraintLanguage& lang);

/// Tractable iff one of and/or/majority/minority is a polymorphism (the
/// constant operations do not qualify here); otherwise PSPACE-complete.
Classification qcsp_classify(const ConstraintLanguage& lang);

/// Classification for formulas whose quantifier pattern has level k with the
/// given leading quantifier. Certified labels exist for leading-forall even
/// k >= 2 and leading-exists odd k >= 3; other prefix classes are rejected.
Classification bounded_alternation_classify(const ConstraintLanguage& lang, int k,
                                            Quantifier leading);

} // namespace polycsp
